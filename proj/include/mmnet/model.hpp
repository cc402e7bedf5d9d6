/**
 * Copyright 2026 The mmnet authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef MMNET_MODEL_HPP_
#define MMNET_MODEL_HPP_

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "mmnet/activations.hpp"
#include "mmnet/layers.hpp"
#include "mmnet/tensor.hpp"

namespace mmnet {

// ---------------------------------------------------------------------------
// Layer descriptors. An ArchitectureSpec is purely declarative; parameters
// live in a WeightStore keyed by "<layer>.<param>" names.
// ---------------------------------------------------------------------------

struct ConvDesc {
  ConvMode mode = ConvMode::Standard;
  int kernel = 3;
  int in_channels = 0;
  int out_channels = 0;  // equals in_channels for depthwise
  int stride = 1;
  PaddingMode padding = PaddingMode::Same;
  bool bias = false;
};

struct BatchNormDesc {
  int features = 0;
  double epsilon = 1e-5;
  double momentum = 0.99;
};

struct ActivationDesc {
  ActivationKind kind;
};

struct GlobalAvgPoolDesc {};

struct DenseDesc {
  int in_dim = 0;
  int out_dim = 0;
};

struct DropoutDesc {
  double rate = 0.5;
};

struct SoftmaxDesc {};

using LayerDesc = std::variant<ConvDesc, BatchNormDesc, ActivationDesc,
                               GlobalAvgPoolDesc, DenseDesc, DropoutDesc,
                               SoftmaxDesc>;

struct Layer {
  std::string name;
  LayerDesc desc;
};

/// Declarative layer list for backbone plus head. input_shape is one
/// sample (h, w, c); forward adds the batch axis.
struct ArchitectureSpec {
  Shape input_shape{224, 224, 3};
  int num_classes = 0;
  std::vector<Layer> layers;
  size_t head_start = 0;  // index of the first head layer

  bool is_backbone_layer(size_t i) const { return i < head_start; }
};

enum class HeadKind { BaselineFC, ReducedHead };

HeadKind parse_head_kind(const std::string& s);
std::string head_kind_name(HeadKind k);

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// The 28-layer MobileNet v1 convolutional stack: 3x3 stride-2 stem with 32
/// filters, then 13 depthwise-separable blocks following the canonical
/// filter progression up to 1024, batch norm and activation after every
/// convolution, ending before pooling. Input extent must divide by 32.
/// width scales every channel count (0.5 halves them).
ArchitectureSpec build_backbone(const Shape& input_shape, double width = 1.0,
                                ActivationKind act = ActivationKind::swish());

/// Head fragment. BaselineFC: global pool, dense(features -> classes),
/// softmax. ReducedHead: global pool, batchnorm, dense(features -> 512),
/// batchnorm, Swish, dropout, dense(512 -> classes), softmax.
std::vector<Layer> build_head(HeadKind kind, int num_classes,
                              int in_features = 1024,
                              ActivationKind act = ActivationKind::swish(),
                              double dropout_rate = 0.5);

/// Backbone + head with head_start set.
ArchitectureSpec build_model(const Shape& input_shape, double width,
                             HeadKind head, int num_classes,
                             ActivationKind act = ActivationKind::swish(),
                             double dropout_rate = 0.5);

/// Checks shape chaining and that exactly one softmax sits at the end.
void validate_spec(const ArchitectureSpec& spec);

/// Output shape of every layer given the sample input shape (no batch axis;
/// activations reported as (h, w, c) or (features)).
std::vector<Shape> infer_shapes(const ArchitectureSpec& spec);

// ---------------------------------------------------------------------------
// Accounting
// ---------------------------------------------------------------------------

enum class ParamScope { All, Backbone, Head };
enum class ParamCounting { Trainable, Total };

/// dense: in*out + out. standard conv: k^2*in*out (+out if biased).
/// depthwise: k^2*channels. batch norm: gamma+beta trainable, running
/// mean/var non-trainable (2 + 2 per feature).
int64_t count_params(const ArchitectureSpec& spec, ParamScope scope,
                     ParamCounting counting);

/// Multiply-accumulate count for one sample. standard conv: k^2*M*N*Df^2;
/// depthwise: k^2*M*Df^2; pointwise: M*N*Df^2 (Df = output spatial size);
/// dense: in*out.
int64_t count_flops(const ArchitectureSpec& spec);

/// Per-layer MAC count, same order as spec.layers.
std::vector<int64_t> per_layer_flops(const ArchitectureSpec& spec);

/// Trainable + non-trainable parameters of the class-independent part of
/// the head (everything up to, excluding, the final classifier dense).
int64_t head_trunk_params(const ArchitectureSpec& spec);

/// Human-readable layer table: name, type, output shape, params, MACs.
void print_layer_table(const ArchitectureSpec& spec, std::ostream& os);

std::string layer_type_name(const LayerDesc& desc);

}  // namespace mmnet

#endif  // MMNET_MODEL_HPP_
