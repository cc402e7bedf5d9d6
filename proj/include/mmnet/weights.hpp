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
#ifndef MMNET_WEIGHTS_HPP_
#define MMNET_WEIGHTS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mmnet/model.hpp"
#include "mmnet/tensor.hpp"

namespace mmnet {

/// Named-tensor parameter storage. Conv layers own "<name>.weight"
/// (+".bias" when biased), dense layers "<name>.weight"/"<name>.bias",
/// batch norm "<name>.gamma"/".beta"/".running_mean"/".running_var".
template <typename Scalar>
struct WeightStore {
  std::map<std::string, Tensor<Scalar>> entries;
  uint32_t version = 1;
  uint64_t creation_seed = 0;

  bool has(const std::string& name) const { return entries.count(name) != 0; }

  Tensor<Scalar>& at(const std::string& name) {
    auto it = entries.find(name);
    if (it == entries.end())
      throw LookupError("missing weight entry '" + name + "'");
    return it->second;
  }
  const Tensor<Scalar>& at(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end())
      throw LookupError("missing weight entry '" + name + "'");
    return it->second;
  }

  template <typename Other>
  WeightStore<Other> cast() const {
    WeightStore<Other> out;
    out.version = version;
    out.creation_seed = creation_seed;
    for (const auto& [k, v] : entries)
      out.entries.emplace(k, v.template cast<Other>());
    return out;
  }
};

using WeightStoref = WeightStore<float>;

/// (name, shape, trainable) of every parameter a layer owns.
struct ParamSpec {
  std::string name;
  Shape shape;
  bool trainable;
};

std::vector<ParamSpec> layer_param_specs(const Layer& layer);
std::vector<ParamSpec> spec_param_specs(const ArchitectureSpec& spec);

/// FNV-1a 64-bit, used to derive per-parameter rng streams from names.
uint64_t fnv1a(const std::string& s);

/// Seeded substitute for pretrained weights: He-scaled normals for conv and
/// dense kernels, zeros/ones for biases and batch-norm parameters. Each
/// parameter draws from its own name-derived stream, so the result does not
/// depend on layer iteration order.
template <typename Scalar>
WeightStore<Scalar> init_weights(const ArchitectureSpec& spec, uint64_t seed) {
  WeightStore<Scalar> store;
  store.creation_seed = seed;
  Rng root(seed);
  for (const auto& layer : spec.layers) {
    const LayerDesc& d = layer.desc;
    if (const auto* conv = std::get_if<ConvDesc>(&d)) {
      int64_t fan_in = static_cast<int64_t>(conv->kernel) * conv->kernel *
                       (conv->mode == ConvMode::Depthwise ? 1
                                                          : conv->in_channels);
      double sigma = std::sqrt(2.0 / static_cast<double>(fan_in));
      Shape kshape = conv->mode == ConvMode::Depthwise
                         ? Shape{conv->kernel, conv->kernel, conv->in_channels}
                         : Shape{conv->kernel, conv->kernel, conv->in_channels,
                                 conv->out_channels};
      Rng r = root.split(fnv1a(layer.name + ".weight"));
      store.entries.emplace(layer.name + ".weight",
                            tensor_filled<Scalar>(kshape, r,
                                                  Dist::normal(0.0, sigma)));
      if (conv->bias) {
        Rng rb = root.split(fnv1a(layer.name + ".bias"));
        store.entries.emplace(
            layer.name + ".bias",
            tensor_filled<Scalar>(Shape{conv->out_channels}, rb,
                                  Dist::constant(0.0)));
      }
    } else if (const auto* bn = std::get_if<BatchNormDesc>(&d)) {
      Rng r(0);
      store.entries.emplace(layer.name + ".gamma",
                            tensor_filled<Scalar>(Shape{bn->features}, r,
                                                  Dist::constant(1.0)));
      store.entries.emplace(layer.name + ".beta",
                            tensor_filled<Scalar>(Shape{bn->features}, r,
                                                  Dist::constant(0.0)));
      store.entries.emplace(layer.name + ".running_mean",
                            tensor_filled<Scalar>(Shape{bn->features}, r,
                                                  Dist::constant(0.0)));
      store.entries.emplace(layer.name + ".running_var",
                            tensor_filled<Scalar>(Shape{bn->features}, r,
                                                  Dist::constant(1.0)));
    } else if (const auto* dense = std::get_if<DenseDesc>(&d)) {
      double sigma = std::sqrt(2.0 / static_cast<double>(dense->in_dim));
      Rng r = root.split(fnv1a(layer.name + ".weight"));
      store.entries.emplace(
          layer.name + ".weight",
          tensor_filled<Scalar>(Shape{dense->in_dim, dense->out_dim}, r,
                                Dist::normal(0.0, sigma)));
      Rng rb(0);
      store.entries.emplace(layer.name + ".bias",
                            tensor_filled<Scalar>(Shape{dense->out_dim}, rb,
                                                  Dist::constant(0.0)));
    }
  }
  return store;
}

struct BindingReport {
  std::vector<std::string> missing;  // spec parameters absent from the store
  std::vector<std::string> extra;    // store entries the spec does not name
};

/// Missing entries are an error at forward time; extra entries are only a
/// warning (forward-compatibility).
BindingReport check_binding(const ArchitectureSpec& spec,
                            const WeightStore<float>& store);

// ---------------------------------------------------------------------------
// Weight container file.
//
// Binary layout (all integers little-endian):
//   magic "MMNW" | u32 version | u64 creation_seed | u32 entry_count
//   per entry: u32 name_len | name bytes | u32 rank | u32 extents[rank]
//              | u32 dtype (0 = f32) | f32 data[product(extents)]
//
// Round-trips are bit-exact. Distinct errors: BadMagicError, VersionError,
// TruncationError, DuplicateNameError.
// ---------------------------------------------------------------------------

void save_weights(const WeightStore<float>& store, const std::string& path);
WeightStore<float> load_weights(const std::string& path);

}  // namespace mmnet

#endif  // MMNET_WEIGHTS_HPP_
