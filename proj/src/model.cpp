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
#include "mmnet/model.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace mmnet {

namespace {

int scaled(int channels, double width) {
  return std::max(1, static_cast<int>(std::lround(channels * width)));
}

void push_conv_bn_act(ArchitectureSpec& spec, const std::string& name,
                      ConvDesc conv, ActivationKind act) {
  spec.layers.push_back({name, conv});
  spec.layers.push_back(
      {name + "_bn", BatchNormDesc{conv.out_channels, 1e-5, 0.99}});
  spec.layers.push_back({name + "_act", ActivationDesc{act}});
}

}  // namespace

HeadKind parse_head_kind(const std::string& s) {
  if (s == "baseline") return HeadKind::BaselineFC;
  if (s == "reduced") return HeadKind::ReducedHead;
  throw ConfigError("unknown head kind '" + s + "' (baseline|reduced)");
}

std::string head_kind_name(HeadKind k) {
  return k == HeadKind::BaselineFC ? "baseline" : "reduced";
}

ArchitectureSpec build_backbone(const Shape& input_shape, double width,
                                ActivationKind act) {
  if (input_shape.rank() != 3)
    throw ConfigError("backbone input shape must be (h, w, c)");
  if (input_shape[0] % 32 != 0 || input_shape[1] % 32 != 0)
    throw ConfigError("backbone input extent " + input_shape.str() +
                      " must be divisible by 32");
  if (width <= 0.0) throw ConfigError("width multiplier must be > 0");

  ArchitectureSpec spec;
  spec.input_shape = input_shape;

  const int in_c = static_cast<int>(input_shape[2]);
  int c = scaled(32, width);
  push_conv_bn_act(spec, "conv0",
                   ConvDesc{ConvMode::Standard, 3, in_c, c, 2,
                            PaddingMode::Same, false},
                   act);

  // (pointwise filters, depthwise stride) per separable block.
  struct Block { int filters; int stride; };
  static constexpr Block kBlocks[13] = {
      {64, 1},  {128, 2}, {128, 1}, {256, 2},  {256, 1},
      {512, 2}, {512, 1}, {512, 1}, {512, 1},  {512, 1},
      {512, 1}, {1024, 2}, {1024, 1}};

  for (int i = 0; i < 13; ++i) {
    const std::string base = "ds" + std::to_string(i + 1);
    push_conv_bn_act(spec, base + "_dw",
                     ConvDesc{ConvMode::Depthwise, 3, c, c, kBlocks[i].stride,
                              PaddingMode::Same, false},
                     act);
    int next = scaled(kBlocks[i].filters, width);
    push_conv_bn_act(spec, base + "_pw",
                     ConvDesc{ConvMode::Pointwise, 1, c, next, 1,
                              PaddingMode::Same, false},
                     act);
    c = next;
  }

  spec.head_start = spec.layers.size();
  return spec;
}

std::vector<Layer> build_head(HeadKind kind, int num_classes, int in_features,
                              ActivationKind act, double dropout_rate) {
  if (num_classes < 2) throw ConfigError("head needs num_classes >= 2");
  std::vector<Layer> head;
  head.push_back({"head_pool", GlobalAvgPoolDesc{}});
  if (kind == HeadKind::BaselineFC) {
    head.push_back({"head_fc", DenseDesc{in_features, num_classes}});
  } else {
    head.push_back({"head_bn1", BatchNormDesc{in_features, 1e-5, 0.99}});
    head.push_back({"head_fc1", DenseDesc{in_features, 512}});
    head.push_back({"head_bn2", BatchNormDesc{512, 1e-5, 0.99}});
    head.push_back({"head_act", ActivationDesc{act}});
    head.push_back({"head_drop", DropoutDesc{dropout_rate}});
    head.push_back({"head_fc2", DenseDesc{512, num_classes}});
  }
  head.push_back({"head_softmax", SoftmaxDesc{}});
  return head;
}

ArchitectureSpec build_model(const Shape& input_shape, double width,
                             HeadKind head, int num_classes,
                             ActivationKind act, double dropout_rate) {
  ArchitectureSpec spec = build_backbone(input_shape, width, act);
  const auto shapes = infer_shapes(spec);
  const Shape& last = shapes.back();
  const int features = static_cast<int>(last[last.rank() - 1]);
  auto fragment = build_head(head, num_classes, features, act, dropout_rate);
  for (auto& l : fragment) spec.layers.push_back(std::move(l));
  spec.num_classes = num_classes;
  validate_spec(spec);
  return spec;
}

std::vector<Shape> infer_shapes(const ArchitectureSpec& spec) {
  std::vector<Shape> shapes;
  shapes.reserve(spec.layers.size());
  Shape cur = spec.input_shape;  // (h, w, c) or (features)
  for (const auto& layer : spec.layers) {
    const LayerDesc& d = layer.desc;
    if (const auto* conv = std::get_if<ConvDesc>(&d)) {
      if (cur.rank() != 3)
        throw ConfigError("layer " + layer.name + ": conv after flatten");
      if (cur[2] != conv->in_channels)
        throw ConfigError("layer " + layer.name + ": expects " +
                          std::to_string(conv->in_channels) +
                          " input channels, got " + std::to_string(cur[2]));
      auto g = detail::conv_geometry(cur[0], cur[1], conv->kernel,
                                     conv->stride, conv->padding);
      cur = Shape{g.out_h, g.out_w, conv->out_channels};
    } else if (const auto* bn = std::get_if<BatchNormDesc>(&d)) {
      if (cur[cur.rank() - 1] != bn->features)
        throw ConfigError("layer " + layer.name + ": feature count mismatch");
    } else if (std::holds_alternative<GlobalAvgPoolDesc>(d)) {
      if (cur.rank() != 3)
        throw ConfigError("layer " + layer.name + ": pool needs a rank-3 map");
      cur = Shape{cur[2]};
    } else if (const auto* dense = std::get_if<DenseDesc>(&d)) {
      if (cur.rank() != 1 || cur[0] != dense->in_dim)
        throw ConfigError("layer " + layer.name + ": dense expects (" +
                          std::to_string(dense->in_dim) + ") input, got " +
                          cur.str());
      cur = Shape{dense->out_dim};
    }
    // Activation, dropout and softmax preserve shape.
    shapes.push_back(cur);
  }
  return shapes;
}

void validate_spec(const ArchitectureSpec& spec) {
  if (spec.layers.empty()) throw ConfigError("empty architecture");
  infer_shapes(spec);  // throws on a broken chain
  int softmax_count = 0;
  for (const auto& layer : spec.layers)
    if (std::holds_alternative<SoftmaxDesc>(layer.desc)) ++softmax_count;
  if (softmax_count != 1 ||
      !std::holds_alternative<SoftmaxDesc>(spec.layers.back().desc))
    throw ConfigError("architecture must end in exactly one softmax");
  if (spec.head_start > spec.layers.size())
    throw ConfigError("head_start out of range");
}

namespace {

int64_t layer_params(const LayerDesc& d, ParamCounting counting) {
  if (const auto* conv = std::get_if<ConvDesc>(&d)) {
    int64_t k2 = static_cast<int64_t>(conv->kernel) * conv->kernel;
    int64_t n = 0;
    switch (conv->mode) {
      case ConvMode::Standard:
      case ConvMode::Pointwise:
        n = k2 * conv->in_channels * conv->out_channels;
        break;
      case ConvMode::Depthwise:
        n = k2 * conv->in_channels;
        break;
    }
    if (conv->bias) n += conv->out_channels;
    return n;
  }
  if (const auto* bn = std::get_if<BatchNormDesc>(&d)) {
    int64_t per = counting == ParamCounting::Total ? 4 : 2;
    return per * bn->features;
  }
  if (const auto* dense = std::get_if<DenseDesc>(&d)) {
    return static_cast<int64_t>(dense->in_dim) * dense->out_dim +
           dense->out_dim;
  }
  return 0;
}

}  // namespace

int64_t count_params(const ArchitectureSpec& spec, ParamScope scope,
                     ParamCounting counting) {
  int64_t total = 0;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    if (scope == ParamScope::Backbone && !spec.is_backbone_layer(i)) continue;
    if (scope == ParamScope::Head && spec.is_backbone_layer(i)) continue;
    total += layer_params(spec.layers[i].desc, counting);
  }
  return total;
}

int64_t head_trunk_params(const ArchitectureSpec& spec) {
  // Last dense layer of the head is the class-specific classifier.
  size_t classifier = spec.layers.size();
  for (size_t i = spec.layers.size(); i-- > spec.head_start;) {
    if (std::holds_alternative<DenseDesc>(spec.layers[i].desc)) {
      classifier = i;
      break;
    }
  }
  int64_t total = 0;
  for (size_t i = spec.head_start; i < spec.layers.size(); ++i) {
    if (i == classifier) continue;
    total += layer_params(spec.layers[i].desc, ParamCounting::Total);
  }
  return total;
}

std::vector<int64_t> per_layer_flops(const ArchitectureSpec& spec) {
  std::vector<int64_t> flops;
  flops.reserve(spec.layers.size());
  const auto shapes = infer_shapes(spec);
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerDesc& d = spec.layers[i].desc;
    int64_t f = 0;
    if (const auto* conv = std::get_if<ConvDesc>(&d)) {
      const Shape& out = shapes[i];
      int64_t df2 = static_cast<int64_t>(out[0]) * out[1];
      int64_t k2 = static_cast<int64_t>(conv->kernel) * conv->kernel;
      switch (conv->mode) {
        case ConvMode::Standard:
          f = k2 * conv->in_channels * conv->out_channels * df2;
          break;
        case ConvMode::Depthwise:
          f = k2 * conv->in_channels * df2;
          break;
        case ConvMode::Pointwise:
          f = static_cast<int64_t>(conv->in_channels) * conv->out_channels *
              df2;
          break;
      }
    } else if (const auto* dense = std::get_if<DenseDesc>(&d)) {
      f = static_cast<int64_t>(dense->in_dim) * dense->out_dim;
    }
    flops.push_back(f);
  }
  return flops;
}

int64_t count_flops(const ArchitectureSpec& spec) {
  int64_t total = 0;
  for (int64_t f : per_layer_flops(spec)) total += f;
  return total;
}

std::string layer_type_name(const LayerDesc& desc) {
  if (const auto* conv = std::get_if<ConvDesc>(&desc)) {
    switch (conv->mode) {
      case ConvMode::Standard: return "conv";
      case ConvMode::Depthwise: return "depthwise";
      case ConvMode::Pointwise: return "pointwise";
    }
  }
  if (std::holds_alternative<BatchNormDesc>(desc)) return "batchnorm";
  if (const auto* act = std::get_if<ActivationDesc>(&desc))
    return act->kind.name();
  if (std::holds_alternative<GlobalAvgPoolDesc>(desc)) return "avgpool";
  if (std::holds_alternative<DenseDesc>(desc)) return "dense";
  if (std::holds_alternative<DropoutDesc>(desc)) return "dropout";
  if (std::holds_alternative<SoftmaxDesc>(desc)) return "softmax";
  return "?";
}

void print_layer_table(const ArchitectureSpec& spec, std::ostream& os) {
  const auto shapes = infer_shapes(spec);
  const auto flops = per_layer_flops(spec);
  os << std::left << std::setw(16) << "layer" << std::setw(11) << "type"
     << std::setw(16) << "output" << std::right << std::setw(12) << "params"
     << std::setw(14) << "macs" << "\n";
  int64_t ptotal = 0, ftotal = 0;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    int64_t p = layer_params(spec.layers[i].desc, ParamCounting::Total);
    ptotal += p;
    ftotal += flops[i];
    os << std::left << std::setw(16) << spec.layers[i].name << std::setw(11)
       << layer_type_name(spec.layers[i].desc) << std::setw(16)
       << shapes[i].str() << std::right << std::setw(12) << p << std::setw(14)
       << flops[i] << "\n";
  }
  os << std::left << std::setw(43) << "total" << std::right << std::setw(12)
     << ptotal << std::setw(14) << ftotal << "\n";
}

}  // namespace mmnet
