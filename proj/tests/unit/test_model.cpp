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
#include <sstream>

#include "doctest.h"
#include "mmnet/forward.hpp"
#include "mmnet/weights.hpp"
#include "oracles.hpp"

using namespace mmnet;

TEST_CASE("backbone reduces spatial extent by 32") {
  for (Index size : {32, 64, 96, 224}) {
    auto spec = build_backbone(Shape{size, size, 3});
    auto shapes = infer_shapes(spec);
    const Shape& last = shapes.back();
    CHECK(last[0] == size / 32);
    CHECK(last[1] == size / 32);
    CHECK(last[2] == 1024);
  }
}

TEST_CASE("backbone 224 ends at 7x7x1024, toy 32 at 1x1x1024") {
  auto spec = build_backbone(Shape{224, 224, 3});
  auto shapes = infer_shapes(spec);
  CHECK(shapes.back() == Shape{7, 7, 1024});

  auto toy = build_backbone(Shape{32, 32, 3});
  CHECK(infer_shapes(toy).back() == Shape{1, 1, 1024});
}

TEST_CASE("width multiplier scales every channel count") {
  auto half = build_backbone(Shape{64, 64, 3}, 0.5);
  auto full = build_backbone(Shape{64, 64, 3}, 1.0);
  auto hs = infer_shapes(half);
  auto fs = infer_shapes(full);
  REQUIRE(hs.size() == fs.size());
  for (size_t i = 0; i < hs.size(); ++i)
    CHECK(hs[i][2] * 2 == fs[i][2]);
}

TEST_CASE("backbone rejects extents not divisible by 32") {
  CHECK_THROWS_AS(build_backbone(Shape{100, 100, 3}), ConfigError);
}

TEST_CASE("baseline head carries the canonical 1,025,000 parameters") {
  auto spec = build_model(Shape{224, 224, 3}, 1.0, HeadKind::BaselineFC, 1000);
  CHECK(count_params(spec, ParamScope::Head, ParamCounting::Total) ==
        1025000);
}

TEST_CASE("reduced head trunk counts 530,944 parameters") {
  auto spec = build_model(Shape{224, 224, 3}, 1.0, HeadKind::ReducedHead,
                          1000);
  CHECK(head_trunk_params(spec) == 530944);
  double ratio = static_cast<double>(head_trunk_params(spec)) / 1025000.0;
  CHECK(ratio <= 0.52);
  CHECK(ratio == doctest::Approx(0.518).epsilon(1e-3));
}

TEST_CASE("reduced head classifier adds 512*C + C") {
  auto spec = build_model(Shape{32, 32, 3}, 1.0, HeadKind::ReducedHead, 2);
  int64_t head = count_params(spec, ParamScope::Head, ParamCounting::Total);
  CHECK(head - head_trunk_params(spec) == 512 * 2 + 2);
}

TEST_CASE("count_params unit formulas") {
  ArchitectureSpec spec;
  spec.input_shape = Shape{1024};
  spec.layers.push_back({"fc", DenseDesc{1024, 1000}});
  CHECK(count_params(spec, ParamScope::All, ParamCounting::Total) == 1025000);

  ArchitectureSpec dw;
  dw.input_shape = Shape{8, 8, 32};
  dw.layers.push_back({"dw", ConvDesc{ConvMode::Depthwise, 3, 32, 32, 1,
                                      PaddingMode::Same, false}});
  CHECK(count_params(dw, ParamScope::All, ParamCounting::Total) == 288);

  ArchitectureSpec empty;
  CHECK(count_params(empty, ParamScope::All, ParamCounting::Total) == 0);
}

TEST_CASE("batch norm counts 2 trainable and 2 non-trainable per feature") {
  ArchitectureSpec spec;
  spec.input_shape = Shape{16};
  spec.layers.push_back({"bn", BatchNormDesc{16}});
  CHECK(count_params(spec, ParamScope::All, ParamCounting::Total) == 64);
  CHECK(count_params(spec, ParamScope::All, ParamCounting::Trainable) == 32);
}

TEST_CASE("flop formulas") {
  ArchitectureSpec stem;
  stem.input_shape = Shape{224, 224, 3};
  stem.layers.push_back({"conv0", ConvDesc{ConvMode::Standard, 3, 3, 32, 2,
                                           PaddingMode::Same, false}});
  CHECK(count_flops(stem) == 10838016);  // 9 * 3 * 32 * 112^2

  ArchitectureSpec dense;
  dense.input_shape = Shape{512};
  dense.layers.push_back({"fc", DenseDesc{512, 2}});
  CHECK(count_flops(dense) == 1024);
}

TEST_CASE("separable blocks cost 1/N + 1/k^2 of the standard conv") {
  auto spec = build_backbone(Shape{224, 224, 3});
  auto shapes = infer_shapes(spec);
  auto flops = per_layer_flops(spec);
  int checked = 0;
  for (size_t i = 0; i + 3 < spec.layers.size(); ++i) {
    const auto* dw = std::get_if<ConvDesc>(&spec.layers[i].desc);
    if (!dw || dw->mode != ConvMode::Depthwise) continue;
    const auto* pw = std::get_if<ConvDesc>(&spec.layers[i + 3].desc);
    REQUIRE(pw != nullptr);
    REQUIRE(pw->mode == ConvMode::Pointwise);
    // equivalent standard convolution at the pointwise output size
    const Shape& out = shapes[i + 3];
    int64_t df2 = out[0] * out[1];
    int64_t std_cost = 9LL * dw->in_channels * pw->out_channels * df2;
    int64_t sep_cost = flops[i] + flops[i + 3];
    // depthwise runs at the same output size here since pointwise is 1x1/s1
    CHECK(sep_cost < std_cost);
    double expected =
        1.0 / pw->out_channels + 1.0 / 9.0;
    CHECK(static_cast<double>(sep_cost) / static_cast<double>(std_cost) ==
          doctest::Approx(expected).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked == 13);
}

TEST_CASE("validate_spec enforces a single trailing softmax") {
  auto spec = build_model(Shape{32, 32, 3}, 0.25, HeadKind::BaselineFC, 3);
  CHECK_NOTHROW(validate_spec(spec));

  auto two = spec;
  two.layers.push_back({"extra_softmax", SoftmaxDesc{}});
  CHECK_THROWS_AS(validate_spec(two), ConfigError);

  auto moved = spec;
  moved.layers.push_back({"late_fc", DenseDesc{3, 3}});
  CHECK_THROWS_AS(validate_spec(moved), ConfigError);
}

TEST_CASE("forward emits probabilities and is deterministic") {
  auto spec = build_model(Shape{32, 32, 3}, 0.25, HeadKind::ReducedHead, 4);
  auto store = init_weights<float>(spec, 7);
  Rng rng(3);
  auto x = tensor_filled<float>(Shape{2, 32, 32, 3}, rng, Dist::uniform(0, 1));

  auto p1 = forward(spec, store, x, RunMode::Infer);
  CHECK(p1.shape() == Shape{2, 4});
  for (Index b = 0; b < 2; ++b) {
    float sum = 0;
    for (Index c = 0; c < 4; ++c) {
      sum += p1(b, c);
      CHECK(p1(b, c) >= 0.0f);
    }
    CHECK(std::abs(sum - 1.0f) < 1e-5f);
  }

  auto p2 = forward(spec, store, x, RunMode::Infer);
  for (Index i = 0; i < p1.size(); ++i) CHECK(p1[i] == p2[i]);
}

TEST_CASE("forward output survives a weight-file round trip") {
  auto spec = build_model(Shape{32, 32, 3}, 0.25, HeadKind::BaselineFC, 3);
  auto store = init_weights<float>(spec, 11);
  Rng rng(5);
  auto x = tensor_filled<float>(Shape{1, 32, 32, 3}, rng, Dist::uniform(0, 1));
  auto before = forward(spec, store, x, RunMode::Infer);

  std::string path = "roundtrip_test.mmnw";
  save_weights(store, path);
  auto loaded = load_weights(path);
  auto after = forward(spec, loaded, x, RunMode::Infer);
  for (Index i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);
  std::remove(path.c_str());
}

TEST_CASE("forward reports the missing parameter by name") {
  auto spec = build_model(Shape{32, 32, 3}, 0.25, HeadKind::BaselineFC, 3);
  auto store = init_weights<float>(spec, 1);
  store.entries.erase("head_fc.bias");
  Rng rng(5);
  auto x = tensor_filled<float>(Shape{1, 32, 32, 3}, rng, Dist::uniform(0, 1));
  CHECK_THROWS_WITH_AS(forward(spec, store, x, RunMode::Infer),
                       doctest::Contains("head_fc.bias"), LookupError);
}

TEST_CASE("tiny spec forward matches a hand-rolled oracle") {
  // conv(2x2 valid, 1->2) -> pool -> dense(2->3) -> softmax on a 4x4 input
  ArchitectureSpec spec;
  spec.input_shape = Shape{4, 4, 1};
  spec.num_classes = 3;
  spec.layers.push_back({"c", ConvDesc{ConvMode::Standard, 2, 1, 2, 1,
                                       PaddingMode::Valid, true}});
  spec.layers.push_back({"p", GlobalAvgPoolDesc{}});
  spec.layers.push_back({"f", DenseDesc{2, 3}});
  spec.layers.push_back({"s", SoftmaxDesc{}});
  spec.head_start = 0;
  validate_spec(spec);

  auto store = init_weights<double>(spec, 17);
  Rng rng(23);
  auto x = tensor_filled<double>(Shape{1, 4, 4, 1}, rng, Dist::uniform(-1, 1));
  auto got = forward(spec, store, x, RunMode::Infer);

  // oracle: direct arithmetic with flat vectors
  const auto& k = store.at("c.weight");
  const auto& kb = store.at("c.bias");
  const auto& w = store.at("f.weight");
  const auto& wb = store.at("f.bias");
  std::vector<double> xv(x.data(), x.data() + x.size());
  std::vector<double> kv(k.data(), k.data() + k.size());
  auto conv = oracle::naive_conv2d_valid(xv, 4, 4, 1, kv, 2, 2, 2);
  double pooled[2] = {0, 0};
  for (size_t i = 0; i < conv.size(); i += 2) {
    pooled[0] += conv[i] + kb[0];
    pooled[1] += conv[i + 1] + kb[1];
  }
  pooled[0] /= 9.0;
  pooled[1] /= 9.0;
  double logits[3];
  for (int c = 0; c < 3; ++c)
    logits[c] = pooled[0] * w(0, c) + pooled[1] * w(1, c) + wb[c];
  double mx = std::max({logits[0], logits[1], logits[2]});
  double den = 0;
  for (double& l : logits) {
    l = std::exp(l - mx);
    den += l;
  }
  for (int c = 0; c < 3; ++c)
    CHECK(std::abs(got(0, c) - logits[c] / den) < 1e-6);
}

TEST_CASE("layer table prints every layer plus totals") {
  auto spec = build_model(Shape{32, 32, 3}, 0.25, HeadKind::ReducedHead, 5);
  std::ostringstream os;
  print_layer_table(spec, os);
  std::string table = os.str();
  CHECK(table.find("conv0") != std::string::npos);
  CHECK(table.find("ds13_pw") != std::string::npos);
  CHECK(table.find("head_fc2") != std::string::npos);
  CHECK(table.find("total") != std::string::npos);
}
