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
#include "mmnet/layers.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace mmnet;

namespace {

Tensor<double> image_from(const std::vector<double>& v, Index h, Index w,
                          Index c) {
  Tensor<double> t(Shape{1, h, w, c});
  for (Index i = 0; i < t.size(); ++i) t[i] = v[static_cast<size_t>(i)];
  return t;
}

}  // namespace

TEST_CASE("depthwise 3x3 of ones sums the window") {
  Tensor<double> x(Shape{1, 3, 3, 1});
  x.array().setOnes();
  ConvParams<double> p;
  p.kernel = Tensor<double>(Shape{3, 3, 1});
  p.kernel.array().setOnes();
  p.mode = ConvMode::Depthwise;
  p.padding = PaddingMode::Valid;
  auto out = conv2d(x, p);
  CHECK(out.shape() == Shape{1, 1, 1, 1});
  CHECK(out[0] == doctest::Approx(9.0));
}

TEST_CASE("pointwise mixes channels as a dot product") {
  auto x = image_from({1, 2}, 1, 1, 2);
  ConvParams<double> p;
  p.kernel = Tensor<double>::from(Shape{1, 1, 2, 1}, {1, 1});
  p.mode = ConvMode::Pointwise;
  auto out = conv2d(x, p);
  CHECK(out.size() == 1);
  CHECK(out[0] == doctest::Approx(3.0));
}

TEST_CASE("standard 1x1 identity kernel passes input through") {
  Rng rng(13);
  auto x = tensor_filled<double>(Shape{2, 4, 4, 3}, rng, Dist::uniform(-1, 1));
  ConvParams<double> p;
  p.kernel = Tensor<double>(Shape{1, 1, 3, 3});
  for (Index c = 0; c < 3; ++c) p.kernel(0, 0, c, c) = 1.0;
  p.mode = ConvMode::Standard;
  auto out = conv2d(x, p);
  REQUIRE(out.shape() == x.shape());
  for (Index i = 0; i < x.size(); ++i)
    CHECK(out[i] == doctest::Approx(x[i]));
}

TEST_CASE("conv channel mismatch is a shape error") {
  Tensor<double> x(Shape{1, 3, 3, 2});
  ConvParams<double> p;
  p.kernel = Tensor<double>(Shape{3, 3, 3});  // 3 channels vs input 2
  p.mode = ConvMode::Depthwise;
  CHECK_THROWS_AS(conv2d(x, p), ShapeError);

  ConvParams<double> q;
  q.kernel = Tensor<double>(Shape{1, 1, 3, 4});
  q.mode = ConvMode::Pointwise;
  CHECK_THROWS_AS(conv2d(x, q), ShapeError);
}

TEST_CASE("same padding preserves extent at stride 1, halves at stride 2") {
  Rng rng(3);
  auto x = tensor_filled<double>(Shape{1, 8, 8, 2}, rng, Dist::uniform(0, 1));
  ConvParams<double> p;
  p.kernel = tensor_filled<double>(Shape{3, 3, 2}, rng, Dist::uniform(-1, 1));
  p.mode = ConvMode::Depthwise;
  p.padding = PaddingMode::Same;
  CHECK(conv2d(x, p).shape() == Shape{1, 8, 8, 2});
  p.stride = 2;
  CHECK(conv2d(x, p).shape() == Shape{1, 4, 4, 2});
}

TEST_CASE("depthwise then pointwise equals the composed standard conv") {
  // oracle: brute-force standard convolution with kernel
  // K[ky,kx,m,n] = D[ky,kx,m] * P[m,n]
  Rng rng(99);
  const int h = 5, w = 5, cin = 2, cout = 3, k = 3;
  for (int trial = 0; trial < 20; ++trial) {
    auto x = tensor_filled<double>(Shape{1, h, w, cin}, rng,
                                   Dist::uniform(-1, 1));
    auto dw = tensor_filled<double>(Shape{k, k, cin}, rng,
                                    Dist::uniform(-1, 1));
    auto pw = tensor_filled<double>(Shape{1, 1, cin, cout}, rng,
                                    Dist::uniform(-1, 1));

    ConvParams<double> pd;
    pd.kernel = dw;
    pd.mode = ConvMode::Depthwise;
    pd.padding = PaddingMode::Valid;
    ConvParams<double> pp;
    pp.kernel = pw;
    pp.mode = ConvMode::Pointwise;
    auto separable = conv2d(conv2d(x, pd), pp);

    std::vector<double> xv(x.data(), x.data() + x.size());
    std::vector<double> kv(static_cast<size_t>(k * k * cin * cout));
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx)
        for (int m = 0; m < cin; ++m)
          for (int n = 0; n < cout; ++n)
            kv[((static_cast<size_t>(ky) * k + kx) * cin + m) * cout + n] =
                dw(ky, kx, m) * pw(0, 0, m, n);
    auto expected = oracle::naive_conv2d_valid(xv, h, w, cin, kv, k, k, cout);

    REQUIRE(separable.size() == static_cast<Index>(expected.size()));
    for (Index i = 0; i < separable.size(); ++i)
      CHECK(std::abs(separable[i] - expected[static_cast<size_t>(i)]) < 1e-6);
  }
}

TEST_CASE("batchnorm training normalizes a hand batch") {
  auto x = Tensor<double>::from(Shape{3, 1}, {1, 2, 3});
  auto p = BatchNormParams<double>::identity(1);
  auto out = batchnorm_forward(x, p, true);
  CHECK(out(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(out(1, 0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(out(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
}

TEST_CASE("batchnorm constant batch maps to zero") {
  auto x = Tensor<double>::from(Shape{3, 1}, {4, 4, 4});
  auto p = BatchNormParams<double>::identity(1);
  auto out = batchnorm_forward(x, p, true);
  for (Index i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(0.0));
}

TEST_CASE("batchnorm gamma zero collapses to beta") {
  auto x = Tensor<double>::from(Shape{4, 2}, {1, 9, 2, 8, 3, 7, 4, 6});
  auto p = BatchNormParams<double>::identity(2);
  p.gamma.setZero();
  p.beta << 5.0, -1.0;
  auto out = batchnorm_forward(x, p, true);
  for (Index b = 0; b < 4; ++b) {
    CHECK(out(b, 0) == doctest::Approx(5.0));
    CHECK(out(b, 1) == doctest::Approx(-1.0));
  }
}

TEST_CASE("batchnorm rejects training on a single sample") {
  auto x = Tensor<double>::from(Shape{1, 2}, {1, 2});
  auto p = BatchNormParams<double>::identity(2);
  CHECK_THROWS_AS(batchnorm_forward(x, p, true), ConfigError);
  CHECK_NOTHROW(batchnorm_forward(x, p, false));
}

TEST_CASE("batchnorm training output is standardized before scale/shift") {
  Rng rng(21);
  auto x = tensor_filled<double>(Shape{64, 5}, rng, Dist::normal(3, 2));
  auto p = BatchNormParams<double>::identity(5);
  auto out = batchnorm_forward(x, p, true);
  auto [mean, var] = mean_var_over_batch(out, 1);
  for (Index k = 0; k < 5; ++k) {
    CHECK(std::abs(mean[k]) < 1e-5);
    CHECK(std::abs(var[k] - 1.0) < 1e-3);
  }
}

TEST_CASE("batchnorm running statistics move by momentum") {
  auto x = Tensor<double>::from(Shape{2, 1}, {0, 2});  // mean 1, var 1
  auto p = BatchNormParams<double>::identity(1);
  p.momentum = 0.5;
  batchnorm_forward(x, p, true);
  CHECK(p.running_mean[0] == doctest::Approx(0.5));
  CHECK(p.running_var[0] == doctest::Approx(1.0));  // 0.5*1 + 0.5*1
  // inference does not touch them
  batchnorm_forward(x, p, false);
  CHECK(p.running_mean[0] == doctest::Approx(0.5));
}

TEST_CASE("global average pool") {
  auto x = image_from({1, 2, 3, 4}, 2, 2, 1);
  auto out = global_avg_pool(x);
  CHECK(out.shape() == Shape{1, 1});
  CHECK(out[0] == doctest::Approx(2.5));

  Tensor<double> c(Shape{2, 3, 3, 2});
  c.array().setConstant(7.0);
  auto oc = global_avg_pool(c);
  for (Index i = 0; i < oc.size(); ++i) CHECK(oc[i] == doctest::Approx(7.0));

  auto one = image_from({42, 9, 3}, 1, 1, 3);
  auto oo = global_avg_pool(one);
  CHECK(oo(0, 0) == doctest::Approx(42));
  CHECK(oo(0, 2) == doctest::Approx(3));
}

TEST_CASE("dense forward") {
  DenseParams<double> id;
  id.weights = Tensor<double>::from(Shape{2, 2}, {1, 0, 0, 1});
  id.bias = Tensor<double>(Shape{2});
  auto x = Tensor<double>::from(Shape{1, 2}, {3, 4});
  auto out = dense_forward(x, id);
  CHECK(out(0, 0) == doctest::Approx(3));
  CHECK(out(0, 1) == doctest::Approx(4));

  DenseParams<double> bias_only;
  bias_only.weights = Tensor<double>(Shape{2, 2});
  bias_only.bias = Tensor<double>::from(Shape{2}, {1, 2});
  auto ob = dense_forward(x, bias_only);
  CHECK(ob(0, 0) == doctest::Approx(1));
  CHECK(ob(0, 1) == doctest::Approx(2));

  DenseParams<double> m;
  m.weights = Tensor<double>::from(Shape{2, 2}, {1, 2, 3, 4});
  m.bias = Tensor<double>(Shape{2});
  auto om = dense_forward(Tensor<double>::from(Shape{1, 2}, {1, 1}), m);
  CHECK(om(0, 0) == doctest::Approx(4));
  CHECK(om(0, 1) == doctest::Approx(6));

  DenseParams<double> bad;
  bad.weights = Tensor<double>(Shape{3, 2});
  bad.bias = Tensor<double>(Shape{2});
  CHECK_THROWS_AS(dense_forward(x, bad), ShapeError);
}

TEST_CASE("softmax") {
  auto sym = softmax(Tensor<double>::from(Shape{1, 2}, {0, 0}));
  CHECK(sym(0, 0) == doctest::Approx(0.5));

  auto big = softmax(Tensor<double>::from(Shape{1, 2}, {1000, 0}));
  CHECK(big.all_finite());
  CHECK(big(0, 0) == doctest::Approx(1.0));
  CHECK(big(0, 1) == doctest::Approx(0.0));

  auto logs = softmax(Tensor<double>::from(
      Shape{1, 3}, {std::log(1.0), std::log(2.0), std::log(3.0)}));
  CHECK(logs(0, 0) == doctest::Approx(1.0 / 6.0));
  CHECK(logs(0, 1) == doctest::Approx(2.0 / 6.0));
  CHECK(logs(0, 2) == doctest::Approx(0.5));

  Rng rng(31);
  auto x = tensor_filled<double>(Shape{5, 9}, rng, Dist::uniform(-30, 30));
  auto out = softmax(x);
  for (Index b = 0; b < 5; ++b) {
    double sum = 0;
    for (Index c = 0; c < 9; ++c) sum += out(b, c);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}
