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
#ifndef MMNET_LAYERS_HPP_
#define MMNET_LAYERS_HPP_

#include <algorithm>
#include <string>
#include <utility>

#include "mmnet/activations.hpp"
#include "mmnet/errors.hpp"
#include "mmnet/tensor.hpp"

namespace mmnet {

enum class PaddingMode { Same, Valid };
enum class ConvMode { Standard, Depthwise, Pointwise };

/// Kernel layouts: standard (kh,kw,in,out); depthwise (kh,kw,channels);
/// pointwise (1,1,in,out). All convolutions are cross-correlations.
template <typename Scalar>
struct ConvParams {
  Tensor<Scalar> kernel;
  Tensor<Scalar> bias;  // rank-1 (out) or empty
  int stride = 1;
  PaddingMode padding = PaddingMode::Same;
  ConvMode mode = ConvMode::Standard;
};

template <typename Scalar>
struct BatchNormParams {
  ArrayX<Scalar> gamma;
  ArrayX<Scalar> beta;
  ArrayX<Scalar> running_mean;
  ArrayX<Scalar> running_var;
  double epsilon = 1e-5;
  double momentum = 0.99;

  static BatchNormParams identity(Index features, double epsilon = 1e-5,
                                  double momentum = 0.99) {
    BatchNormParams p;
    p.gamma = ArrayX<Scalar>::Ones(features);
    p.beta = ArrayX<Scalar>::Zero(features);
    p.running_mean = ArrayX<Scalar>::Zero(features);
    p.running_var = ArrayX<Scalar>::Ones(features);
    p.epsilon = epsilon;
    p.momentum = momentum;
    return p;
  }

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("batchnorm epsilon must be > 0");
    if (!(momentum > 0.0 && momentum < 1.0))
      throw ConfigError("batchnorm momentum must lie in (0,1)");
    if ((running_var < Scalar(0)).any())
      throw ConfigError("batchnorm running_var must be >= 0 elementwise");
  }
};

template <typename Scalar>
struct DenseParams {
  Tensor<Scalar> weights;  // (in_dim, out_dim)
  Tensor<Scalar> bias;     // (out_dim)
};

namespace detail {

struct ConvGeometry {
  Index out_h, out_w;
  Index pad_top, pad_left;
};

/// `same` keeps out = ceil(in/stride) with the extra pad cell on the
/// bottom/right; `valid` drops partial windows.
inline ConvGeometry conv_geometry(Index in_h, Index in_w, Index k, int stride,
                                  PaddingMode padding) {
  ConvGeometry g{};
  if (padding == PaddingMode::Same) {
    g.out_h = (in_h + stride - 1) / stride;
    g.out_w = (in_w + stride - 1) / stride;
    Index pad_h = std::max<Index>((g.out_h - 1) * stride + k - in_h, 0);
    Index pad_w = std::max<Index>((g.out_w - 1) * stride + k - in_w, 0);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
  } else {
    if (in_h < k || in_w < k) {
      throw ShapeError("valid convolution: kernel larger than input");
    }
    g.out_h = (in_h - k) / stride + 1;
    g.out_w = (in_w - k) / stride + 1;
    g.pad_top = 0;
    g.pad_left = 0;
  }
  return g;
}

}  // namespace detail

/// 2-D convolution over a (batch, h, w, channels) activation.
///
/// standard mixes all input channels per output filter; depthwise applies
/// one k x k filter per channel; pointwise is the 1x1 channel-mixing
/// convolution. Padding cells contribute zero.
template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& x, const ConvParams<Scalar>& p) {
  if (x.rank() != 4) throw ShapeError("conv2d expects a rank-4 activation");
  if (p.stride != 1 && p.stride != 2)
    throw ConfigError("conv2d stride must be 1 or 2");

  const Index batch = x.dim(0), in_h = x.dim(1), in_w = x.dim(2),
              in_c = x.dim(3);
  const Tensor<Scalar>& k = p.kernel;

  Index kh, kw, out_c;
  switch (p.mode) {
    case ConvMode::Standard:
      if (k.rank() != 4 || k.dim(2) != in_c)
        throw ShapeError("standard conv kernel must be (kh,kw," +
                         std::to_string(in_c) + ",out)");
      kh = k.dim(0), kw = k.dim(1), out_c = k.dim(3);
      break;
    case ConvMode::Depthwise:
      if (k.rank() != 3 || k.dim(2) != in_c)
        throw ShapeError("depthwise kernel channel count must equal input "
                         "channels " + std::to_string(in_c));
      kh = k.dim(0), kw = k.dim(1), out_c = in_c;
      break;
    case ConvMode::Pointwise:
      if (k.rank() != 4 || k.dim(0) != 1 || k.dim(1) != 1 || k.dim(2) != in_c)
        throw ShapeError("pointwise kernel must be (1,1," +
                         std::to_string(in_c) + ",out)");
      kh = kw = 1, out_c = k.dim(3);
      break;
    default:
      throw ConfigError("unknown convolution mode");
  }
  if (kh != kw) throw ShapeError("conv2d expects square kernels");
  if (p.bias.size() != 0 && p.bias.size() != out_c)
    throw ShapeError("conv bias length must equal output channels");

  const auto g = detail::conv_geometry(in_h, in_w, kh, p.stride, p.padding);
  Tensor<Scalar> out(Shape{batch, g.out_h, g.out_w, out_c});

  if (p.mode == ConvMode::Pointwise && p.stride == 1) {
    // 1x1 stride-1: one GEMM over (batch*h*w, in_c) x (in_c, out_c).
    auto in_mat = x.as_matrix(batch * in_h * in_w, in_c);
    auto k_mat = k.as_matrix(in_c, out_c);
    out.as_matrix(batch * in_h * in_w, out_c).noalias() = in_mat * k_mat;
  } else if (p.mode == ConvMode::Depthwise) {
    for (Index b = 0; b < batch; ++b) {
      for (Index oy = 0; oy < g.out_h; ++oy) {
        for (Index ox = 0; ox < g.out_w; ++ox) {
          for (Index c = 0; c < in_c; ++c) {
            Scalar acc = 0;
            for (Index ky = 0; ky < kh; ++ky) {
              Index iy = oy * p.stride + ky - g.pad_top;
              if (iy < 0 || iy >= in_h) continue;
              for (Index kx = 0; kx < kw; ++kx) {
                Index ix = ox * p.stride + kx - g.pad_left;
                if (ix < 0 || ix >= in_w) continue;
                acc += x(b, iy, ix, c) * k(ky, kx, c);
              }
            }
            out(b, oy, ox, c) = acc;
          }
        }
      }
    }
  } else {
    for (Index b = 0; b < batch; ++b) {
      for (Index oy = 0; oy < g.out_h; ++oy) {
        for (Index ox = 0; ox < g.out_w; ++ox) {
          for (Index oc = 0; oc < out_c; ++oc) {
            Scalar acc = 0;
            for (Index ky = 0; ky < kh; ++ky) {
              Index iy = oy * p.stride + ky - g.pad_top;
              if (iy < 0 || iy >= in_h) continue;
              for (Index kx = 0; kx < kw; ++kx) {
                Index ix = ox * p.stride + kx - g.pad_left;
                if (ix < 0 || ix >= in_w) continue;
                for (Index c = 0; c < in_c; ++c) {
                  acc += x(b, iy, ix, c) * k(ky, kx, c, oc);
                }
              }
            }
            out(b, oy, ox, oc) = acc;
          }
        }
      }
    }
  }

  if (p.bias.size() != 0) {
    const Index pixels = batch * g.out_h * g.out_w;
    auto m = out.as_matrix(pixels, out_c);
    m.rowwise() += p.bias.as_matrix(1, out_c).row(0);
  }
  return out;
}

/// Per-feature standardization over the trailing axis.
///
/// Training: batch mean/variance (population divisor), then gamma/beta;
/// running statistics move by exponential average with the configured
/// momentum. Inference: running statistics only, params untouched.
template <typename Scalar>
Tensor<Scalar> batchnorm_forward(const Tensor<Scalar>& x,
                                 BatchNormParams<Scalar>& p, bool training) {
  p.validate();
  const Index features = x.dim(x.rank() - 1);
  if (p.gamma.size() != features)
    throw ShapeError("batchnorm param length " + std::to_string(p.gamma.size()) +
                     " does not match feature count " +
                     std::to_string(features));
  const Index m = x.size() / features;

  ArrayX<Scalar> mean, var;
  if (training) {
    if (m < 2)
      throw ConfigError("batchnorm training requires batch size >= 2");
    std::tie(mean, var) = mean_var_over_batch(x, x.rank() - 1);
    Scalar mom = static_cast<Scalar>(p.momentum);
    p.running_mean = mom * p.running_mean + (Scalar(1) - mom) * mean;
    p.running_var = mom * p.running_var + (Scalar(1) - mom) * var;
  } else {
    mean = p.running_mean;
    var = p.running_var;
  }

  ArrayX<Scalar> inv_std =
      (var + static_cast<Scalar>(p.epsilon)).sqrt().inverse();
  Tensor<Scalar> out(x.shape());
  auto xin = x.as_matrix(m, features);
  auto y = out.as_matrix(m, features);
  for (Index k = 0; k < features; ++k) {
    y.col(k) = ((xin.col(k).array() - mean[k]) * inv_std[k] * p.gamma[k] +
                p.beta[k])
                   .matrix();
  }
  return out;
}

/// Per-channel spatial mean: (batch, h, w, c) -> (batch, c).
template <typename Scalar>
Tensor<Scalar> global_avg_pool(const Tensor<Scalar>& x) {
  if (x.rank() != 4)
    throw ShapeError("global_avg_pool expects a rank-4 activation");
  const Index batch = x.dim(0), spatial = x.dim(1) * x.dim(2),
              ch = x.dim(3);
  Tensor<Scalar> out(Shape{batch, ch});
  for (Index b = 0; b < batch; ++b) {
    auto plane = Eigen::Map<const MatrixRM<Scalar>>(
        x.data() + b * spatial * ch, spatial, ch);
    out.as_matrix(batch, ch).row(b) = plane.colwise().mean();
  }
  return out;
}

/// out = x W + bias for a (batch, in_dim) activation.
template <typename Scalar>
Tensor<Scalar> dense_forward(const Tensor<Scalar>& x,
                             const DenseParams<Scalar>& p) {
  if (x.rank() != 2) throw ShapeError("dense_forward expects a rank-2 input");
  const Index batch = x.dim(0), in_dim = x.dim(1);
  if (p.weights.rank() != 2 || p.weights.dim(0) != in_dim)
    throw ShapeError("dense weights must be (" + std::to_string(in_dim) +
                     ",out)");
  const Index out_dim = p.weights.dim(1);
  if (p.bias.size() != out_dim)
    throw ShapeError("dense bias length must equal weight out_dim");

  Tensor<Scalar> out(Shape{batch, out_dim});
  out.as_matrix(batch, out_dim).noalias() =
      x.as_matrix(batch, in_dim) * p.weights.as_matrix(in_dim, out_dim);
  out.as_matrix(batch, out_dim).rowwise() +=
      p.bias.as_matrix(1, out_dim).row(0);
  return out;
}

/// Row-wise exp-normalization with max subtraction; rows sum to 1.
template <typename Scalar>
Tensor<Scalar> softmax(const Tensor<Scalar>& x) {
  if (x.rank() != 2) throw ShapeError("softmax expects (batch, classes)");
  const Index batch = x.dim(0), classes = x.dim(1);
  Tensor<Scalar> out(x.shape());
  auto xin = x.as_matrix(batch, classes);
  auto y = out.as_matrix(batch, classes);
  for (Index b = 0; b < batch; ++b) {
    Scalar mx = xin.row(b).maxCoeff();
    y.row(b) = (xin.row(b).array() - mx).exp().matrix();
    y.row(b) /= y.row(b).sum();
  }
  return out;
}

}  // namespace mmnet

#endif  // MMNET_LAYERS_HPP_
