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
#ifndef MMNET_TENSOR_HPP_
#define MMNET_TENSOR_HPP_

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <utility>

#include "mmnet/errors.hpp"

namespace mmnet {

using Index = Eigen::Index;

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixRM =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense extents, rank 1..4. Activations use batch/height/width/channel
/// order; parameters use whatever rank their layer defines.
class Shape {
 public:
  Shape() = default;

  Shape(std::initializer_list<Index> dims) {
    if (dims.size() < 1 || dims.size() > kMaxRank) {
      throw ShapeError("shape rank must be 1..4, got " +
                       std::to_string(dims.size()));
    }
    rank_ = static_cast<int>(dims.size());
    int i = 0;
    for (Index d : dims) {
      if (d < 1) {
        throw ShapeError("shape extents must be >= 1, got " +
                         std::to_string(d));
      }
      dims_[i++] = d;
    }
  }

  int rank() const { return rank_; }
  Index dim(int i) const { return dims_[static_cast<size_t>(i)]; }
  Index operator[](int i) const { return dim(i); }

  Index elements() const {
    Index n = 1;
    for (int i = 0; i < rank_; ++i) n *= dims_[static_cast<size_t>(i)];
    return n;
  }

  bool operator==(const Shape& o) const {
    if (rank_ != o.rank_) return false;
    for (int i = 0; i < rank_; ++i)
      if (dims_[static_cast<size_t>(i)] != o.dims_[static_cast<size_t>(i)])
        return false;
    return true;
  }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const {
    std::string s = "(";
    for (int i = 0; i < rank_; ++i) {
      if (i) s += ",";
      s += std::to_string(dims_[static_cast<size_t>(i)]);
    }
    return s + ")";
  }

  static constexpr size_t kMaxRank = 4;

 private:
  std::array<Index, kMaxRank> dims_{1, 1, 1, 1};
  int rank_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const Shape& s) {
  return os << s.str();
}

/// Counter-based pseudorandom generator.
///
/// Stream value i is splitmix64_mix(seed + i * golden_gamma): pure integer
/// arithmetic, so identical seed and call sequence give bit-identical
/// streams on every platform. Uniform deviates scale the top 53 bits;
/// normal deviates use a 12-term uniform convolution (mean mu, variance
/// sigma^2, support truncated at +-6 sigma), which keeps every operation
/// correctly rounded IEEE arithmetic and therefore platform-independent.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed) {}

  uint64_t next_u64() { return mix(seed_ + (++counter_) * kGamma); }

  /// Uniform double in [a, b).
  double uniform(double a, double b) {
    double u = static_cast<double>(next_u64() >> 11) * kInv53;
    return a + (b - a) * u;
  }

  double normal(double mu, double sigma) {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform(0.0, 1.0);
    return mu + sigma * (s - 6.0);
  }

  bool bernoulli(double p) { return uniform(0.0, 1.0) < p; }

  /// Independent child stream. Used to give each sample of a batch its own
  /// stream so parallel and serial processing draw identical parameters.
  Rng split(uint64_t stream) const {
    return Rng(seed_ ^ mix(stream + kGamma));
  }

  uint64_t seed() const { return seed_; }

 private:
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr double kInv53 = 0x1.0p-53;

  uint64_t seed_ = 0;
  uint64_t counter_ = 0;
};

/// Dense N-d array in flat row-major storage. Immutable by convention once
/// returned from an operation; safe to share across threads for reading.
///
/// float is the storage precision; double instantiations exist for
/// gradient checking.
template <typename Scalar>
class Tensor {
 public:
  using Storage = ArrayX<Scalar>;

  Tensor() = default;

  explicit Tensor(const Shape& shape)
      : shape_(shape), data_(Storage::Zero(shape.elements())) {}

  Tensor(const Shape& shape, Storage data)
      : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.elements()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.str());
    }
  }

  static Tensor from(const Shape& shape, std::initializer_list<Scalar> vals) {
    Storage d(static_cast<Index>(vals.size()));
    Index i = 0;
    for (Scalar v : vals) d[i++] = v;
    return Tensor(shape, std::move(d));
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return shape_.rank(); }
  Index dim(int i) const { return shape_.dim(i); }
  Index size() const { return data_.size(); }

  Storage& array() { return data_; }
  const Storage& array() const { return data_; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  Scalar& operator()(Index i, Index j) { return data_[i * shape_.dim(1) + j]; }
  Scalar operator()(Index i, Index j) const {
    return data_[i * shape_.dim(1) + j];
  }
  Scalar& operator()(Index i, Index j, Index k) {
    return data_[(i * shape_.dim(1) + j) * shape_.dim(2) + k];
  }
  Scalar operator()(Index i, Index j, Index k) const {
    return data_[(i * shape_.dim(1) + j) * shape_.dim(2) + k];
  }
  Scalar& operator()(Index i, Index j, Index k, Index l) {
    return data_[((i * shape_.dim(1) + j) * shape_.dim(2) + k) *
                     shape_.dim(3) +
                 l];
  }
  Scalar operator()(Index i, Index j, Index k, Index l) const {
    return data_[((i * shape_.dim(1) + j) * shape_.dim(2) + k) *
                     shape_.dim(3) +
                 l];
  }

  /// Row-major matrix view; rows*cols must equal size().
  Eigen::Map<MatrixRM<Scalar>> as_matrix(Index rows, Index cols) {
    if (rows * cols != size()) {
      throw ShapeError("matrix view " + std::to_string(rows) + "x" +
                       std::to_string(cols) + " does not cover tensor " +
                       shape_.str());
    }
    return Eigen::Map<MatrixRM<Scalar>>(data_.data(), rows, cols);
  }
  Eigen::Map<const MatrixRM<Scalar>> as_matrix(Index rows, Index cols) const {
    if (rows * cols != size()) {
      throw ShapeError("matrix view " + std::to_string(rows) + "x" +
                       std::to_string(cols) + " does not cover tensor " +
                       shape_.str());
    }
    return Eigen::Map<const MatrixRM<Scalar>>(data_.data(), rows, cols);
  }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape_, data_.template cast<Other>());
  }

  bool all_finite() const { return data_.isFinite().all(); }

 private:
  Shape shape_;
  Storage data_;
};

using Tensorf = Tensor<float>;
using Tensord = Tensor<double>;

/// Fill distribution: uniform(a,b) | normal(mu,sigma) | constant(c).
struct Dist {
  enum class Kind { Uniform, Normal, Constant };
  Kind kind = Kind::Constant;
  double a = 0.0;
  double b = 0.0;

  static Dist uniform(double lo, double hi) {
    return {Kind::Uniform, lo, hi};
  }
  static Dist normal(double mu, double sigma) {
    return {Kind::Normal, mu, sigma};
  }
  static Dist constant(double c) { return {Kind::Constant, c, 0.0}; }
};

/// Deterministic fill given (seed, shape, dist).
template <typename Scalar>
Tensor<Scalar> tensor_filled(const Shape& shape, Rng& rng, const Dist& dist) {
  Tensor<Scalar> t(shape);
  auto& d = t.array();
  switch (dist.kind) {
    case Dist::Kind::Constant:
      d.setConstant(static_cast<Scalar>(dist.a));
      break;
    case Dist::Kind::Uniform:
      for (Index i = 0; i < d.size(); ++i)
        d[i] = static_cast<Scalar>(rng.uniform(dist.a, dist.b));
      break;
    case Dist::Kind::Normal:
      for (Index i = 0; i < d.size(); ++i)
        d[i] = static_cast<Scalar>(rng.normal(dist.a, dist.b));
      break;
  }
  return t;
}

/// Same shape; out[i] = f(t[i]). Throws NumericError naming the first index
/// where f produced a non-finite value.
template <typename Scalar, typename F>
Tensor<Scalar> elementwise_apply(const Tensor<Scalar>& t, F f) {
  Tensor<Scalar> out(t.shape());
  for (Index i = 0; i < t.size(); ++i) {
    Scalar v = static_cast<Scalar>(f(t[i]));
    if (!std::isfinite(v)) {
      throw NumericError("elementwise_apply produced non-finite value at index " +
                         std::to_string(i));
    }
    out[i] = v;
  }
  return out;
}

/// Per-feature mean and population variance (divisor m) of everything that
/// is not the feature axis.
template <typename Scalar>
std::pair<ArrayX<Scalar>, ArrayX<Scalar>> mean_var_over_batch(
    const Tensor<Scalar>& t, int feature_axis) {
  if (feature_axis < 0 || feature_axis >= t.rank()) {
    throw ShapeError("feature axis " + std::to_string(feature_axis) +
                     " out of range for rank " + std::to_string(t.rank()));
  }
  if (feature_axis != t.rank() - 1) {
    throw ShapeError("mean_var_over_batch expects the trailing feature axis");
  }
  const Index features = t.dim(feature_axis);
  const Index m = t.size() / features;
  ArrayX<Scalar> mean = ArrayX<Scalar>::Zero(features);
  ArrayX<Scalar> var = ArrayX<Scalar>::Zero(features);
  auto mat = t.as_matrix(m, features);
  mean = mat.colwise().mean().transpose().array();
  for (Index k = 0; k < features; ++k) {
    var[k] = (mat.col(k).array() - mean[k]).square().sum() /
             static_cast<Scalar>(m);
  }
  return {std::move(mean), std::move(var)};
}

}  // namespace mmnet

#endif  // MMNET_TENSOR_HPP_
