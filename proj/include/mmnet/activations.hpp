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
#ifndef MMNET_ACTIVATIONS_HPP_
#define MMNET_ACTIVATIONS_HPP_

#include <cmath>
#include <string>

#include "mmnet/errors.hpp"
#include "mmnet/tensor.hpp"

namespace mmnet {

/// One of {Sigmoid, Tanh, ReLU, Swish(beta)}. beta > 0, default 1; the
/// closed-form Swish derivative identity only holds at beta = 1.
struct ActivationKind {
  enum class Fn { Sigmoid, Tanh, ReLU, Swish };

  Fn fn = Fn::Swish;
  double beta = 1.0;

  static ActivationKind sigmoid() { return {Fn::Sigmoid, 0.0}; }
  static ActivationKind tanh() { return {Fn::Tanh, 0.0}; }
  static ActivationKind relu() { return {Fn::ReLU, 0.0}; }
  static ActivationKind swish(double beta = 1.0) {
    if (!(beta > 0.0)) {
      throw ConfigError("swish beta must be > 0, got " + std::to_string(beta));
    }
    return {Fn::Swish, beta};
  }

  std::string name() const {
    switch (fn) {
      case Fn::Sigmoid: return "sigmoid";
      case Fn::Tanh: return "tanh";
      case Fn::ReLU: return "relu";
      case Fn::Swish: return "swish";
    }
    return "?";
  }

  static ActivationKind parse(const std::string& s) {
    if (s == "sigmoid") return sigmoid();
    if (s == "tanh") return tanh();
    if (s == "relu") return relu();
    if (s == "swish") return swish();
    throw ConfigError("unknown activation '" + s + "'");
  }
};

/// sigma(x) = 1/(1+exp(-x)), evaluated so the exp argument is never
/// positive: no overflow, never NaN.
template <typename Scalar>
Scalar sigmoid_fn(Scalar x) {
  if (x >= Scalar(0)) {
    return Scalar(1) / (Scalar(1) + std::exp(-x));
  }
  Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar swish_fn(Scalar x, Scalar beta) {
  return x * sigmoid_fn(beta * x);
}

template <typename Scalar>
Scalar activation_fn(const ActivationKind& kind, Scalar x) {
  switch (kind.fn) {
    case ActivationKind::Fn::Sigmoid:
      return sigmoid_fn(x);
    case ActivationKind::Fn::Tanh:
      return std::tanh(x);
    case ActivationKind::Fn::ReLU:
      return x > Scalar(0) ? x : Scalar(0);
    case ActivationKind::Fn::Swish:
      return swish_fn(x, static_cast<Scalar>(kind.beta));
  }
  return x;
}

/// d/dx of the named function. ReLU at exactly 0 uses subgradient 0.
/// Swish: sigma(bx) + b x sigma(bx)(1 - sigma(bx)), equal at beta = 1 to
/// S(x) + sigma(x)(1 - S(x)).
template <typename Scalar>
Scalar activation_derivative_fn(const ActivationKind& kind, Scalar x) {
  switch (kind.fn) {
    case ActivationKind::Fn::Sigmoid: {
      Scalar s = sigmoid_fn(x);
      return s * (Scalar(1) - s);
    }
    case ActivationKind::Fn::Tanh: {
      Scalar t = std::tanh(x);
      return Scalar(1) - t * t;
    }
    case ActivationKind::Fn::ReLU:
      return x > Scalar(0) ? Scalar(1) : Scalar(0);
    case ActivationKind::Fn::Swish: {
      Scalar b = static_cast<Scalar>(kind.beta);
      Scalar s = sigmoid_fn(b * x);
      return s + b * x * s * (Scalar(1) - s);
    }
  }
  return Scalar(0);
}

template <typename Scalar>
Tensor<Scalar> activation_apply(const ActivationKind& kind,
                                const Tensor<Scalar>& x) {
  Tensor<Scalar> out(x.shape());
  for (Index i = 0; i < x.size(); ++i) out[i] = activation_fn(kind, x[i]);
  return out;
}

template <typename Scalar>
Tensor<Scalar> activation_derivative(const ActivationKind& kind,
                                     const Tensor<Scalar>& x) {
  Tensor<Scalar> out(x.shape());
  for (Index i = 0; i < x.size(); ++i)
    out[i] = activation_derivative_fn(kind, x[i]);
  return out;
}

}  // namespace mmnet

#endif  // MMNET_ACTIVATIONS_HPP_
