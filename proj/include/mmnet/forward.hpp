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
#ifndef MMNET_FORWARD_HPP_
#define MMNET_FORWARD_HPP_

#include <algorithm>
#include <string>

#include "mmnet/model.hpp"
#include "mmnet/weights.hpp"

namespace mmnet {

enum class RunMode { Train, Infer };

/// Peak transient activation footprint seen while running a layer chain.
struct ForwardStats {
  size_t peak_transient_bytes = 0;

  void observe(size_t in_bytes, size_t out_bytes) {
    peak_transient_bytes = std::max(peak_transient_bytes, in_bytes + out_bytes);
  }
};

namespace detail {

enum class BnStats { Batch, Running, Calibrate };

template <typename Scalar>
BatchNormParams<Scalar> fetch_bn(const WeightStore<Scalar>& store,
                                 const std::string& name,
                                 const BatchNormDesc& desc) {
  BatchNormParams<Scalar> p;
  p.gamma = store.at(name + ".gamma").array();
  p.beta = store.at(name + ".beta").array();
  p.running_mean = store.at(name + ".running_mean").array();
  p.running_var = store.at(name + ".running_var").array();
  p.epsilon = desc.epsilon;
  p.momentum = desc.momentum;
  return p;
}

template <typename Scalar>
void store_bn_stats(WeightStore<Scalar>& store, const std::string& name,
                    const BatchNormParams<Scalar>& p) {
  store.at(name + ".running_mean").array() = p.running_mean;
  store.at(name + ".running_var").array() = p.running_var;
}

/// BnStats::Calibrate replaces the running statistics with the batch
/// statistics outright and normalizes with them; used once after seeded
/// initialization so deep stacks keep unit-scale activations.
template <typename Scalar>
Tensor<Scalar> run_batchnorm(const Tensor<Scalar>& x, const BatchNormDesc& desc,
                             const std::string& name,
                             WeightStore<Scalar>& store, BnStats stats) {
  BatchNormParams<Scalar> p = fetch_bn(store, name, desc);
  if (stats == BnStats::Calibrate) {
    auto [mean, var] = mean_var_over_batch(x, x.rank() - 1);
    p.running_mean = mean;
    p.running_var = var;
    store_bn_stats(store, name, p);
    return batchnorm_forward(x, p, /*training=*/false);
  }
  if (stats == BnStats::Batch) {
    Tensor<Scalar> out = batchnorm_forward(x, p, /*training=*/true);
    store_bn_stats(store, name, p);
    return out;
  }
  return batchnorm_forward(x, p, /*training=*/false);
}

template <typename Scalar>
Tensor<Scalar> run_dropout(const Tensor<Scalar>& x, const DropoutDesc& desc,
                           RunMode mode, Rng* rng) {
  if (mode == RunMode::Infer || desc.rate <= 0.0) return x;
  if (rng == nullptr)
    throw ConfigError("train-mode forward through dropout needs an rng");
  Tensor<Scalar> out(x.shape());
  const Scalar keep = static_cast<Scalar>(1.0 - desc.rate);
  for (Index i = 0; i < x.size(); ++i)
    out[i] = rng->bernoulli(desc.rate) ? Scalar(0) : x[i] / keep;
  return out;
}

template <typename Scalar>
Tensor<Scalar> run_layer(const Tensor<Scalar>& x, const Layer& layer,
                         WeightStore<Scalar>& store, RunMode mode,
                         BnStats bn_stats, Rng* rng) {
  const LayerDesc& d = layer.desc;
  if (const auto* conv = std::get_if<ConvDesc>(&d)) {
    ConvParams<Scalar> p;
    p.kernel = store.at(layer.name + ".weight");
    if (conv->bias) p.bias = store.at(layer.name + ".bias");
    p.stride = conv->stride;
    p.padding = conv->padding;
    p.mode = conv->mode;
    return conv2d(x, p);
  }
  if (const auto* bn = std::get_if<BatchNormDesc>(&d))
    return run_batchnorm(x, *bn, layer.name, store, bn_stats);
  if (const auto* act = std::get_if<ActivationDesc>(&d))
    return activation_apply(act->kind, x);
  if (std::holds_alternative<GlobalAvgPoolDesc>(d)) return global_avg_pool(x);
  if (const auto* dense = std::get_if<DenseDesc>(&d)) {
    DenseParams<Scalar> p;
    p.weights = store.at(layer.name + ".weight");
    p.bias = store.at(layer.name + ".bias");
    return dense_forward(x, p);
  }
  if (const auto* drop = std::get_if<DropoutDesc>(&d))
    return run_dropout(x, *drop, mode, rng);
  return softmax(x);
}

template <typename Scalar>
Tensor<Scalar> run_range(const ArchitectureSpec& spec,
                         WeightStore<Scalar>& store, const Tensor<Scalar>& x,
                         size_t begin, size_t end, RunMode mode,
                         BnStats bn_stats, Rng* rng, ForwardStats* stats) {
  Tensor<Scalar> cur = x;
  for (size_t i = begin; i < end; ++i) {
    Tensor<Scalar> next =
        run_layer(cur, spec.layers[i], store, mode, bn_stats, rng);
    if (stats)
      stats->observe(cur.size() * sizeof(Scalar), next.size() * sizeof(Scalar));
    cur = std::move(next);
  }
  return cur;
}

}  // namespace detail

struct ForwardOptions {
  Rng* rng = nullptr;           // required for train-mode dropout
  ForwardStats* stats = nullptr;
};

/// Runs the whole chain on a (batch, h, w, c) input and returns class
/// probabilities. Train mode normalizes with batch statistics and updates
/// running averages (single writer owns the store); infer mode is pure and
/// deterministic.
template <typename Scalar>
Tensor<Scalar> forward(const ArchitectureSpec& spec, WeightStore<Scalar>& store,
                       const Tensor<Scalar>& x, RunMode mode,
                       ForwardOptions opts = {}) {
  if (x.rank() != 4) throw ShapeError("forward expects a rank-4 batch");
  if (x.dim(1) != spec.input_shape[0] || x.dim(2) != spec.input_shape[1] ||
      x.dim(3) != spec.input_shape[2]) {
    throw ShapeError("input " + x.shape().str() + " does not match model " +
                     spec.input_shape.str());
  }
  auto bn = mode == RunMode::Train ? detail::BnStats::Batch
                                   : detail::BnStats::Running;
  return detail::run_range(spec, store, x, 0, spec.layers.size(), mode, bn,
                           opts.rng, opts.stats);
}

/// One pass over a representative batch that overwrites every batch-norm
/// running statistic with the observed batch statistics. Deterministic;
/// meant to run once right after init_weights, before any training.
template <typename Scalar>
void calibrate_running_stats(const ArchitectureSpec& spec,
                             WeightStore<Scalar>& store,
                             const Tensor<Scalar>& batch) {
  if (batch.dim(0) < 2)
    throw ConfigError("calibration needs a batch of at least 2 samples");
  detail::run_range(spec, store, batch, 0, spec.layers.size(), RunMode::Infer,
                    detail::BnStats::Calibrate, nullptr, nullptr);
}

/// Index of the first head layer that has parameters or is stochastic;
/// leading parameter-free deterministic layers (the global pool) belong to
/// the embedding side, which keeps cached embeddings two-dimensional.
inline size_t embedding_boundary(const ArchitectureSpec& spec) {
  size_t b = spec.head_start;
  while (b < spec.layers.size() &&
         std::holds_alternative<GlobalAvgPoolDesc>(spec.layers[b].desc))
    ++b;
  return b;
}

/// Frozen-backbone feature extraction: runs [0, embedding_boundary) in
/// infer mode. Returns (batch, features).
template <typename Scalar>
Tensor<Scalar> embed(const ArchitectureSpec& spec, WeightStore<Scalar>& store,
                     const Tensor<Scalar>& x, ForwardStats* stats = nullptr) {
  return detail::run_range(spec, store, x, 0, embedding_boundary(spec),
                           RunMode::Infer, detail::BnStats::Running, nullptr,
                           stats);
}

}  // namespace mmnet

#endif  // MMNET_FORWARD_HPP_
