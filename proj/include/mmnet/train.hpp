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
#ifndef MMNET_TRAIN_HPP_
#define MMNET_TRAIN_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mmnet/forward.hpp"
#include "mmnet/model.hpp"
#include "mmnet/weights.hpp"

namespace mmnet {

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 50;
  int batch_size = 32;
  uint64_t seed = 42;
  /// Layer names whose parameters stay fixed; empty means the entire
  /// backbone (everything before spec.head_start).
  std::set<std::string> frozen_prefix;
  ActivationKind activation = ActivationKind::swish();

  void validate() const {
    // 0 is tolerated as the degenerate null update
    if (!(learning_rate >= 0.0 && learning_rate <= 1.0))
      throw ConfigError("learning_rate must lie in [0, 1]");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 2)
      throw ConfigError("batch_size must be >= 2 (batch-norm training)");
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double eval_loss = 0.0;
  double eval_accuracy = 0.0;
  double wall_ms = 0.0;  // excluded from the determinism contract
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  WeightStore<float> final_weights;
};

struct LabeledImages {
  Tensor<float> images;  // (n, h, w, c)
  std::vector<int> labels;
  std::vector<std::string> class_names;

  // images may be rank-4 pixels or rank-2 precomputed features
  Index count() const { return images.size() == 0 ? 0 : images.dim(0); }
};

struct TrainData {
  LabeledImages train;
  LabeledImages eval;  // may be empty
};

using GradMap = std::map<std::string, Tensor<double>>;

/// Mean of -ln p[label] over the batch; p clamped to >= 1e-12.
template <typename Scalar>
double cross_entropy(const Tensor<Scalar>& probs,
                     const std::vector<int>& labels) {
  if (probs.rank() != 2 ||
      probs.dim(0) != static_cast<Index>(labels.size()))
    throw ShapeError("cross_entropy expects (batch, classes) probabilities");
  const Index classes = probs.dim(1);
  double sum = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes)
      throw LookupError("label " + std::to_string(labels[i]) +
                        " out of range [0," + std::to_string(classes) + ")");
    double p = static_cast<double>(probs(static_cast<Index>(i), labels[i]));
    sum += -std::log(std::max(p, 1e-12));
  }
  return sum / static_cast<double>(labels.size());
}

namespace detail {

template <typename Scalar>
struct HeadPassOptions {
  bool want_grads = true;
  bool update_running_stats = false;
  Rng* rng = nullptr;  // dropout masks; nullptr leaves dropout inactive
};

template <typename Scalar>
struct HeadPassResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::map<std::string, Tensor<Scalar>> grads;
  Tensor<Scalar> probs;
};

/// Fused forward/backward over the post-embedding head layers.
///
/// The softmax at the end pairs with cross-entropy, so backpropagation
/// starts from (probs - onehot)/batch at the logits. Batch norm runs on
/// batch statistics (the training path) and its backward accounts for the
/// mean/variance dependence on the input.
template <typename Scalar>
HeadPassResult<Scalar> head_pass(const ArchitectureSpec& spec,
                                 WeightStore<Scalar>& store,
                                 const Tensor<Scalar>& features,
                                 const std::vector<int>& labels,
                                 const HeadPassOptions<Scalar>& opts) {
  const size_t begin = embedding_boundary(spec);
  const size_t end = spec.layers.size();
  if (end == begin || !std::holds_alternative<SoftmaxDesc>(
                          spec.layers[end - 1].desc))
    throw ConfigError("head must end in softmax");
  const Index batch = features.dim(0);
  if (batch != static_cast<Index>(labels.size()))
    throw ShapeError("feature/label count mismatch");

  struct LayerCache {
    Tensor<Scalar> input;
    // batch norm
    ArrayX<Scalar> mean, inv_std;
    Tensor<Scalar> x_hat;
    // dropout
    Tensor<Scalar> mask;
  };
  std::vector<LayerCache> caches(end - begin);

  Tensor<Scalar> cur = features;
  for (size_t i = begin; i < end - 1; ++i) {
    LayerCache& cache = caches[i - begin];
    cache.input = cur;
    const Layer& layer = spec.layers[i];
    if (const auto* dense = std::get_if<DenseDesc>(&layer.desc)) {
      DenseParams<Scalar> p;
      p.weights = store.at(layer.name + ".weight");
      p.bias = store.at(layer.name + ".bias");
      cur = dense_forward(cur, p);
      (void)dense;
    } else if (const auto* bn = std::get_if<BatchNormDesc>(&layer.desc)) {
      if (batch < 2)
        throw ConfigError("batchnorm training requires batch size >= 2");
      auto [mean, var] = mean_var_over_batch(cur, cur.rank() - 1);
      cache.mean = mean;
      cache.inv_std =
          (var + static_cast<Scalar>(bn->epsilon)).sqrt().inverse();
      const ArrayX<Scalar> gamma = store.at(layer.name + ".gamma").array();
      const ArrayX<Scalar> beta = store.at(layer.name + ".beta").array();
      const Index f = cur.dim(1);
      cache.x_hat = Tensor<Scalar>(cur.shape());
      Tensor<Scalar> out(cur.shape());
      for (Index k = 0; k < f; ++k) {
        for (Index b = 0; b < batch; ++b) {
          Scalar xh = (cur(b, k) - cache.mean[k]) * cache.inv_std[k];
          cache.x_hat(b, k) = xh;
          out(b, k) = gamma[k] * xh + beta[k];
        }
      }
      if (opts.update_running_stats) {
        Scalar mom = static_cast<Scalar>(bn->momentum);
        auto& rm = store.at(layer.name + ".running_mean").array();
        auto& rv = store.at(layer.name + ".running_var").array();
        rm = mom * rm + (Scalar(1) - mom) * mean;
        rv = mom * rv + (Scalar(1) - mom) * var;
      }
      cur = std::move(out);
    } else if (const auto* act = std::get_if<ActivationDesc>(&layer.desc)) {
      cur = activation_apply(act->kind, cur);
    } else if (const auto* drop = std::get_if<DropoutDesc>(&layer.desc)) {
      if (opts.rng != nullptr && drop->rate > 0.0) {
        const Scalar keep = static_cast<Scalar>(1.0 - drop->rate);
        cache.mask = Tensor<Scalar>(cur.shape());
        Tensor<Scalar> out(cur.shape());
        for (Index j = 0; j < cur.size(); ++j) {
          Scalar m = opts.rng->bernoulli(drop->rate) ? Scalar(0)
                                                     : Scalar(1) / keep;
          cache.mask[j] = m;
          out[j] = cur[j] * m;
        }
        cur = std::move(out);
      }
    } else if (std::holds_alternative<GlobalAvgPoolDesc>(layer.desc)) {
      throw ConfigError("pooling inside the trainable head is unsupported");
    } else {
      throw ConfigError("unexpected layer '" + layer.name + "' in head");
    }
  }

  HeadPassResult<Scalar> result;
  result.probs = softmax(cur);
  result.loss = cross_entropy(result.probs, labels);

  Index correct = 0;
  const Index classes = result.probs.dim(1);
  for (Index b = 0; b < batch; ++b) {
    Index arg = 0;
    for (Index c = 1; c < classes; ++c)
      if (result.probs(b, c) > result.probs(b, arg)) arg = c;
    if (arg == labels[static_cast<size_t>(b)]) ++correct;
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(batch);

  if (!opts.want_grads) return result;

  // d(loss)/d(logits) for softmax + cross-entropy.
  Tensor<Scalar> dy(result.probs.shape());
  dy.array() = result.probs.array() / static_cast<Scalar>(batch);
  for (Index b = 0; b < batch; ++b)
    dy(b, labels[static_cast<size_t>(b)]) -=
        Scalar(1) / static_cast<Scalar>(batch);

  for (size_t i = end - 1; i-- > begin;) {
    const Layer& layer = spec.layers[i];
    LayerCache& cache = caches[i - begin];
    if (const auto* dense = std::get_if<DenseDesc>(&layer.desc)) {
      const Tensor<Scalar>& w = store.at(layer.name + ".weight");
      const Index in = dense->in_dim, out = dense->out_dim;
      Tensor<Scalar> dw(Shape{in, out});
      dw.as_matrix(in, out).noalias() =
          cache.input.as_matrix(batch, in).transpose() *
          dy.as_matrix(batch, out);
      Tensor<Scalar> db(Shape{out});
      db.as_matrix(1, out) = dy.as_matrix(batch, out).colwise().sum();
      Tensor<Scalar> dx(Shape{batch, in});
      dx.as_matrix(batch, in).noalias() =
          dy.as_matrix(batch, out) * w.as_matrix(in, out).transpose();
      result.grads.emplace(layer.name + ".weight", std::move(dw));
      result.grads.emplace(layer.name + ".bias", std::move(db));
      dy = std::move(dx);
    } else if (std::get_if<BatchNormDesc>(&layer.desc) != nullptr) {
      const ArrayX<Scalar> gamma = store.at(layer.name + ".gamma").array();
      const Index f = cache.input.dim(1);
      const Scalar m = static_cast<Scalar>(batch);
      Tensor<Scalar> dgamma(Shape{f}), dbeta(Shape{f});
      Tensor<Scalar> dx(cache.input.shape());
      for (Index k = 0; k < f; ++k) {
        Scalar dg = 0, db = 0, dxhat_sum = 0, dxhat_xhat_sum = 0;
        for (Index b = 0; b < batch; ++b) {
          Scalar g = dy(b, k);
          dg += g * cache.x_hat(b, k);
          db += g;
          Scalar dxh = g * gamma[k];
          dxhat_sum += dxh;
          dxhat_xhat_sum += dxh * cache.x_hat(b, k);
        }
        dgamma[k] = dg;
        dbeta[k] = db;
        // dx = istd/m * (m*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
        for (Index b = 0; b < batch; ++b) {
          Scalar dxh = dy(b, k) * gamma[k];
          dx(b, k) = cache.inv_std[k] / m *
                     (m * dxh - dxhat_sum -
                      cache.x_hat(b, k) * dxhat_xhat_sum);
        }
      }
      result.grads.emplace(layer.name + ".gamma", std::move(dgamma));
      result.grads.emplace(layer.name + ".beta", std::move(dbeta));
      dy = std::move(dx);
    } else if (const auto* act = std::get_if<ActivationDesc>(&layer.desc)) {
      Tensor<Scalar> deriv = activation_derivative(act->kind, cache.input);
      dy.array() *= deriv.array();
    } else if (const auto* drop = std::get_if<DropoutDesc>(&layer.desc)) {
      if (cache.mask.size() != 0) dy.array() *= cache.mask.array();
      (void)drop;
    }
  }
  return result;
}

}  // namespace detail

/// Analytic gradients of cross_entropy(forward(...)) with respect to the
/// trainable head parameters. batch may be images (rank 4, embedded through
/// the frozen backbone first) or pre-pooled features (rank 2). Passing an
/// rng activates dropout; without one dropout layers are inactive, which is
/// the configuration finite-difference oracles need.
///
/// requested: parameter names to differentiate; empty means every trainable
/// head parameter. Naming a frozen (backbone) parameter is a contract error.
GradMap head_backward(const ArchitectureSpec& spec,
                      WeightStore<double>& store, const Tensor<double>& batch,
                      const std::vector<int>& labels,
                      const std::vector<std::string>& requested = {},
                      Rng* rng = nullptr);

/// w <- w - lr * g for every gradient key; keys must name existing entries
/// of matching shape.
template <typename Scalar, typename GScalar>
void sgd_step(WeightStore<Scalar>& store,
              const std::map<std::string, Tensor<GScalar>>& grads, double lr) {
  for (const auto& [name, g] : grads) {
    auto it = store.entries.find(name);
    if (it == store.entries.end())
      throw LookupError("sgd_step: gradient key '" + name +
                        "' has no weight entry");
    if (it->second.shape() != g.shape())
      throw ShapeError("sgd_step: gradient shape " + g.shape().str() +
                       " mismatches weight " + it->second.shape().str() +
                       " for '" + name + "'");
    it->second.array() -=
        static_cast<Scalar>(lr) * g.array().template cast<Scalar>();
  }
}

/// Head-only transfer learning: embeds the dataset through the frozen
/// backbone once, then runs seeded SGD over the head. Backbone parameters
/// are bit-identical before and after. Deterministic given (seed, config,
/// data order); wall-clock fields are the only exception.
TrainReport train_head(const ArchitectureSpec& spec,
                       const WeightStore<float>& store, const TrainData& data,
                       const TrainConfig& cfg);

struct SweepRow {
  double learning_rate = 0.0;
  double final_train_accuracy = 0.0;
  double final_eval_accuracy = 0.0;
};

/// One full train_head run per unique rate (duplicates dropped with a
/// warning), shared seed, sorted by descending rate.
std::vector<SweepRow> lr_sweep(const ArchitectureSpec& spec,
                               const WeightStore<float>& store,
                               const TrainData& data,
                               std::vector<double> grid,
                               const TrainConfig& base_cfg,
                               std::vector<std::string>* warnings = nullptr);

}  // namespace mmnet

#endif  // MMNET_TRAIN_HPP_
