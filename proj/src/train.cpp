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
#include "mmnet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <numeric>

namespace mmnet {

namespace {

/// Rows [begin, end) of a (n, ...) tensor as their own batch.
template <typename Scalar>
Tensor<Scalar> slice_rows(const Tensor<Scalar>& t, Index begin, Index end) {
  const Index row = t.size() / t.dim(0);
  Shape s = t.rank() == 4 ? Shape{end - begin, t.dim(1), t.dim(2), t.dim(3)}
                          : Shape{end - begin, t.dim(1)};
  Tensor<Scalar> out(s);
  std::memcpy(out.data(), t.data() + begin * row,
              static_cast<size_t>((end - begin) * row) * sizeof(Scalar));
  return out;
}

template <typename Scalar>
Tensor<Scalar> gather_rows(const Tensor<Scalar>& t,
                           const std::vector<Index>& rows) {
  const Index row = t.size() / t.dim(0);
  Tensor<Scalar> out(Shape{static_cast<Index>(rows.size()), t.dim(1)});
  for (size_t i = 0; i < rows.size(); ++i)
    std::memcpy(out.data() + static_cast<Index>(i) * row,
                t.data() + rows[i] * row,
                static_cast<size_t>(row) * sizeof(Scalar));
  return out;
}

/// Frozen-backbone embeddings for a whole image set, in fixed-size chunks.
Tensor<float> embed_all(const ArchitectureSpec& spec, WeightStore<float>& store,
                        const Tensor<float>& images) {
  const Index n = images.dim(0);
  const Index chunk = 64;
  Tensor<float> features;
  Index features_dim = 0;
  for (Index i = 0; i < n; i += chunk) {
    Tensor<float> part =
        embed(spec, store, slice_rows(images, i, std::min(i + chunk, n)));
    if (i == 0) {
      features_dim = part.dim(1);
      features = Tensor<float>(Shape{n, features_dim});
    }
    std::memcpy(features.data() + i * features_dim, part.data(),
                static_cast<size_t>(part.size()) * sizeof(float));
  }
  return features;
}

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Inference-path evaluation of the head (running statistics, no dropout).
EvalResult eval_head(const ArchitectureSpec& spec, WeightStore<float>& store,
                     const Tensor<float>& features,
                     const std::vector<int>& labels) {
  Tensor<float> probs = detail::run_range(
      spec, store, features, embedding_boundary(spec), spec.layers.size(),
      RunMode::Infer, detail::BnStats::Running, nullptr, nullptr);
  EvalResult r;
  r.loss = cross_entropy(probs, labels);
  const Index batch = probs.dim(0), classes = probs.dim(1);
  Index correct = 0;
  for (Index b = 0; b < batch; ++b) {
    Index arg = 0;
    for (Index c = 1; c < classes; ++c)
      if (probs(b, c) > probs(b, arg)) arg = c;
    if (arg == labels[static_cast<size_t>(b)]) ++correct;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(batch);
  return r;
}

std::string param_layer(const std::string& param_name) {
  auto dot = param_name.rfind('.');
  return dot == std::string::npos ? param_name : param_name.substr(0, dot);
}

}  // namespace

GradMap head_backward(const ArchitectureSpec& spec, WeightStore<double>& store,
                      const Tensor<double>& batch,
                      const std::vector<int>& labels,
                      const std::vector<std::string>& requested, Rng* rng) {
  Tensor<double> features =
      batch.rank() == 4 ? embed(spec, store, batch) : batch;

  detail::HeadPassOptions<double> opts;
  opts.want_grads = true;
  opts.update_running_stats = false;
  opts.rng = rng;
  auto result = detail::head_pass(spec, store, features, labels, opts);

  if (requested.empty()) return std::move(result.grads);

  std::map<std::string, size_t> layer_index;
  for (size_t i = 0; i < spec.layers.size(); ++i)
    layer_index[spec.layers[i].name] = i;

  GradMap out;
  for (const auto& name : requested) {
    auto li = layer_index.find(param_layer(name));
    if (li == layer_index.end())
      throw LookupError("unknown parameter '" + name + "'");
    if (li->second < spec.head_start)
      throw ConfigError("gradient requested for frozen parameter '" + name +
                        "'");
    auto it = result.grads.find(name);
    if (it == result.grads.end())
      throw LookupError("parameter '" + name + "' is not trainable");
    out.emplace(name, std::move(it->second));
  }
  return out;
}

TrainReport train_head(const ArchitectureSpec& spec,
                       const WeightStore<float>& store, const TrainData& data,
                       const TrainConfig& cfg) {
  cfg.validate();
  validate_spec(spec);
  if (data.train.count() == 0) throw ConfigError("training set is empty");

  // Every class must appear in the training split.
  {
    std::vector<int> seen(static_cast<size_t>(spec.num_classes), 0);
    for (int l : data.train.labels) {
      if (l < 0 || l >= spec.num_classes)
        throw LookupError("label " + std::to_string(l) + " out of range");
      seen[static_cast<size_t>(l)] = 1;
    }
    for (int c = 0; c < spec.num_classes; ++c)
      if (!seen[static_cast<size_t>(c)])
        throw ConfigError("class " + std::to_string(c) +
                          " has no training samples");
  }

  WeightStore<float> work = store;

  Tensor<float> train_features = embed_all(spec, work, data.train.images);
  Tensor<float> eval_features;
  if (data.eval.count() > 0)
    eval_features = embed_all(spec, work, data.eval.images);

  std::set<std::string> frozen = cfg.frozen_prefix;
  if (frozen.empty())
    for (size_t i = 0; i < spec.head_start; ++i)
      frozen.insert(spec.layers[i].name);

  const Index n = train_features.dim(0);
  Rng root(cfg.seed);

  TrainReport report;
  report.epochs.reserve(static_cast<size_t>(cfg.epochs));

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    Rng shuffle_rng = root.split(2 * static_cast<uint64_t>(epoch));
    Rng dropout_rng = root.split(2 * static_cast<uint64_t>(epoch) + 1);

    for (Index i = n - 1; i > 0; --i) {
      Index j = static_cast<Index>(
          shuffle_rng.uniform(0.0, static_cast<double>(i + 1)));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }

    for (Index at = 0; at < n; at += cfg.batch_size) {
      Index take = std::min<Index>(cfg.batch_size, n - at);
      if (take < 2) break;  // batch norm cannot train on a single sample
      std::vector<Index> rows(order.begin() + at, order.begin() + at + take);
      Tensor<float> bx = gather_rows(train_features, rows);
      std::vector<int> by(static_cast<size_t>(take));
      for (Index k = 0; k < take; ++k)
        by[static_cast<size_t>(k)] =
            data.train.labels[static_cast<size_t>(rows[static_cast<size_t>(k)])];

      detail::HeadPassOptions<float> opts;
      opts.want_grads = true;
      opts.update_running_stats = true;
      opts.rng = &dropout_rng;
      auto pass = detail::head_pass(spec, work, bx, by, opts);

      for (auto it = pass.grads.begin(); it != pass.grads.end();) {
        if (frozen.count(param_layer(it->first)))
          it = pass.grads.erase(it);
        else
          ++it;
      }
      sgd_step(work, pass.grads, cfg.learning_rate);
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    EvalResult train_eval =
        eval_head(spec, work, train_features, data.train.labels);
    rec.train_loss = train_eval.loss;
    rec.train_accuracy = train_eval.accuracy;
    if (eval_features.size() != 0) {
      EvalResult ev = eval_head(spec, work, eval_features, data.eval.labels);
      rec.eval_loss = ev.loss;
      rec.eval_accuracy = ev.accuracy;
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    report.epochs.push_back(rec);
  }

  report.final_weights = std::move(work);
  return report;
}

std::vector<SweepRow> lr_sweep(const ArchitectureSpec& spec,
                               const WeightStore<float>& store,
                               const TrainData& data, std::vector<double> grid,
                               const TrainConfig& base_cfg,
                               std::vector<std::string>* warnings) {
  if (grid.empty()) throw ConfigError("lr_sweep needs a non-empty grid");

  std::vector<double> rates;
  for (double r : grid) {
    if (std::find(rates.begin(), rates.end(), r) != rates.end()) {
      if (warnings)
        warnings->push_back("duplicate rate " + std::to_string(r) +
                            " dropped from grid");
      continue;
    }
    rates.push_back(r);
  }
  std::sort(rates.rbegin(), rates.rend());

  std::vector<SweepRow> table;
  table.reserve(rates.size());
  for (double r : rates) {
    TrainConfig cfg = base_cfg;
    cfg.learning_rate = r;
    TrainReport rep = train_head(spec, store, data, cfg);
    SweepRow row;
    row.learning_rate = r;
    row.final_train_accuracy = rep.epochs.back().train_accuracy;
    row.final_eval_accuracy = rep.epochs.back().eval_accuracy;
    table.push_back(row);
  }
  return table;
}

}  // namespace mmnet
