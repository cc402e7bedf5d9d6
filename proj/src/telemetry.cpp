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
#include "mmnet/telemetry.hpp"

#include <chrono>

#include "json.hpp"

namespace mmnet {

std::string telemetry_json(const TelemetryRecord& rec) {
  nlohmann::json j;
  j["schema"] = 1;
  j["phase"] = rec.phase;
  j["wall_ms_per_forward"] = rec.wall_ms_per_forward;
  j["peak_transient_bytes"] = rec.peak_transient_bytes;
  j["param_count"] = rec.param_count;
  j["flop_estimate"] = rec.flop_estimate;
  j["batch_size"] = rec.batch_size;
  return j.dump();
}

TelemetryRecord measure_forward(const ArchitectureSpec& spec,
                                WeightStore<float>& store,
                                const Tensor<float>& batch,
                                const std::string& phase, int iters) {
  constexpr int kWarmup = 3;
  if (iters < 1) throw ConfigError("telemetry needs iters >= 1");

  TelemetryRecord rec;
  rec.phase = phase;
  rec.batch_size = static_cast<int>(batch.dim(0));
  rec.param_count = count_params(spec, ParamScope::All, ParamCounting::Total);
  rec.flop_estimate = count_flops(spec) * batch.dim(0);

  ForwardStats stats;
  for (int i = 0; i < kWarmup; ++i)
    forward(spec, store, batch, RunMode::Infer);

  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) {
    ForwardOptions opts;
    opts.stats = &stats;
    forward(spec, store, batch, RunMode::Infer, opts);
  }
  auto t1 = std::chrono::steady_clock::now();

  rec.wall_ms_per_forward =
      std::chrono::duration<double, std::milli>(t1 - t0).count() /
      static_cast<double>(iters);
  rec.peak_transient_bytes = stats.peak_transient_bytes;
  return rec;
}

}  // namespace mmnet
