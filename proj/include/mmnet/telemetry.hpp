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
#ifndef MMNET_TELEMETRY_HPP_
#define MMNET_TELEMETRY_HPP_

#include <cstdint>
#include <ostream>
#include <string>

#include "mmnet/forward.hpp"
#include "mmnet/model.hpp"
#include "mmnet/weights.hpp"

namespace mmnet {

/// Portable resource record: device-independent causes (parameters, MACs,
/// transient bytes, wall time) rather than vendor GPU percentages.
struct TelemetryRecord {
  std::string phase;
  double wall_ms_per_forward = 0.0;
  size_t peak_transient_bytes = 0;
  int64_t param_count = 0;
  int64_t flop_estimate = 0;
  int batch_size = 0;
};

std::string telemetry_json(const TelemetryRecord& rec);

/// Times `iters` inference passes on the given batch after discarding 3
/// warm-up iterations; wall time is the mean per forward (monotonic clock).
TelemetryRecord measure_forward(const ArchitectureSpec& spec,
                                WeightStore<float>& store,
                                const Tensor<float>& batch,
                                const std::string& phase, int iters = 10);

}  // namespace mmnet

#endif  // MMNET_TELEMETRY_HPP_
