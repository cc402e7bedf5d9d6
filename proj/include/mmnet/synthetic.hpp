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
#ifndef MMNET_SYNTHETIC_HPP_
#define MMNET_SYNTHETIC_HPP_

#include <cstdint>

#include "mmnet/train.hpp"

namespace mmnet {

/// Seeded procedural-texture dataset standing in for real photographs:
/// each class is a sinusoidal grating with its own orientation, frequency
/// and color tint, plus per-sample phase jitter and noise. Values in [0,1].
LabeledImages make_synthetic_dataset(int num_classes, int per_class,
                                     Index image_size, uint64_t seed);

}  // namespace mmnet

#endif  // MMNET_SYNTHETIC_HPP_
