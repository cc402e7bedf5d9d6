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
#include "mmnet/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace mmnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct ClassStyle {
  double angle;
  double frequency;
  float tint[3];
};

ClassStyle style_for(int cls, int num_classes, Rng& rng) {
  ClassStyle s;
  s.angle = kPi * static_cast<double>(cls) / static_cast<double>(num_classes);
  s.frequency = 2.0 + 1.5 * static_cast<double>(cls % 5);
  // well-separated tints on a seeded jittered color wheel
  double hue = 2.0 * kPi * static_cast<double>(cls) /
                   static_cast<double>(num_classes) +
               rng.uniform(-0.05, 0.05);
  s.tint[0] = static_cast<float>(0.55 + 0.35 * std::cos(hue));
  s.tint[1] = static_cast<float>(0.55 + 0.35 * std::cos(hue - 2.0 * kPi / 3));
  s.tint[2] = static_cast<float>(0.55 + 0.35 * std::cos(hue + 2.0 * kPi / 3));
  return s;
}

}  // namespace

LabeledImages make_synthetic_dataset(int num_classes, int per_class,
                                     Index image_size, uint64_t seed) {
  if (num_classes < 2 || per_class < 1 || image_size < 4)
    throw ConfigError("synthetic dataset needs >= 2 classes, >= 1 image per "
                      "class, size >= 4");

  const Index n = static_cast<Index>(num_classes) * per_class;
  LabeledImages out;
  out.images = Tensor<float>(Shape{n, image_size, image_size, 3});
  out.labels.resize(static_cast<size_t>(n));
  for (int c = 0; c < num_classes; ++c) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "class%02d", c);
    out.class_names.push_back(buf);
  }

  Rng root(seed);
  Index sample = 0;
  for (int c = 0; c < num_classes; ++c) {
    Rng style_rng = root.split(0x1000u + static_cast<uint64_t>(c));
    const ClassStyle style = style_for(c, num_classes, style_rng);
    for (int k = 0; k < per_class; ++k, ++sample) {
      Rng rng = root.split(static_cast<uint64_t>(sample) + 0x10000u);
      const double phase = rng.uniform(0.0, 2.0 * kPi);
      const double freq = style.frequency * (1.0 + rng.uniform(-0.1, 0.1));
      const double ca = std::cos(style.angle), sa = std::sin(style.angle);
      out.labels[static_cast<size_t>(sample)] = c;
      for (Index y = 0; y < image_size; ++y) {
        for (Index x = 0; x < image_size; ++x) {
          const double u = static_cast<double>(x) /
                           static_cast<double>(image_size);
          const double v = static_cast<double>(y) /
                           static_cast<double>(image_size);
          const double wave =
              0.5 + 0.5 * std::sin(2.0 * kPi * freq * (u * ca + v * sa) +
                                   phase);
          for (Index ch = 0; ch < 3; ++ch) {
            double val = style.tint[ch] * (0.35 + 0.65 * wave) +
                         rng.uniform(-0.05, 0.05);
            out.images(sample, y, x, ch) =
                static_cast<float>(std::clamp(val, 0.0, 1.0));
          }
        }
      }
    }
  }
  return out;
}

}  // namespace mmnet
