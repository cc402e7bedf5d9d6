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
#ifndef MMNET_AUGMENT_HPP_
#define MMNET_AUGMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mmnet/tensor.hpp"

namespace mmnet {

/// Seeded specification of the augmentation transforms: rescale, width and
/// height shift, shear, zoom, flips, nearest fill.
///
/// Zoom follows the magnify-below-one convention: a factor < 1 enlarges
/// the image content, a factor > 1 shrinks it.
struct AugmentConfig {
  double rescale_factor = 1.0 / 255.0;
  double width_shift_range = 0.2;   // fraction of width, in [0,1)
  double height_shift_range = 0.2;  // fraction of height, in [0,1)
  double shear_degrees = 10.0;
  double zoom_low = 0.8;
  double zoom_high = 1.2;
  bool horizontal_flip = true;
  bool vertical_flip = false;
  uint64_t seed = 42;
  // fill_mode is always `nearest`: out-of-bounds samples repeat the
  // closest edge pixel.

  void validate() const;

  static AugmentConfig none(uint64_t seed = 42) {
    AugmentConfig c;
    c.width_shift_range = 0.0;
    c.height_shift_range = 0.0;
    c.shear_degrees = 0.0;
    c.zoom_low = 1.0;
    c.zoom_high = 1.0;
    c.horizontal_flip = false;
    c.vertical_flip = false;
    c.seed = seed;
    return c;
  }

  bool is_identity() const {
    return width_shift_range == 0.0 && height_shift_range == 0.0 &&
           shear_degrees == 0.0 && zoom_low == 1.0 && zoom_high == 1.0 &&
           !horizontal_flip && !vertical_flip;
  }
};

/// One (h, w, 3) image with values in [0,1] after rescaling, plus its
/// class index.
struct ImageSample {
  Tensor<float> pixels;
  int label = 0;
};

enum class FlipAxis { Horizontal, Vertical };

/// raw 0..255 values scaled by rescale_factor into [0,1]. Out-of-range
/// inputs are a validation error.
Tensor<float> rescale(const Tensor<float>& raw,
                      double rescale_factor = 1.0 / 255.0);

/// Single composed inverse-mapped affine warp about the image center with
/// nearest-neighbor sampling and edge-clamp fill. Shifts are in pixels;
/// positive shift_x moves content right, positive shift_y moves it down.
/// Identity parameters (0, 0, 0, 1) return the input bit-identically.
Tensor<float> affine_transform(const Tensor<float>& img, double shift_x,
                               double shift_y, double shear_deg, double zoom);

/// Mirror along the axis; an involution.
Tensor<float> flip(const Tensor<float>& img, FlipAxis axis);

/// Per-sample parameters drawn from cfg ranges, each sample on its own
/// counter-split stream so serial and parallel execution agree. Labels pass
/// through unchanged. Input samples are already rescaled to [0,1].
std::vector<ImageSample> augment_batch(const std::vector<ImageSample>& samples,
                                       const AugmentConfig& cfg);

/// Parameters drawn for one sample; exposed for the preview tool.
struct DrawnParams {
  double shift_x = 0.0;
  double shift_y = 0.0;
  double shear_deg = 0.0;
  double zoom = 1.0;
  bool flip_h = false;
  bool flip_v = false;
};

DrawnParams draw_params(const AugmentConfig& cfg, Rng& rng, Index width,
                        Index height);
Tensor<float> apply_params(const Tensor<float>& img, const DrawnParams& p);

}  // namespace mmnet

#endif  // MMNET_AUGMENT_HPP_
