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
#include "mmnet/augment.hpp"

#include <algorithm>
#include <cmath>

namespace mmnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_image(const Tensor<float>& img) {
  if (img.rank() != 3 || img.dim(2) != 3)
    throw ShapeError("expected an (h, w, 3) image, got " + img.shape().str());
}

}  // namespace

void AugmentConfig::validate() const {
  if (!(rescale_factor > 0.0))
    throw ConfigError("rescale_factor must be > 0");
  if (width_shift_range < 0.0 || width_shift_range >= 1.0 ||
      height_shift_range < 0.0 || height_shift_range >= 1.0)
    throw ConfigError("shift ranges must lie in [0,1)");
  if (shear_degrees < 0.0) throw ConfigError("shear_degrees must be >= 0");
  if (!(zoom_low > 0.0) || !(zoom_high > 0.0) || zoom_low > zoom_high)
    throw ConfigError("zoom range must satisfy 0 < low <= high");
}

Tensor<float> rescale(const Tensor<float>& raw, double rescale_factor) {
  for (Index i = 0; i < raw.size(); ++i) {
    if (!(raw[i] >= 0.0f && raw[i] <= 255.0f))
      throw ConfigError("rescale input value " + std::to_string(raw[i]) +
                        " at index " + std::to_string(i) +
                        " outside [0,255]");
  }
  Tensor<float> out(raw.shape());
  out.array() = raw.array() * static_cast<float>(rescale_factor);
  return out;
}

Tensor<float> affine_transform(const Tensor<float>& img, double shift_x,
                               double shift_y, double shear_deg, double zoom) {
  check_image(img);
  if (img.dim(0) != img.dim(1))
    throw ShapeError("affine_transform expects a square image");
  if (!(zoom > 0.0))
    throw ConfigError("zoom must be > 0, got " + std::to_string(zoom));

  const Index h = img.dim(0), w = img.dim(1);
  const double cx = static_cast<double>(w - 1) / 2.0;
  const double cy = static_cast<double>(h - 1) / 2.0;
  const double theta = shear_deg * kPi / 180.0;
  const double sin_t = std::sin(theta), cos_t = std::cos(theta);

  const bool identity =
      shift_x == 0.0 && shift_y == 0.0 && shear_deg == 0.0 && zoom == 1.0;
  if (identity) return img;

  Tensor<float> out(img.shape());
  for (Index yo = 0; yo < h; ++yo) {
    for (Index xo = 0; xo < w; ++xo) {
      // inverse map: src = Z * Sh * (out - c) + c - t
      const double dx = static_cast<double>(xo) - cx;
      const double dy = static_cast<double>(yo) - cy;
      const double sx = zoom * (dx - sin_t * dy) + cx - shift_x;
      const double sy = zoom * (cos_t * dy) + cy - shift_y;
      // nearest sample, edge clamp = repeat the closest pixel
      Index ix = static_cast<Index>(std::llround(sx));
      Index iy = static_cast<Index>(std::llround(sy));
      ix = std::clamp<Index>(ix, 0, w - 1);
      iy = std::clamp<Index>(iy, 0, h - 1);
      for (Index c = 0; c < 3; ++c) out(yo, xo, c) = img(iy, ix, c);
    }
  }
  return out;
}

Tensor<float> flip(const Tensor<float>& img, FlipAxis axis) {
  check_image(img);
  const Index h = img.dim(0), w = img.dim(1);
  Tensor<float> out(img.shape());
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      const Index sy = axis == FlipAxis::Vertical ? h - 1 - y : y;
      const Index sx = axis == FlipAxis::Horizontal ? w - 1 - x : x;
      for (Index c = 0; c < 3; ++c) out(y, x, c) = img(sy, sx, c);
    }
  }
  return out;
}

DrawnParams draw_params(const AugmentConfig& cfg, Rng& rng, Index width,
                        Index height) {
  DrawnParams p;
  const double wr = cfg.width_shift_range * static_cast<double>(width);
  const double hr = cfg.height_shift_range * static_cast<double>(height);
  p.shift_x = wr > 0.0 ? rng.uniform(-wr, wr) : 0.0;
  p.shift_y = hr > 0.0 ? rng.uniform(-hr, hr) : 0.0;
  p.shear_deg = cfg.shear_degrees > 0.0
                    ? rng.uniform(-cfg.shear_degrees, cfg.shear_degrees)
                    : 0.0;
  p.zoom = cfg.zoom_low == cfg.zoom_high
               ? cfg.zoom_low
               : rng.uniform(cfg.zoom_low, cfg.zoom_high);
  p.flip_h = cfg.horizontal_flip && rng.bernoulli(0.5);
  p.flip_v = cfg.vertical_flip && rng.bernoulli(0.5);
  return p;
}

Tensor<float> apply_params(const Tensor<float>& img, const DrawnParams& p) {
  Tensor<float> out =
      affine_transform(img, p.shift_x, p.shift_y, p.shear_deg, p.zoom);
  if (p.flip_h) out = flip(out, FlipAxis::Horizontal);
  if (p.flip_v) out = flip(out, FlipAxis::Vertical);
  return out;
}

std::vector<ImageSample> augment_batch(const std::vector<ImageSample>& samples,
                                       const AugmentConfig& cfg) {
  cfg.validate();
  Rng batch_rng(cfg.seed);
  std::vector<ImageSample> out(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    Rng rng = batch_rng.split(static_cast<uint64_t>(i));
    const Tensor<float>& img = samples[i].pixels;
    DrawnParams p = draw_params(cfg, rng, img.dim(1), img.dim(0));
    out[i].pixels = apply_params(img, p);
    out[i].label = samples[i].label;
  }
  return out;
}

}  // namespace mmnet
