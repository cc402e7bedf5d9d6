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
#ifndef MMNET_IMAGE_IO_HPP_
#define MMNET_IMAGE_IO_HPP_

#include <string>

#include "mmnet/tensor.hpp"

namespace mmnet {

/// Decodes a .png or .jpg/.jpeg file to an (h, w, 3) tensor of raw 0..255
/// values (not yet rescaled). Grayscale and alpha inputs are expanded /
/// stripped to RGB.
Tensor<float> load_image(const std::string& path);

/// load_image + nearest-neighbor resize to (size, size).
Tensor<float> load_image_resized(const std::string& path, Index size);

/// Nearest-neighbor scaling of an (h, w, 3) image; values untouched.
Tensor<float> resize_nearest(const Tensor<float>& img, Index out_h,
                             Index out_w);

/// Writes an (h, w, 3) image with values in [0,1] as 8-bit RGB PNG.
void save_png(const std::string& path, const Tensor<float>& img);

}  // namespace mmnet

#endif  // MMNET_IMAGE_IO_HPP_
