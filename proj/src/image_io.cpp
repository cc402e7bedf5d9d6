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
#include "mmnet/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

namespace mmnet {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string lower_ext(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

Tensor<float> from_rgb8(const std::vector<unsigned char>& rgb, Index h,
                        Index w) {
  Tensor<float> out(Shape{h, w, 3});
  for (Index i = 0; i < out.size(); ++i)
    out[i] = static_cast<float>(rgb[static_cast<size_t>(i)]);
  return out;
}

Tensor<float> load_png_file(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open image '" + path + "'");

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("'" + path + "' is not a valid PNG");
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
      png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const Index h = png_get_image_height(png, info);
  const Index w = png_get_image_width(png, info);
  std::vector<unsigned char> rgb(static_cast<size_t>(h * w * 3));
  std::vector<png_bytep> rows(static_cast<size_t>(h));
  for (Index y = 0; y < h; ++y)
    rows[static_cast<size_t>(y)] = rgb.data() + y * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return from_rgb8(rgb, h, w);
}

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(mgr->jump, 1);
}

Tensor<float> load_jpeg_file(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open image '" + path + "'");

  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw FormatError("'" + path + "' is not a valid JPEG");
  }

  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const Index h = cinfo.output_height;
  const Index w = cinfo.output_width;
  std::vector<unsigned char> rgb(static_cast<size_t>(h * w * 3));
  while (cinfo.output_scanline < cinfo.output_height) {
    unsigned char* row = rgb.data() + cinfo.output_scanline * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return from_rgb8(rgb, h, w);
}

}  // namespace

Tensor<float> load_image(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "png") return load_png_file(path);
  if (ext == "jpg" || ext == "jpeg") return load_jpeg_file(path);
  throw ConfigError("unsupported image extension '." + ext + "' in '" + path +
                    "' (png|jpg)");
}

Tensor<float> resize_nearest(const Tensor<float>& img, Index out_h,
                             Index out_w) {
  if (img.rank() != 3 || img.dim(2) != 3)
    throw ShapeError("resize expects an (h, w, 3) image");
  const Index h = img.dim(0), w = img.dim(1);
  if (h == out_h && w == out_w) return img;
  Tensor<float> out(Shape{out_h, out_w, 3});
  for (Index y = 0; y < out_h; ++y) {
    Index sy = std::min<Index>(h - 1, y * h / out_h);
    for (Index x = 0; x < out_w; ++x) {
      Index sx = std::min<Index>(w - 1, x * w / out_w);
      for (Index c = 0; c < 3; ++c) out(y, x, c) = img(sy, sx, c);
    }
  }
  return out;
}

Tensor<float> load_image_resized(const std::string& path, Index size) {
  return resize_nearest(load_image(path), size, size);
}

void save_png(const std::string& path, const Tensor<float>& img) {
  if (img.rank() != 3 || img.dim(2) != 3)
    throw ShapeError("save_png expects an (h, w, 3) image");
  const Index h = img.dim(0), w = img.dim(1);

  std::vector<unsigned char> rgb(static_cast<size_t>(h * w * 3));
  for (Index i = 0; i < img.size(); ++i) {
    float v = std::clamp(img[i], 0.0f, 1.0f);
    rgb[static_cast<size_t>(i)] =
        static_cast<unsigned char>(std::lround(v * 255.0f));
  }

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open '" + path + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write to '" + path + "' failed");
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w),
               static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Index y = 0; y < h; ++y)
    png_write_row(png, rgb.data() + y * w * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace mmnet
