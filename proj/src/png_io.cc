// Copyright 2026 The cdaug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "cdaug/png_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "cdaug/errors.h"

namespace cdaug {
namespace {

void write_png(const std::filesystem::path& path, int width, int height,
               uint32_t format, const std::vector<uint8_t>& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0,
                               nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError(path.string() + ": cannot write PNG: " + msg);
  }
}

// Reads `path` converted to `format`; `want_color` states whether the file
// itself must carry color (true) or must be grayscale (false).
std::vector<uint8_t> read_png(const std::filesystem::path& path,
                              uint32_t format, bool want_color, int& width,
                              int& height) {
  if (!std::filesystem::exists(path)) {
    throw IoError(path.string() + ": no such file");
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    std::string msg = image.message;
    png_image_free(&image);
    throw FormatError(path.string() + ": not a readable PNG: " + msg);
  }
  const bool is_color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  const bool is_linear = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  if (is_color != want_color || has_alpha || is_linear ||
      (image.format & PNG_FORMAT_FLAG_COLORMAP) != 0) {
    png_image_free(&image);
    throw FormatError(path.string() + ": expected 8-bit " +
                      (want_color ? std::string("RGB") : "grayscale") +
                      " PNG without alpha");
  }
  image.format = format;
  width = static_cast<int>(image.width);
  height = static_cast<int>(image.height);
  std::vector<uint8_t> bytes(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw FormatError(path.string() + ": cannot decode PNG: " + msg);
  }
  return bytes;
}

void check_channels(const std::filesystem::path& path, int actual,
                    int expected) {
  if (actual != expected) {
    throw ShapeError(path.string() + ": expected " + std::to_string(expected) +
                     "-channel raster, got " + std::to_string(actual));
  }
}

}  // namespace

uint8_t quantize_unit(float v) {
  const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<uint8_t>(std::lround(clamped * 255.0));
}

void write_color_png(const std::filesystem::path& path, const Image& image) {
  check_channels(path, image.channels(), 3);
  std::vector<uint8_t> bytes(image.data().size());
  std::transform(image.data().begin(), image.data().end(), bytes.begin(),
                 quantize_unit);
  write_png(path, image.width(), image.height(), PNG_FORMAT_RGB, bytes);
}

void write_gray_png(const std::filesystem::path& path, const Image& image) {
  check_channels(path, image.channels(), 1);
  std::vector<uint8_t> bytes(image.data().size());
  std::transform(image.data().begin(), image.data().end(), bytes.begin(),
                 quantize_unit);
  write_png(path, image.width(), image.height(), PNG_FORMAT_GRAY, bytes);
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
  check_channels(path, mask.channels(), 1);
  std::vector<uint8_t> bytes(mask.data().begin(), mask.data().end());
  write_png(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, bytes);
}

Image read_color_png(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const auto bytes = read_png(path, PNG_FORMAT_RGB, true, w, h);
  Image out(w, h, 3);
  std::transform(bytes.begin(), bytes.end(), out.data().begin(),
                 [](uint8_t b) { return b / 255.0f; });
  return out;
}

Image read_gray_png(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const auto bytes = read_png(path, PNG_FORMAT_GRAY, false, w, h);
  Image out(w, h, 1);
  std::transform(bytes.begin(), bytes.end(), out.data().begin(),
                 [](uint8_t b) { return b / 255.0f; });
  return out;
}

Mask read_mask_png(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const auto bytes = read_png(path, PNG_FORMAT_GRAY, false, w, h);
  Mask out(w, h, 1);
  std::copy(bytes.begin(), bytes.end(), out.data().begin());
  return out;
}

}  // namespace cdaug
