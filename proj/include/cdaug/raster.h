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

#ifndef CDAUG_RASTER_H_
#define CDAUG_RASTER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdaug/errors.h"

namespace cdaug {

// Row-major, channel-interleaved pixel grid. Color and alpha rasters hold
// reals in [0,1]; category rasters hold indices with 0 = background.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels < 1) {
      throw ShapeError("invalid raster shape " + std::to_string(width) + "x" +
                       std::to_string(height) + "x" +
                       std::to_string(channels));
    }
    data_.assign(static_cast<size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  size_t pixel_count() const { return static_cast<size_t>(width_) * height_; }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  template <typename U>
  bool same_size(const Raster<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Raster& other) const = default;

 private:
  size_t index(int x, int y, int c) const {
    return (static_cast<size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

// Color (3 channels), alpha and heatmaps (1 channel) use real values.
using Image = Raster<float>;
// Category-index masks.
using Mask = Raster<uint8_t>;

struct Box {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  bool operator==(const Box&) const = default;
};

// Returns the w x h sub-raster at (x0, y0). Throws BoundsError when the
// rectangle leaves the raster or is empty.
template <typename T>
Raster<T> crop(const Raster<T>& r, int x0, int y0, int w, int h) {
  if (w < 1 || h < 1 || x0 < 0 || y0 < 0 || x0 + w > r.width() ||
      y0 + h > r.height()) {
    throw BoundsError("crop rectangle (" + std::to_string(x0) + "," +
                      std::to_string(y0) + "," + std::to_string(w) + "," +
                      std::to_string(h) + ") outside " +
                      std::to_string(r.width()) + "x" +
                      std::to_string(r.height()));
  }
  Raster<T> out(w, h, r.channels());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < r.channels(); ++c) {
        out.at(x, y, c) = r.at(x0 + x, y0 + y, c);
      }
    }
  }
  return out;
}

template <typename T>
Raster<T> crop(const Raster<T>& r, const Box& box) {
  return crop(r, box.x0, box.y0, box.width, box.height);
}

// Smallest axis-aligned box containing every pixel whose channel-0 value
// satisfies `pred`; nullopt when none does.
template <typename T, typename Pred>
std::optional<Box> tight_bbox(const Raster<T>& mask, Pred pred) {
  int min_x = mask.width(), min_y = mask.height(), max_x = -1, max_y = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!pred(mask.at(x, y))) continue;
      if (x < min_x) min_x = x;
      if (x > max_x) max_x = x;
      if (y < min_y) min_y = y;
      if (y > max_y) max_y = y;
    }
  }
  if (max_x < 0) return std::nullopt;
  return Box{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
}

// Number of channel-0 values satisfying `pred`.
template <typename T, typename Pred>
size_t count_if(const Raster<T>& r, Pred pred) {
  size_t n = 0;
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      if (pred(r.at(x, y))) ++n;
    }
  }
  return n;
}

}  // namespace cdaug

#endif  // CDAUG_RASTER_H_
