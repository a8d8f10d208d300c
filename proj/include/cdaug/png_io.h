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


#ifndef CDAUG_PNG_IO_H_
#define CDAUG_PNG_IO_H_

#include <filesystem>

#include "cdaug/raster.h"

namespace cdaug {

// Rasters cross the file boundary as 8-bit PNG. Real values in [0,1] map to
// round(v * 255); category masks store the index itself as gray level.
// Writers create missing parent directories. All failures raise IoError,
// except a readable file with the wrong layout, which raises FormatError.

// 3-channel image as 8-bit RGB.
void write_color_png(const std::filesystem::path& path, const Image& image);
// 1-channel real raster (alpha, heatmap) as 8-bit grayscale.
void write_gray_png(const std::filesystem::path& path, const Image& image);
// Category mask as 8-bit grayscale, pixel value = category index.
void write_mask_png(const std::filesystem::path& path, const Mask& mask);

Image read_color_png(const std::filesystem::path& path);
Image read_gray_png(const std::filesystem::path& path);
Mask read_mask_png(const std::filesystem::path& path);

// Quantization used by the writers, exposed for round-trip checks.
uint8_t quantize_unit(float v);

}  // namespace cdaug

#endif  // CDAUG_PNG_IO_H_
