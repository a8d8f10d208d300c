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

#ifndef CDAUG_BLENDER_H_
#define CDAUG_BLENDER_H_

#include <optional>
#include <string>
#include <utility>

#include "cdaug/rng.h"
#include "cdaug/types.h"

namespace cdaug {

struct BlendConfig {
  // Fraction of the target area the pasted support may occupy.
  double scale_area_min = 0.05;
  double scale_area_max = 0.30;
  double rotation_min_deg = -45.0;
  double rotation_max_deg = 45.0;
  bool rotation_enabled = true;
  // Alpha softening after geometric resampling; 0 disables it.
  double gaussian_sigma = 0.0;

  void validate() const;
  bool operator==(const BlendConfig&) const = default;
};

struct PlacementRecord {
  std::string instance_source_id;
  int category = 0;
  double scale_factor = 1.0;
  double rotation_deg = 0.0;
  int paste_x = 0;
  int paste_y = 0;
  int width = 0;
  int height = 0;
  // Fraction of pre-existing ground-truth foreground covered by the pasted
  // support; absent when the target has no ground truth.
  std::optional<double> occluded_fraction;

  Box box() const { return Box{paste_x, paste_y, width, height}; }
  bool operator==(const PlacementRecord&) const = default;
};

// Bilinear resize of cutout and alpha by `factor`, alpha re-binarized at 0.5
// and the result re-cropped to its support. factor == 1 returns the input.
// Throws TooSmallError when the output would vanish.
ObjectInstance rescale_instance(const ObjectInstance& inst, double factor);

// Rotation about the cutout center onto a canvas large enough to hold the
// whole rotated rectangle. Positive angles turn counter-clockwise on screen.
ObjectInstance rotate_instance(const ObjectInstance& inst, double degrees);

// Convolves alpha with a normalized Gaussian of radius ceil(3 sigma). Alpha
// outside the cutout counts as transparent, so edges soften. sigma == 0
// returns the input. The result keeps its dimensions and is not re-cropped.
ObjectInstance smooth_alpha(const ObjectInstance& inst, double sigma);

// out = alpha * cutout + (1 - alpha) * target inside the box at (x, y).
// Throws BoundsError when the box leaves the target.
Image paste(const Image& target, const ObjectInstance& inst, int x, int y);

struct BlendResult {
  Image image;
  PlacementRecord record;
  // Transformed instance as pasted; `record.box()` locates it.
  ObjectInstance pasted;
};

// Random rotation, area-fraction rescale, optional smoothing and uniform
// placement. Fully determined by the inputs and `rng`. Throws PlacementError
// when the instance cannot be made to fit.
BlendResult random_blend(const Sample& target, const ObjectInstance& inst,
                         const BlendConfig& cfg, RngStream& rng);

}  // namespace cdaug

#endif  // CDAUG_BLENDER_H_
