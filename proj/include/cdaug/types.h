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

#ifndef CDAUG_TYPES_H_
#define CDAUG_TYPES_H_

#include <algorithm>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cdaug/raster.h"

namespace cdaug {

constexpr int kBackground = 0;

// Image-level category labels. Sorted, unique, never holds background.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<int> categories);

  // Throws ConfigError for the background index or a negative index.
  void insert(int category);
  bool contains(int category) const {
    return std::binary_search(items_.begin(), items_.end(), category);
  }
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const std::vector<int>& items() const { return items_; }

  LabelSet united(const LabelSet& other) const;
  bool includes(const LabelSet& other) const {
    return std::includes(items_.begin(), items_.end(), other.items_.begin(),
                         other.items_.end());
  }

  bool operator==(const LabelSet&) const = default;

 private:
  std::vector<int> items_;
};

// Non-background categories present in a mask.
LabelSet categories_in(const Mask& mask);

struct Sample {
  std::string id;
  Image image;  // 3 channels
  LabelSet labels;
  std::optional<Mask> gt_mask;  // evaluation only

  bool operator==(const Sample&) const = default;
};

// Throws ShapeError when gt_mask disagrees with the image size or labels.
void validate_sample(const Sample& s);

// A tight-cropped cutout with per-pixel alpha; the unit of pasting.
struct ObjectInstance {
  Image cutout;  // 3 channels
  Image alpha;   // 1 channel, [0,1]
  int category = 0;
  std::string source_id;

  int width() const { return cutout.width(); }
  int height() const { return cutout.height(); }

  bool operator==(const ObjectInstance&) const = default;
};

// Pixels with alpha above one half form the object support.
inline bool in_support(float a) { return a > 0.5f; }

size_t support_area(const ObjectInstance& inst);

// Checks matching dimensions, a non-empty support, and (when `tight` is set)
// that the support's bounding box touches all four edges. Throws ShapeError
// or EmptyObjectError.
void validate_instance(const ObjectInstance& inst, bool tight = true);

}  // namespace cdaug

#endif  // CDAUG_TYPES_H_
