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

#include "cdaug/types.h"

#include <string>

#include "cdaug/errors.h"

namespace cdaug {

LabelSet::LabelSet(std::initializer_list<int> categories) {
  for (int c : categories) insert(c);
}

void LabelSet::insert(int category) {
  if (category <= kBackground) {
    throw ConfigError("label set cannot hold category " +
                      std::to_string(category));
  }
  auto it = std::lower_bound(items_.begin(), items_.end(), category);
  if (it == items_.end() || *it != category) items_.insert(it, category);
}

LabelSet LabelSet::united(const LabelSet& other) const {
  LabelSet out = *this;
  for (int c : other) out.insert(c);
  return out;
}

LabelSet categories_in(const Mask& mask) {
  bool seen[256] = {};
  for (uint8_t v : mask.data()) seen[v] = true;
  LabelSet out;
  for (int c = 1; c < 256; ++c) {
    if (seen[c]) out.insert(c);
  }
  return out;
}

void validate_sample(const Sample& s) {
  if (s.image.channels() != 3) {
    throw ShapeError("sample " + s.id + ": image must have 3 channels");
  }
  if (!s.gt_mask) return;
  if (!s.gt_mask->same_size(s.image) || s.gt_mask->channels() != 1) {
    throw ShapeError("sample " + s.id + ": gt_mask size differs from image");
  }
  if (!(categories_in(*s.gt_mask) == s.labels)) {
    throw ShapeError("sample " + s.id +
                     ": gt_mask categories differ from labels");
  }
}

size_t support_area(const ObjectInstance& inst) {
  return count_if(inst.alpha, in_support);
}

void validate_instance(const ObjectInstance& inst, bool tight) {
  if (inst.cutout.channels() != 3 || inst.alpha.channels() != 1 ||
      !inst.cutout.same_size(inst.alpha)) {
    throw ShapeError("instance " + inst.source_id +
                     ": cutout and alpha dimensions differ");
  }
  const auto box = tight_bbox(inst.alpha, in_support);
  if (!box) {
    throw EmptyObjectError("instance " + inst.source_id + " has no support");
  }
  if (tight && (box->x0 != 0 || box->y0 != 0 ||
                box->width != inst.alpha.width() ||
                box->height != inst.alpha.height())) {
    throw ShapeError("instance " + inst.source_id + " is not tightly cropped");
  }
}

}  // namespace cdaug
