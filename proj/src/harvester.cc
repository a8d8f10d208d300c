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

#include "cdaug/harvester.h"

#include <optional>

#include "cdaug/errors.h"
#include "cdaug/parallel.h"

namespace cdaug {

void HarvestCriteria::validate() const {
  if (!(eps1 >= 0.0 && eps1 < eps2 && eps2 <= 1.0)) {
    throw ConfigError("harvest.eps1/eps2 must satisfy 0 <= eps1 < eps2 <= 1");
  }
}

std::string_view reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::kMultiClass:
      return "multi_class";
    case RejectReason::kRatioTooSmall:
      return "ratio_too_small";
    case RejectReason::kRatioTooLarge:
      return "ratio_too_large";
    case RejectReason::kLabelAbsentInMask:
      return "label_absent_in_mask";
  }
  return "unknown";
}

Decision qualifies(const LabelSet& labels, const Mask& pred_mask,
                   const HarvestCriteria& crit) {
  Decision d;
  d.total_pixels = pred_mask.pixel_count();
  if (d.total_pixels == 0) throw ShapeError("qualifies: empty predicted mask");

  std::array<size_t, 256> histogram{};
  for (uint8_t v : pred_mask.data()) ++histogram[v];

  auto reject = [&](RejectReason r) {
    d.accepted = false;
    d.reason = r;
    return d;
  };

  if (labels.empty()) return reject(RejectReason::kLabelAbsentInMask);
  if (labels.size() > 1 && crit.require_single_class) {
    return reject(RejectReason::kMultiClass);
  }
  int category = labels.items().front();
  for (int c : labels) {
    if (c < 256 && histogram[c] > histogram[category]) category = c;
  }
  d.category = category;
  d.foreground_pixels = category < 256 ? histogram[category] : 0;

  if (d.foreground_pixels == 0 && histogram[kBackground] < d.total_pixels) {
    return reject(RejectReason::kLabelAbsentInMask);
  }
  const double ratio =
      static_cast<double>(d.foreground_pixels) / d.total_pixels;
  if (!(ratio > crit.eps1)) return reject(RejectReason::kRatioTooSmall);
  if (!(ratio < crit.eps2)) return reject(RejectReason::kRatioTooLarge);
  d.accepted = true;
  return d;
}

ObjectInstance extract_instance(const Image& image, const Mask& pred_mask,
                                int category, std::string source_id) {
  if (!image.same_size(pred_mask) || image.channels() != 3) {
    throw ShapeError("extract_instance: image and mask sizes differ");
  }
  const auto box = tight_bbox(
      pred_mask, [category](uint8_t v) { return v == category; });
  if (!box) {
    throw EmptyObjectError("category " + std::to_string(category) +
                           " absent from predicted mask of " + source_id);
  }
  ObjectInstance inst;
  inst.cutout = crop(image, *box);
  inst.alpha = Image(box->width, box->height, 1);
  for (int y = 0; y < box->height; ++y) {
    for (int x = 0; x < box->width; ++x) {
      inst.alpha.at(x, y) =
          pred_mask.at(box->x0 + x, box->y0 + y) == category ? 1.0f : 0.0f;
    }
  }
  inst.category = category;
  inst.source_id = std::move(source_id);
  return inst;
}

size_t HarvestProvenance::rejected_total() const {
  size_t total = 0;
  for (size_t n : rejected) total += n;
  return total;
}

InstanceBank::InstanceBank(std::vector<ObjectInstance> instances,
                           HarvestProvenance provenance)
    : instances_(std::move(instances)), provenance_(std::move(provenance)) {
  for (size_t i = 0; i < instances_.size(); ++i) {
    validate_instance(instances_[i]);
    by_category_[instances_[i].category].push_back(i);
  }
}

LabelSet InstanceBank::categories() const {
  LabelSet out;
  for (const auto& [category, positions] : by_category_) out.insert(category);
  return out;
}

InstanceBank harvest(std::span<const Sample> samples,
                     std::span<const Mask> pred_masks,
                     const HarvestCriteria& crit, std::string source_corpus,
                     int jobs) {
  crit.validate();
  if (samples.empty()) throw ConfigError("harvest: corpus is empty");
  if (samples.size() != pred_masks.size()) {
    throw ShapeError("harvest: one predicted mask per sample is required");
  }
  std::vector<Decision> decisions(samples.size());
  std::vector<std::optional<ObjectInstance>> cut(samples.size());
  parallel_for(samples.size(), jobs, [&](size_t i) {
    decisions[i] = qualifies(samples[i].labels, pred_masks[i], crit);
    if (decisions[i].accepted) {
      cut[i] = extract_instance(samples[i].image, pred_masks[i],
                                decisions[i].category, samples[i].id);
    }
  });

  HarvestProvenance provenance;
  provenance.criteria = crit;
  provenance.source_corpus = std::move(source_corpus);
  provenance.examined = samples.size();
  std::vector<ObjectInstance> instances;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (cut[i]) {
      instances.push_back(std::move(*cut[i]));
    } else {
      ++provenance.rejected[static_cast<size_t>(decisions[i].reason)];
    }
  }
  if (instances.empty()) {
    throw EmptyBankError("no corpus entry qualified (" +
                         std::to_string(samples.size()) + " examined)");
  }
  return InstanceBank(std::move(instances), std::move(provenance));
}

}  // namespace cdaug
