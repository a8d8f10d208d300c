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

#ifndef CDAUG_HARVESTER_H_
#define CDAUG_HARVESTER_H_

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdaug/types.h"

namespace cdaug {

// Instance-collecting filter. An image qualifies when it carries a single
// class and that class covers a fraction of the predicted mask strictly
// between eps1 and eps2.
struct HarvestCriteria {
  double eps1 = 0.1;
  double eps2 = 0.7;
  bool require_single_class = true;

  void validate() const;
  bool operator==(const HarvestCriteria&) const = default;
};

enum class RejectReason {
  kMultiClass,
  kRatioTooSmall,
  kRatioTooLarge,
  kLabelAbsentInMask,
};
constexpr size_t kRejectReasonCount = 4;

std::string_view reason_name(RejectReason reason);

struct Decision {
  bool accepted = false;
  int category = 0;              // valid when accepted
  RejectReason reason{};         // valid when rejected
  size_t foreground_pixels = 0;  // m
  size_t total_pixels = 0;       // n
};

// Label selection and rejection order:
//  * empty label set -> label_absent_in_mask;
//  * several labels with require_single_class -> multi_class; without it the
//    label covering the most mask pixels is used (ties to the smaller index);
//  * m == 0 while the mask holds other categories -> label_absent_in_mask;
//  * m/n <= eps1 -> ratio_too_small, m/n >= eps2 -> ratio_too_large.
Decision qualifies(const LabelSet& labels, const Mask& pred_mask,
                   const HarvestCriteria& crit);

// Cuts the tight box around `category` pixels; alpha is 1 on those pixels.
// Throws EmptyObjectError when the category is absent.
ObjectInstance extract_instance(const Image& image, const Mask& pred_mask,
                                int category, std::string source_id = {});

struct HarvestProvenance {
  HarvestCriteria criteria;
  std::string source_corpus;
  size_t examined = 0;
  std::array<size_t, kRejectReasonCount> rejected{};

  size_t rejected_total() const;
};

// Category-indexed collection of harvested instances.
class InstanceBank {
 public:
  InstanceBank() = default;
  InstanceBank(std::vector<ObjectInstance> instances,
               HarvestProvenance provenance);

  const std::vector<ObjectInstance>& instances() const { return instances_; }
  const std::map<int, std::vector<size_t>>& by_category() const {
    return by_category_;
  }
  const HarvestProvenance& provenance() const { return provenance_; }
  size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  LabelSet categories() const;

 private:
  std::vector<ObjectInstance> instances_;
  std::map<int, std::vector<size_t>> by_category_;
  HarvestProvenance provenance_;
};

// Builds a fresh bank from the entries `qualifies` accepts, in corpus order.
// `pred_masks[i]` is the predicted mask for `samples[i]`. Throws
// EmptyBankError when nothing qualifies.
InstanceBank harvest(std::span<const Sample> samples,
                     std::span<const Mask> pred_masks,
                     const HarvestCriteria& crit,
                     std::string source_corpus = "corpus", int jobs = 1);

}  // namespace cdaug

#endif  // CDAUG_HARVESTER_H_
