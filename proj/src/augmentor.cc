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

#include "cdaug/augmentor.h"

#include <algorithm>
#include <numeric>

namespace cdaug {
namespace {

constexpr int kOcclusionRetries = 10;

std::vector<size_t> shuffled_prefix(size_t population, size_t n,
                                    RngStream& rng) {
  std::vector<size_t> idx(population);
  std::iota(idx.begin(), idx.end(), size_t{0});
  for (size_t i = 0; i < n; ++i) {
    const size_t j = i + rng.below(population - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

void stamp_support(Mask& mask, const BlendResult& blend) {
  const PlacementRecord& r = blend.record;
  for (int j = 0; j < r.height; ++j) {
    for (int i = 0; i < r.width; ++i) {
      if (in_support(blend.pasted.alpha.at(i, j))) {
        mask.at(r.paste_x + i, r.paste_y + j) = static_cast<uint8_t>(r.category);
      }
    }
  }
}

}  // namespace

void AugmentConfig::validate() const {
  if (objects_per_image < 1) {
    throw ConfigError("augment.objects_per_image must be >= 1");
  }
  if (max_resample_attempts < 1) {
    throw ConfigError("augment.max_resample_attempts must be >= 1");
  }
  blend.validate();
}

const ObjectInstance& sample_disjoint_instance(const InstanceBank& bank,
                                               const LabelSet& exclude,
                                               const AugmentConfig& cfg,
                                               RngStream& rng) {
  if (bank.empty()) throw EmptyBankError("cannot sample from an empty bank");
  auto draw = [&]() -> const ObjectInstance& {
    return bank.instances()[rng.below(bank.size())];
  };
  if (cfg.allow_same_category) return draw();
  if (exclude.includes(bank.categories())) {
    throw ExhaustionError("every bank category is already labeled", true);
  }
  for (int attempt = 0; attempt < cfg.max_resample_attempts; ++attempt) {
    const ObjectInstance& inst = draw();
    if (!exclude.contains(inst.category)) return inst;
  }
  throw ExhaustionError("no disjoint instance after " +
                            std::to_string(cfg.max_resample_attempts) +
                            " draws",
                        false);
}

AugmentResult augment_sample(const Sample& s, const InstanceBank& bank,
                             const AugmentConfig& cfg, RngStream& rng) {
  cfg.validate();
  AugmentResult out{s, {}};
  out.sample.id = s.id + "_aug";
  for (int k = 0; k < cfg.objects_per_image; ++k) {
    const ObjectInstance& inst =
        sample_disjoint_instance(bank, out.sample.labels, cfg, rng);
    LabelSet merged = out.sample.labels;
    merged.insert(inst.category);

    std::optional<BlendResult> accepted;
    std::optional<Mask> mask;
    for (int attempt = 0; attempt < kOcclusionRetries && !accepted; ++attempt) {
      BlendResult blend = random_blend(out.sample, inst, cfg.blend, rng);
      if (!out.sample.gt_mask) {
        accepted = std::move(blend);
        break;
      }
      Mask candidate = *out.sample.gt_mask;
      stamp_support(candidate, blend);
      if (categories_in(candidate) == merged) {
        mask = std::move(candidate);
        accepted = std::move(blend);
      }
    }
    if (!accepted) {
      throw PlacementError("every placement of " + inst.source_id + " on " +
                           s.id + " hides a labeled category");
    }
    out.sample.image = std::move(accepted->image);
    out.sample.labels = std::move(merged);
    if (mask) out.sample.gt_mask = std::move(mask);
    out.placements.push_back(std::move(accepted->record));
  }
  return out;
}

PairwiseBatch assemble_batch(std::span<const Sample> corpus,
                             std::span<const size_t> indices,
                             const InstanceBank* bank,
                             const AugmentConfig& cfg, const RngStream& rng,
                             int jobs) {
  cfg.validate();
  PairwiseBatch batch;
  batch.pairwise = bank != nullptr && cfg.pairwise;
  if (bank == nullptr) {
    for (size_t idx : indices) {
      batch.entries.push_back({corpus[idx], {}, idx, false});
    }
    return batch;
  }

  std::vector<std::optional<AugmentResult>> results(indices.size());
  parallel_for(indices.size(), jobs, [&](size_t k) {
    RngStream slot_rng = rng.child(k);
    try {
      results[k] = augment_sample(corpus[indices[k]], *bank, cfg, slot_rng);
    } catch (const ExhaustionError&) {
    } catch (const PlacementError&) {
    }
  });

  batch.entries.reserve(indices.size() * (batch.pairwise ? 2 : 1));
  for (size_t k = 0; k < indices.size(); ++k) {
    const size_t idx = indices[k];
    if (batch.pairwise) batch.entries.push_back({corpus[idx], {}, idx, false});
    if (results[k]) {
      batch.entries.push_back({std::move(results[k]->sample),
                               std::move(results[k]->placements), idx, true});
    } else {
      ++batch.skipped;
      batch.entries.push_back({corpus[idx], {}, idx, false});
    }
  }
  return batch;
}

PairwiseBatch make_batch(std::span<const Sample> corpus,
                         const InstanceBank& bank, size_t n,
                         const AugmentConfig& cfg, RngStream& rng, int jobs) {
  if (n > corpus.size()) {
    throw ConfigError("make_batch: batch of " + std::to_string(n) +
                      " exceeds corpus of " + std::to_string(corpus.size()));
  }
  const std::vector<size_t> idx = shuffled_prefix(corpus.size(), n, rng);
  return assemble_batch(corpus, idx, &bank, cfg, rng.child("slots"), jobs);
}

BatchStream::BatchStream(std::span<const Sample> corpus,
                         const InstanceBank* bank, AugmentConfig cfg,
                         size_t batch_size, RngStream order_rng,
                         RngStream augment_rng, int jobs)
    : corpus_(corpus),
      bank_(bank),
      cfg_(std::move(cfg)),
      batch_size_(batch_size),
      order_rng_(order_rng),
      augment_rng_(augment_rng),
      jobs_(jobs) {
  if (corpus_.empty()) throw ConfigError("training corpus is empty");
  if (batch_size_ < 1) throw ConfigError("batch size must be >= 1");
  cfg_.validate();
}

size_t BatchStream::batches_per_epoch() const {
  return (corpus_.size() + batch_size_ - 1) / batch_size_;
}

std::vector<size_t> BatchStream::batch_indices(size_t epoch,
                                               size_t batch) const {
  RngStream rng = order_rng_.child(epoch);
  const std::vector<size_t> perm =
      shuffled_prefix(corpus_.size(), corpus_.size(), rng);
  const size_t begin = std::min(batch * batch_size_, perm.size());
  const size_t end = std::min(begin + batch_size_, perm.size());
  return {perm.begin() + begin, perm.begin() + end};
}

PairwiseBatch BatchStream::batch(size_t epoch, size_t batch) const {
  const std::vector<size_t> idx = batch_indices(epoch, batch);
  return assemble_batch(corpus_, idx, bank_, cfg_,
                        augment_rng_.child(epoch).child(batch), jobs_);
}

}  // namespace cdaug
