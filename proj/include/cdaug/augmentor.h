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

#ifndef CDAUG_AUGMENTOR_H_
#define CDAUG_AUGMENTOR_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdaug/blender.h"
#include "cdaug/errors.h"
#include "cdaug/harvester.h"
#include "cdaug/parallel.h"
#include "cdaug/rng.h"
#include "cdaug/types.h"

namespace cdaug {

struct AugmentConfig {
  int objects_per_image = 1;
  bool allow_same_category = false;
  bool pairwise = true;
  int max_resample_attempts = 100;
  BlendConfig blend;

  void validate() const;
  bool operator==(const AugmentConfig&) const = default;
};

// Draws instances uniformly from the bank until one's category is outside
// `exclude` (the first draw is taken as-is with allow_same_category).
// Throws ExhaustionError, flagged provably impossible when every bank
// category is excluded.
const ObjectInstance& sample_disjoint_instance(const InstanceBank& bank,
                                               const LabelSet& exclude,
                                               const AugmentConfig& cfg,
                                               RngStream& rng);

struct AugmentResult {
  Sample sample;
  std::vector<PlacementRecord> placements;
};

// Pastes cfg.objects_per_image instances one after another. Pasted
// categories join the exclusion set and the output labels. With a ground
// truth mask, pasted support pixels take the pasted category, and a
// placement that would erase every pixel of a labeled category is redrawn.
AugmentResult augment_sample(const Sample& s, const InstanceBank& bank,
                             const AugmentConfig& cfg, RngStream& rng);

struct BatchEntry {
  Sample sample;
  std::vector<PlacementRecord> placements;
  size_t source_index = 0;
  bool augmented = false;
};

// Pairwise mode interleaves each original (even index) with its augmented
// counterpart (odd index); otherwise entries are augmented samples only.
struct PairwiseBatch {
  std::vector<BatchEntry> entries;
  bool pairwise = true;
  // Slots whose augmentation failed and were emitted un-augmented.
  size_t skipped = 0;
};

// Builds a batch from the given corpus indices. Slot k augments with
// rng.child(k). A null bank yields plain (un-augmented, unpaired) entries.
PairwiseBatch assemble_batch(std::span<const Sample> corpus,
                             std::span<const size_t> indices,
                             const InstanceBank* bank,
                             const AugmentConfig& cfg, const RngStream& rng,
                             int jobs = 1);

// Draws n distinct corpus samples and assembles their batch.
PairwiseBatch make_batch(std::span<const Sample> corpus,
                         const InstanceBank& bank, size_t n,
                         const AugmentConfig& cfg, RngStream& rng,
                         int jobs = 1);

// Source of training batches. Epoch e visits a permutation of the corpus in
// chunks of batch_size; with a bank every chunk is augmented.
class BatchStream {
 public:
  BatchStream(std::span<const Sample> corpus, const InstanceBank* bank,
              AugmentConfig cfg, size_t batch_size, RngStream order_rng,
              RngStream augment_rng, int jobs = 1);

  std::span<const Sample> corpus() const { return corpus_; }
  bool augmenting() const { return bank_ != nullptr; }
  size_t batches_per_epoch() const;
  std::vector<size_t> batch_indices(size_t epoch, size_t batch) const;
  PairwiseBatch batch(size_t epoch, size_t batch) const;

 private:
  std::span<const Sample> corpus_;
  const InstanceBank* bank_;
  AugmentConfig cfg_;
  size_t batch_size_;
  RngStream order_rng_;
  RngStream augment_rng_;
  int jobs_;
};

template <typename Model>
struct RoundArtifacts {
  int round = 0;
  Model model;
  std::optional<InstanceBank> bank;
};

// Round 0 trains without augmentation. Round r >= 1 harvests a fresh bank
// from the round r-1 model's predicted masks and trains with it.
//   train(const InstanceBank* bank, int round) -> Model
//   predict(const Model&, const Sample&) -> Mask
template <typename Model, typename TrainFn, typename PredictFn>
std::vector<RoundArtifacts<Model>> run_rounds(std::span<const Sample> corpus,
                                              int rounds, TrainFn&& train,
                                              PredictFn&& predict,
                                              const HarvestCriteria& crit,
                                              int jobs = 1) {
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  std::vector<RoundArtifacts<Model>> out;
  out.push_back({0, train(static_cast<const InstanceBank*>(nullptr), 0),
                 std::nullopt});
  for (int r = 1; r <= rounds; ++r) {
    const Model& previous = out.back().model;
    std::vector<Mask> predicted(corpus.size());
    parallel_for(corpus.size(), jobs, [&](size_t i) {
      predicted[i] = predict(previous, corpus[i]);
    });
    std::optional<InstanceBank> bank;
    try {
      bank = harvest(corpus, predicted, crit,
                     "round-" + std::to_string(r - 1) + "-predictions", jobs);
    } catch (const EmptyBankError& e) {
      throw EmptyBankError("round " + std::to_string(r) + ": " + e.what());
    }
    Model model = train(&*bank, r);
    out.push_back({r, std::move(model), std::move(bank)});
  }
  return out;
}

}  // namespace cdaug

#endif  // CDAUG_AUGMENTOR_H_
