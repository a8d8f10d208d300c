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


#ifndef CDAUG_EXPERIMENT_H_
#define CDAUG_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdaug/augmentor.h"
#include "cdaug/harvester.h"
#include "cdaug/synthgen.h"
#include "cdaug/toycam.h"

namespace cdaug {

// A named JSON merge patch over the serialized ExperimentConfig. `axis`
// groups overrides into one comparison table.
struct SweepOverride {
  std::string axis;
  std::string name;
  nlohmann::json patch;

  bool operator==(const SweepOverride&) const = default;
};

struct ExperimentConfig {
  SynthConfig synth;
  HarvestCriteria harvest;
  AugmentConfig augment;
  ModelConfig model;
  // Harvest-then-train cycles after the baseline; 0 makes the CDA arm the
  // baseline itself.
  int rounds = 1;
  size_t train_size = 2000;
  size_t eval_size = 500;
  uint64_t seed = 7;
  std::vector<SweepOverride> sweep;

  // Validates every section; throws ConfigError naming the field.
  void validate() const;
};

struct BankSummary {
  size_t size = 0;
  std::map<int, size_t> per_category;
  HarvestProvenance provenance;
};

struct ArmMetrics {
  double miou = 0.0;
  std::map<int, std::optional<double>> per_class_iou;  // 0 = background
  // Mean over (eval image, labeled category) of the share of CAM heatmap
  // mass lying on ground-truth background pixels.
  double background_activation = 0.0;
  std::map<int, double> per_class_ap;
};

struct RoundReport {
  int round = 0;
  ArmMetrics metrics;
  TrainReport training;
  ToyModel model;
  std::optional<BankSummary> bank;  // absent for round 0
};

struct ExperimentReport {
  nlohmann::json config;  // echo of the effective configuration
  std::vector<std::string> category_names;
  // rounds[0] is the baseline arm, rounds.back() the CDA arm.
  std::vector<RoundReport> rounds;

  const RoundReport& baseline() const { return rounds.front(); }
  const RoundReport& cda() const { return rounds.back(); }
};

struct RunOptions {
  int jobs = 1;
  // When set, predicted masks, heatmaps and ground truth of the eval corpus
  // are written below this directory for both arms.
  std::optional<std::filesystem::path> dump_dir;
};

// Evaluates thresholded-CAM masks of `model` against the ground truth of
// `eval` (every sample needs gt_mask).
ArmMetrics evaluate_model(const ToyModel& model, std::span<const Sample> eval,
                          double tau, int jobs = 1);

// Writes <dir>/masks/<id>.png and <dir>/cam/<id>_<category>.png for every
// sample of `eval`.
void dump_predictions(const std::filesystem::path& dir, const ToyModel& model,
                      std::span<const Sample> eval, double tau, int jobs = 1);

// Baseline arm (no augmentation) and CDA arm (harvest from the previous
// round's pseudo-masks, then pairwise augmented training from scratch) on
// the same generated corpora. Deterministic given cfg.seed.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const RunOptions& opts = {});

struct SweepResult {
  std::vector<SweepOverride> overrides;
  std::vector<ExperimentReport> reports;  // same order as overrides
};

// One experiment per override, all sharing the base seed. Arms that do not
// depend on the augmentation knobs are computed once and reused. Throws
// ConfigError on an empty override list.
SweepResult run_sweep(const ExperimentConfig& base,
                      std::span<const SweepOverride> overrides,
                      const RunOptions& opts = {});

// The four ablation axes: pasted-object count x same-category, pairwise
// on/off, pasting-method toggles, retraining rounds.
std::vector<SweepOverride> standard_ablation();

// Applies `patch` to the serialized config and parses the result strictly.
ExperimentConfig apply_override(const ExperimentConfig& base,
                                const SweepOverride& override);

nlohmann::json report_to_json(const ExperimentReport& report);
nlohmann::json sweep_to_json(const SweepResult& result);
// Plain-text summary of both arms.
std::string format_report(const ExperimentReport& report);
// One comparison table per axis, axes in first-appearance order.
std::string format_sweep_tables(const SweepResult& result);

}  // namespace cdaug

#endif  // CDAUG_EXPERIMENT_H_
