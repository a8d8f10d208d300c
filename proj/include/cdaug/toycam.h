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

#ifndef CDAUG_TOYCAM_H_
#define CDAUG_TOYCAM_H_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cdaug/augmentor.h"
#include "cdaug/raster.h"
#include "cdaug/types.h"

namespace cdaug {

// Per-pixel handcrafted features, in channel order.
enum FeatureChannel {
  kRed,
  kGreen,
  kBlue,
  kGray,
  kGradX,
  kGradY,
  kLocalMean,
  kLocalVariance,
  kFeatureCount
};

using FeatureMap = Raster<double>;
using ScoreMap = Raster<double>;

// Gray is the channel mean; gradients are absolute central differences of
// gray; mean and variance are over the 3x3 gray neighborhood. Borders clamp.
FeatureMap extract_features(const Image& image);
// Spatial mean of every feature channel.
std::vector<double> pooled_features(const FeatureMap& features);
// Per-channel feature sums over `region` of the full-image feature map,
// computed without materializing the whole map.
std::vector<double> feature_sums(const Image& image, const Box& region);

struct ModelConfig {
  double step_size = 0.1;
  int epochs = 30;
  int batch_size = 16;
  double cam_threshold = 0.5;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Linear per-pixel scorer over features followed by global average pooling.
// Row c-1 of `weights` scores category c.
struct ToyModel {
  int num_categories = 0;
  int feature_dim = kFeatureCount;
  std::vector<double> weights;  // num_categories x feature_dim, row-major
  std::vector<double> bias;     // num_categories

  static ToyModel zeros(int num_categories, int feature_dim = kFeatureCount);
  double& weight(int row, int k) { return weights[row * feature_dim + k]; }
  double weight(int row, int k) const { return weights[row * feature_dim + k]; }

  bool operator==(const ToyModel&) const = default;
};

struct ForwardResult {
  std::vector<ScoreMap> score_maps;  // index c-1 for category c
  std::vector<double> logits;
};

// Throws ShapeError when the feature depth differs from the model's.
ForwardResult forward(const ToyModel& model, const FeatureMap& features);
std::vector<double> logits_from_pooled(const ToyModel& model,
                                       std::span<const double> pooled);

struct Gradients {
  std::vector<double> weights;
  std::vector<double> bias;
};

struct LossAndGrad {
  double loss = 0.0;
  Gradients grads;
};

// Sum over categories of binary cross-entropy between sigmoid(logit) and
// label membership, with analytic gradients.
LossAndGrad loss_and_grad(const ToyModel& model, const FeatureMap& features,
                          const LabelSet& labels);
LossAndGrad loss_and_grad_pooled(const ToyModel& model,
                                 std::span<const double> pooled,
                                 const LabelSet& labels);

struct TrainReport {
  std::vector<double> epoch_losses;  // mean per-entry loss
  std::vector<double> per_class_ap;  // filled by evaluation
  size_t entries_seen = 0;
  size_t augmented_entries = 0;
  size_t skipped_augmentations = 0;
};

struct TrainResult {
  ToyModel model;
  TrainReport report;
};

// Plain gradient descent from zero weights. Each batch step uses the equally
// weighted mean of the per-entry losses. Throws TrainingError on a non-finite
// loss.
TrainResult train(const BatchStream& stream, const ModelConfig& cfg,
                  int num_categories, int jobs = 1);

// Class score map min-max normalized to [0,1]; a constant map gives zeros.
Image cam(const ToyModel& model, const Image& image, int category);
Image normalize_min_max(const ScoreMap& scores);

// Category where heatmap >= tau, background elsewhere.
Mask cam_to_mask(const Image& heatmap, double tau, int category);

// Pseudo-mask over several labeled categories: each pixel takes the labeled
// category with the highest heatmap value when it reaches tau.
Mask predict_mask(const ToyModel& model, const Image& image,
                  const LabelSet& labels, double tau);

struct IouResult {
  double mean = 0.0;
  // IoU per evaluated category; nullopt when absent from prediction and
  // ground truth alike.
  std::map<int, std::optional<double>> per_class;
};

// Accumulates intersections and unions over many mask pairs.
class IouAccumulator {
 public:
  void add(const Mask& pred, const Mask& gt);
  // Mean over `categories` plus background of classes present in either.
  IouResult result(const LabelSet& categories) const;

 private:
  std::array<size_t, 256> intersection_{};
  std::array<size_t, 256> pred_count_{};
  std::array<size_t, 256> gt_count_{};
};

IouResult miou(const Mask& pred, const Mask& gt, const LabelSet& categories);

// Mean precision at the rank of every positive, scores sorted descending
// (ties broken by index). Returns 0 when there are no positives.
double average_precision(std::span<const double> scores,
                         const std::vector<bool>& positive);

}  // namespace cdaug

#endif  // CDAUG_TOYCAM_H_
