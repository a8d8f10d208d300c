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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "cdaug/augmentor.h"
#include "cdaug/errors.h"
#include "cdaug/synthgen.h"
#include "cdaug/toycam.h"
#include "oracles.h"
#include "test_util.h"

namespace cdaug {
namespace {

using testing::random_image;

Image solid(int w, int h, float r, float g, float b) {
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
  }
  return img;
}

ToyModel random_model(int categories, RngStream& rng) {
  ToyModel m = ToyModel::zeros(categories);
  for (double& w : m.weights) w = rng.normal();
  for (double& b : m.bias) b = rng.normal();
  return m;
}

TEST(FeaturesTest, ConstantGrayHasNoGradientOrVariance) {
  const FeatureMap f = extract_features(solid(7, 5, 0.4f, 0.4f, 0.4f));
  ASSERT_EQ(f.channels(), kFeatureCount);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 7; ++x) {
      EXPECT_EQ(f.at(x, y, kGradX), 0.0);
      EXPECT_EQ(f.at(x, y, kGradY), 0.0);
      EXPECT_NEAR(f.at(x, y, kLocalVariance), 0.0, 1e-15);
      EXPECT_NEAR(f.at(x, y, kGray), 0.4, 1e-7);
      EXPECT_NEAR(f.at(x, y, kLocalMean), 0.4, 1e-7);
    }
  }
}

TEST(FeaturesTest, PureRedPassesChannelsThrough) {
  const FeatureMap f = extract_features(solid(4, 4, 1, 0, 0));
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      EXPECT_EQ(f.at(x, y, kRed), 1.0);
      EXPECT_EQ(f.at(x, y, kGreen), 0.0);
      EXPECT_EQ(f.at(x, y, kBlue), 0.0);
    }
  }
}

TEST(FeaturesTest, VerticalStepEdgePeaksOnTheEdge) {
  // Columns 0..4 black, 5..9 white: gray jumps by 1 between x=4 and x=5.
  Image img = solid(10, 6, 0, 0, 0);
  for (int y = 0; y < 6; ++y) {
    for (int x = 5; x < 10; ++x) {
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 1.0f;
    }
  }
  const FeatureMap f = extract_features(img);
  for (int y = 0; y < 6; ++y) {
    EXPECT_DOUBLE_EQ(f.at(4, y, kGradX), 0.5);
    EXPECT_DOUBLE_EQ(f.at(5, y, kGradX), 0.5);
    EXPECT_EQ(f.at(0, y, kGradX), 0.0);
    EXPECT_EQ(f.at(9, y, kGradX), 0.0);
    EXPECT_EQ(f.at(4, y, kGradY), 0.0);
  }
  double peak = 0;
  for (int x = 0; x < 10; ++x) peak = std::max(peak, f.at(x, 2, kGradX));
  EXPECT_EQ(peak, 0.5);
}

TEST(FeaturesTest, RegionSumsMatchTheFullMap) {
  RngStream rng(3);
  const Image img = random_image(13, 9, 3, rng);
  const FeatureMap f = extract_features(img);
  const Box region{2, 1, 7, 6};
  const auto sums = feature_sums(img, region);
  for (int k = 0; k < kFeatureCount; ++k) {
    double expect = 0;
    for (int y = 1; y < 7; ++y) {
      for (int x = 2; x < 9; ++x) expect += f.at(x, y, k);
    }
    EXPECT_NEAR(sums[k], expect, 1e-12);
  }
}

TEST(ForwardTest, ZeroModelGivesZeroScores) {
  RngStream rng(1);
  const auto r =
      forward(ToyModel::zeros(3), extract_features(random_image(5, 5, 3, rng)));
  ASSERT_EQ(r.score_maps.size(), 3u);
  for (const auto& s : r.score_maps) {
    for (double v : s.data()) EXPECT_EQ(v, 0.0);
  }
  for (double l : r.logits) EXPECT_EQ(l, 0.0);
}

TEST(ForwardTest, LogitsAreSpatialMeans) {
  RngStream rng(2);
  const ToyModel m = random_model(4, rng);
  const auto r = forward(m, extract_features(random_image(9, 7, 3, rng)));
  for (int c = 0; c < 4; ++c) {
    double sum = 0;
    for (double v : r.score_maps[c].data()) sum += v;
    EXPECT_NEAR(r.logits[c], sum / 63.0, 1e-12);
  }
}

TEST(ForwardTest, DoublingParametersDoublesLogits) {
  RngStream rng(4);
  const ToyModel m = random_model(4, rng);
  ToyModel twice = m;
  for (double& w : twice.weights) w *= 2;
  for (double& b : twice.bias) b *= 2;
  const FeatureMap f = extract_features(random_image(6, 6, 3, rng));
  const auto a = forward(m, f).logits;
  const auto b = forward(twice, f).logits;
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(b[c], 2 * a[c], 1e-12);
}

TEST(ForwardTest, DepthMismatchIsAShapeError) {
  EXPECT_THROW(forward(ToyModel::zeros(2), FeatureMap(3, 3, 5)), ShapeError);
}

TEST(LossTest, ZeroLogitsCostLnTwoPerCategory) {
  RngStream rng(5);
  const FeatureMap f = extract_features(random_image(4, 4, 3, rng));
  for (const LabelSet& labels : {LabelSet{}, LabelSet{2}, LabelSet{1, 2, 3, 4}}) {
    EXPECT_NEAR(loss_and_grad(ToyModel::zeros(4), f, labels).loss,
                4 * std::numbers::ln2, 1e-12);
  }
}

TEST(LossTest, LargePositiveLogitsForAllLabelsApproachZero) {
  const FeatureMap f = extract_features(solid(3, 3, 0.5f, 0.5f, 0.5f));
  ToyModel m = ToyModel::zeros(3);
  double previous = loss_and_grad(m, f, LabelSet{1, 2, 3}).loss;
  for (double bias : {1.0, 5.0, 20.0, 60.0}) {
    for (double& b : m.bias) b = bias;
    const double loss = loss_and_grad(m, f, LabelSet{1, 2, 3}).loss;
    EXPECT_LT(loss, previous);
    EXPECT_GE(loss, 0.0);
    previous = loss;
  }
  EXPECT_LT(previous, 1e-20);
}

TEST(LossTest, AnalyticGradientsMatchFiniteDifferences) {
  EXPECT_LT(testing::max_gradient_relative_error(25, RngStream(11)), 1e-4);
}

TEST(LossTest, PooledAndFullFormsAgree) {
  RngStream rng(6);
  const ToyModel m = random_model(4, rng);
  const FeatureMap f = extract_features(random_image(8, 8, 3, rng));
  const auto full = loss_and_grad(m, f, LabelSet{1, 3});
  const auto pooled = loss_and_grad_pooled(m, pooled_features(f), LabelSet{1, 3});
  EXPECT_NEAR(full.loss, pooled.loss, 1e-12);
  for (size_t k = 0; k < full.grads.weights.size(); ++k) {
    EXPECT_NEAR(full.grads.weights[k], pooled.grads.weights[k], 1e-12);
  }
}

std::vector<Sample> tiny_corpus(size_t n) {
  SynthConfig cfg;
  cfg.image_size = 24;
  return gen_corpus(cfg, n, 21, 1);
}

TEST(TrainTest, ZeroStepLeavesModelUnchanged) {
  const auto corpus = tiny_corpus(1);
  ModelConfig cfg;
  cfg.step_size = 0.0;
  cfg.epochs = 1;
  cfg.batch_size = 1;
  BatchStream stream(corpus, nullptr, AugmentConfig{}, 1, RngStream(1),
                     RngStream(2));
  EXPECT_EQ(train(stream, cfg, 4).model, ToyModel::zeros(4));
}

TEST(TrainTest, LossDecreasesOverEpochs) {
  const auto corpus = tiny_corpus(200);
  ModelConfig cfg;
  BatchStream stream(corpus, nullptr, AugmentConfig{}, cfg.batch_size,
                     RngStream(1), RngStream(2));
  const TrainReport report = train(stream, cfg, 4).report;
  ASSERT_EQ(report.epoch_losses.size(), 30u);
  EXPECT_LE(report.epoch_losses.back(), report.epoch_losses.front());
  for (double l : report.epoch_losses) {
    EXPECT_TRUE(std::isfinite(l));
    EXPECT_GE(l, 0.0);
  }
  EXPECT_EQ(report.entries_seen, 30u * 200u);
}

TEST(TrainTest, PairwiseTrainingIsDeterministicAcrossJobCounts) {
  const auto corpus = tiny_corpus(64);
  std::vector<ObjectInstance> instances;
  for (int c = 1; c <= 4; ++c) {
    instances.push_back(testing::solid_instance(6, 6, c, 0.25f * c, 0.5f, 0.1f));
  }
  const InstanceBank bank(std::move(instances), HarvestProvenance{});
  ModelConfig cfg;
  cfg.epochs = 3;
  auto run = [&](int jobs) {
    BatchStream stream(corpus, &bank, AugmentConfig{}, cfg.batch_size,
                       RngStream(1), RngStream(2));
    return train(stream, cfg, 4, jobs);
  };
  const TrainResult a = run(1);
  const TrainResult b = run(1);
  const TrainResult c = run(4);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.model, c.model);
  EXPECT_EQ(a.report.epoch_losses, c.report.epoch_losses);
  EXPECT_GT(a.report.augmented_entries, 0u);
}

TEST(TrainTest, AugmentedPatchedPoolingMatchesFullExtraction) {
  // One step from zeros with batch = whole corpus: the update equals the mean
  // gradient computed from freshly extracted features.
  const auto corpus = tiny_corpus(4);
  const InstanceBank bank({testing::solid_instance(5, 5, 1, 0.9f, 0.1f, 0.1f),
                           testing::solid_instance(5, 5, 2, 0.1f, 0.9f, 0.1f),
                           testing::solid_instance(5, 5, 3, 0.1f, 0.1f, 0.9f),
                           testing::solid_instance(5, 5, 4, 0.9f, 0.9f, 0.1f)},
                          HarvestProvenance{});
  ModelConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  BatchStream stream(corpus, &bank, AugmentConfig{}, 4, RngStream(1),
                     RngStream(2));
  const ToyModel trained = train(stream, cfg, 4).model;
  const PairwiseBatch batch = stream.batch(0, 0);
  const ToyModel zero = ToyModel::zeros(4);
  std::vector<double> grad(zero.weights.size(), 0.0);
  for (const BatchEntry& e : batch.entries) {
    const auto g =
        loss_and_grad(zero, extract_features(e.sample.image), e.sample.labels);
    for (size_t k = 0; k < grad.size(); ++k) grad[k] += g.grads.weights[k];
  }
  for (size_t k = 0; k < grad.size(); ++k) {
    EXPECT_NEAR(trained.weights[k],
                -cfg.step_size * grad[k] / batch.entries.size(), 1e-12);
  }
}

TEST(CamTest, ConstantScoreMapGivesZeros) {
  ToyModel m = ToyModel::zeros(2);
  m.bias[0] = 3.0;
  RngStream rng(1);
  const Image h = cam(m, random_image(5, 5, 3, rng), 1);
  for (float v : h.data()) EXPECT_EQ(v, 0.0f);
}

TEST(CamTest, BoundsAndArgmaxArePreserved) {
  RngStream rng(8);
  for (int t = 0; t < 20; ++t) {
    const ToyModel m = random_model(3, rng);
    const Image img = random_image(11, 9, 3, rng);
    const int c = 1 + t % 3;
    const Image h = cam(m, img, c);
    const auto scores = forward(m, extract_features(img)).score_maps[c - 1];
    const auto [lo, hi] = std::minmax_element(h.data().begin(), h.data().end());
    EXPECT_EQ(*lo, 0.0f);
    EXPECT_EQ(*hi, 1.0f);
    const auto raw_max =
        std::max_element(scores.data().begin(), scores.data().end());
    EXPECT_EQ(h.data()[raw_max - scores.data().begin()], 1.0f);
  }
}

TEST(CamTest, CategoryOutsideModelIsRejected) {
  RngStream rng(1);
  EXPECT_THROW(cam(ToyModel::zeros(2), random_image(3, 3, 3, rng), 3),
               ConfigError);
}

TEST(CamToMaskTest, ThresholdExtremes) {
  RngStream rng(9);
  const Image h = random_image(8, 8, 1, rng);
  const Mask all = cam_to_mask(h, 0.0, 2);
  const Mask none = cam_to_mask(h, 1.0 + 1e-9, 2);
  for (uint8_t v : all.data()) EXPECT_EQ(v, 2);
  for (uint8_t v : none.data()) EXPECT_EQ(v, kBackground);
}

TEST(CamToMaskTest, MasksNestAcrossThresholds) {
  RngStream rng(10);
  const std::vector<double> taus{0.0, 0.1, 0.25, 0.5, 0.5, 0.75, 0.9, 1.0};
  for (int t = 0; t < 100; ++t) {
    EXPECT_EQ(testing::nesting_violations(random_image(10, 10, 1, rng), taus),
              0u);
  }
}

TEST(PredictMaskTest, SingleLabelMatchesCamThreshold) {
  RngStream rng(12);
  const ToyModel m = random_model(3, rng);
  const Image img = random_image(9, 9, 3, rng);
  EXPECT_EQ(predict_mask(m, img, LabelSet{2}, 0.5),
            cam_to_mask(cam(m, img, 2), 0.5, 2));
  EXPECT_EQ(predict_mask(m, img, LabelSet{}, 0.5), Mask(9, 9, 1, kBackground));
}

TEST(MiouTest, AllBackgroundAgainstHalfForegroundIsAQuarter) {
  const Mask pred(10, 10, 1, kBackground);
  const Mask gt = testing::rect_mask(10, 10, Box{0, 0, 5, 10}, 1);
  const IouResult r = miou(pred, gt, LabelSet{1});
  EXPECT_DOUBLE_EQ(r.mean, 0.25);
  EXPECT_DOUBLE_EQ(*r.per_class.at(0), 0.5);
  EXPECT_DOUBLE_EQ(*r.per_class.at(1), 0.0);
}

TEST(MiouTest, IdentityScoresOne) {
  RngStream rng(13);
  const Mask m = testing::random_mask(12, 12, 3, rng);
  EXPECT_DOUBLE_EQ(miou(m, m, LabelSet{1, 2, 3}).mean, 1.0);
}

TEST(MiouTest, AbsentClassesAreExcluded) {
  const Mask m = testing::rect_mask(6, 6, Box{1, 1, 2, 2}, 1);
  const IouResult r = miou(m, m, LabelSet{1, 2});
  EXPECT_FALSE(r.per_class.at(2).has_value());
  EXPECT_DOUBLE_EQ(r.mean, 1.0);
}

TEST(MiouTest, MatchesConfusionMatrixOracle) {
  RngStream rng(14);
  for (int t = 0; t < 50; ++t) {
    const int w = 5 + t % 11;
    const int h = 4 + t % 7;
    const Mask pred = testing::random_mask(w, h, 4, rng);
    const Mask gt = testing::random_mask(w, h, 4, rng);
    const LabelSet cats{1, 2, 3, 4};
    const double got = miou(pred, gt, cats).mean;
    EXPECT_NEAR(got, testing::confusion_matrix_miou(pred, gt, cats), 1e-12);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 1.0);
    EXPECT_DOUBLE_EQ(got, miou(gt, pred, cats).mean);
  }
}

TEST(MiouTest, InvariantToCategoryRelabeling) {
  RngStream rng(15);
  const Mask pred = testing::random_mask(9, 9, 3, rng);
  const Mask gt = testing::random_mask(9, 9, 3, rng);
  auto swap12 = [](Mask m) {
    for (uint8_t& v : m.data()) v = v == 1 ? 2 : v == 2 ? 1 : v;
    return m;
  };
  EXPECT_NEAR(miou(pred, gt, LabelSet{1, 2, 3}).mean,
              miou(swap12(pred), swap12(gt), LabelSet{1, 2, 3}).mean, 1e-15);
}

TEST(MiouTest, SizeMismatchIsAShapeError) {
  EXPECT_THROW(miou(Mask(3, 3, 1), Mask(3, 4, 1), LabelSet{}), ShapeError);
}

TEST(AveragePrecisionTest, KnownRankings) {
  const std::vector<double> scores{0.9, 0.8, 0.7, 0.6};
  EXPECT_DOUBLE_EQ(average_precision(scores, {true, true, false, false}), 1.0);
  // Positives at ranks 2 and 4: (1/2 + 2/4) / 2.
  EXPECT_DOUBLE_EQ(average_precision(scores, {false, true, false, true}), 0.5);
  EXPECT_DOUBLE_EQ(average_precision(scores, {false, false, false, false}), 0.0);
  EXPECT_THROW(average_precision(scores, {true}), ShapeError);
}

}  // namespace
}  // namespace cdaug
