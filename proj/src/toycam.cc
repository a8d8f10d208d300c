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

#include "cdaug/toycam.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdaug/errors.h"
#include "cdaug/parallel.h"

namespace cdaug {
namespace {

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

ScoreMap score_map(const ToyModel& model, const FeatureMap& f, int row) {
  ScoreMap out(f.width(), f.height(), 1);
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      double s = model.bias[row];
      for (int k = 0; k < model.feature_dim; ++k) {
        s += model.weight(row, k) * f.at(x, y, k);
      }
      out.at(x, y) = s;
    }
  }
  return out;
}

void check_depth(const ToyModel& model, const FeatureMap& f) {
  if (f.channels() != model.feature_dim) {
    throw ShapeError("feature depth " + std::to_string(f.channels()) +
                     " does not match model depth " +
                     std::to_string(model.feature_dim));
  }
}

// Gray values for `region` grown by one pixel, with border clamping.
class GrayWindow {
 public:
  GrayWindow(const Image& image, const Box& region)
      : x0_(region.x0 - 1), y0_(region.y0 - 1), w_(region.width + 2),
        h_(region.height + 2), gray_(static_cast<size_t>(w_) * h_) {
    for (int j = 0; j < h_; ++j) {
      const int y = std::clamp(y0_ + j, 0, image.height() - 1);
      for (int i = 0; i < w_; ++i) {
        const int x = std::clamp(x0_ + i, 0, image.width() - 1);
        gray_[static_cast<size_t>(j) * w_ + i] =
            (double{image.at(x, y, 0)} + image.at(x, y, 1) +
             image.at(x, y, 2)) /
            3.0;
      }
    }
  }
  double operator()(int x, int y) const {
    return gray_[static_cast<size_t>(y - y0_) * w_ + (x - x0_)];
  }

 private:
  int x0_, y0_, w_, h_;
  std::vector<double> gray_;
};

void pixel_features(const Image& image, const GrayWindow& g, int x, int y,
                    double* out) {
  out[kRed] = image.at(x, y, 0);
  out[kGreen] = image.at(x, y, 1);
  out[kBlue] = image.at(x, y, 2);
  out[kGray] = g(x, y);
  out[kGradX] = std::abs(g(x + 1, y) - g(x - 1, y)) / 2.0;
  out[kGradY] = std::abs(g(x, y + 1) - g(x, y - 1)) / 2.0;
  double sum = 0.0;
  double sq = 0.0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const double v = g(x + dx, y + dy);
      sum += v;
      sq += v * v;
    }
  }
  const double mean = sum / 9.0;
  out[kLocalMean] = mean;
  out[kLocalVariance] = std::max(0.0, sq / 9.0 - mean * mean);
}

}  // namespace

FeatureMap extract_features(const Image& image) {
  if (image.channels() != 3) throw ShapeError("features need a 3-channel image");
  FeatureMap f(image.width(), image.height(), kFeatureCount);
  if (f.empty()) return f;
  const GrayWindow gray(image, Box{0, 0, image.width(), image.height()});
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      pixel_features(image, gray, x, y, &f.at(x, y, 0));
    }
  }
  return f;
}

std::vector<double> feature_sums(const Image& image, const Box& region) {
  if (image.channels() != 3) throw ShapeError("features need a 3-channel image");
  std::vector<double> sums(kFeatureCount, 0.0);
  if (region.width < 1 || region.height < 1) return sums;
  const GrayWindow gray(image, region);
  double f[kFeatureCount];
  for (int y = region.y0; y < region.y0 + region.height; ++y) {
    for (int x = region.x0; x < region.x0 + region.width; ++x) {
      pixel_features(image, gray, x, y, f);
      for (int k = 0; k < kFeatureCount; ++k) sums[k] += f[k];
    }
  }
  return sums;
}

std::vector<double> pooled_features(const FeatureMap& features) {
  std::vector<double> pooled(features.channels(), 0.0);
  const size_t n = features.pixel_count();
  const auto data = features.data();
  for (size_t p = 0; p < n; ++p) {
    for (int k = 0; k < features.channels(); ++k) {
      pooled[k] += data[p * features.channels() + k];
    }
  }
  for (double& v : pooled) v /= static_cast<double>(n);
  return pooled;
}

void ModelConfig::validate() const {
  if (!(step_size >= 0.0)) throw ConfigError("model.step_size must be >= 0");
  if (epochs < 0) throw ConfigError("model.epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("model.batch_size must be >= 1");
  if (!(cam_threshold >= 0.0 && cam_threshold <= 1.0)) {
    throw ConfigError("model.cam_threshold must be in [0, 1]");
  }
}

ToyModel ToyModel::zeros(int num_categories, int feature_dim) {
  ToyModel m;
  m.num_categories = num_categories;
  m.feature_dim = feature_dim;
  m.weights.assign(static_cast<size_t>(num_categories) * feature_dim, 0.0);
  m.bias.assign(num_categories, 0.0);
  return m;
}

ForwardResult forward(const ToyModel& model, const FeatureMap& features) {
  check_depth(model, features);
  ForwardResult out;
  const double n = static_cast<double>(features.pixel_count());
  for (int row = 0; row < model.num_categories; ++row) {
    out.score_maps.push_back(score_map(model, features, row));
    double sum = 0.0;
    for (double s : out.score_maps.back().data()) sum += s;
    out.logits.push_back(sum / n);
  }
  return out;
}

std::vector<double> logits_from_pooled(const ToyModel& model,
                                       std::span<const double> pooled) {
  if (static_cast<int>(pooled.size()) != model.feature_dim) {
    throw ShapeError("pooled feature length does not match model depth");
  }
  std::vector<double> logits(model.num_categories);
  for (int row = 0; row < model.num_categories; ++row) {
    double z = model.bias[row];
    for (int k = 0; k < model.feature_dim; ++k) {
      z += model.weight(row, k) * pooled[k];
    }
    logits[row] = z;
  }
  return logits;
}

LossAndGrad loss_and_grad_pooled(const ToyModel& model,
                                 std::span<const double> pooled,
                                 const LabelSet& labels) {
  const std::vector<double> logits = logits_from_pooled(model, pooled);
  LossAndGrad out;
  out.grads.weights.assign(model.weights.size(), 0.0);
  out.grads.bias.assign(model.bias.size(), 0.0);
  for (int row = 0; row < model.num_categories; ++row) {
    const double y = labels.contains(row + 1) ? 1.0 : 0.0;
    const double z = logits[row];
    out.loss += softplus(z) - y * z;
    const double dz = sigmoid(z) - y;
    out.grads.bias[row] = dz;
    for (int k = 0; k < model.feature_dim; ++k) {
      out.grads.weights[row * model.feature_dim + k] = dz * pooled[k];
    }
  }
  return out;
}

LossAndGrad loss_and_grad(const ToyModel& model, const FeatureMap& features,
                          const LabelSet& labels) {
  check_depth(model, features);
  return loss_and_grad_pooled(model, pooled_features(features), labels);
}

TrainResult train(const BatchStream& stream, const ModelConfig& cfg,
                  int num_categories, int jobs) {
  cfg.validate();
  if (num_categories < 1) throw ConfigError("model needs >= 1 category");
  const auto corpus = stream.corpus();
  // Feature sums of every corpus image. An augmented entry only differs
  // inside its pasted boxes, so its sums are patched over those boxes grown
  // by the one-pixel feature footprint.
  std::vector<std::vector<double>> sums(corpus.size());
  std::vector<std::vector<double>> cached(corpus.size());
  parallel_for(corpus.size(), jobs, [&](size_t i) {
    const Image& img = corpus[i].image;
    sums[i] = feature_sums(img, Box{0, 0, img.width(), img.height()});
    cached[i] = sums[i];
    for (double& v : cached[i]) v /= static_cast<double>(img.pixel_count());
  });
  auto augmented_pooled = [&](const BatchEntry& e) {
    const Image& before = corpus[e.source_index].image;
    const Image& after = e.sample.image;
    if (!after.same_size(before)) {
      return pooled_features(extract_features(after));
    }
    int x0 = after.width(), y0 = after.height(), x1 = 0, y1 = 0;
    for (const PlacementRecord& r : e.placements) {
      x0 = std::min(x0, r.paste_x - 1);
      y0 = std::min(y0, r.paste_y - 1);
      x1 = std::max(x1, r.paste_x + r.width + 1);
      y1 = std::max(y1, r.paste_y + r.height + 1);
    }
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, after.width());
    y1 = std::min(y1, after.height());
    std::vector<double> pooled = sums[e.source_index];
    if (x1 > x0 && y1 > y0) {
      const Box region{x0, y0, x1 - x0, y1 - y0};
      const auto old_part = feature_sums(before, region);
      const auto new_part = feature_sums(after, region);
      for (size_t k = 0; k < pooled.size(); ++k) {
        pooled[k] += new_part[k] - old_part[k];
      }
    }
    for (double& v : pooled) v /= static_cast<double>(after.pixel_count());
    return pooled;
  };

  TrainResult result{ToyModel::zeros(num_categories), {}};
  ToyModel& model = result.model;
  TrainReport& report = result.report;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    size_t epoch_entries = 0;
    for (size_t b = 0; b < stream.batches_per_epoch(); ++b) {
      const PairwiseBatch batch = stream.batch(epoch, b);
      const size_t n = batch.entries.size();
      std::vector<LossAndGrad> terms(n);
      parallel_for(n, jobs, [&](size_t i) {
        const BatchEntry& e = batch.entries[i];
        if (e.augmented) {
          terms[i] = loss_and_grad_pooled(model, augmented_pooled(e),
                                          e.sample.labels);
        } else {
          terms[i] = loss_and_grad_pooled(model, cached[e.source_index],
                                          e.sample.labels);
        }
      });
      // Fixed-order reduction keeps results independent of `jobs`.
      Gradients total{std::vector<double>(model.weights.size(), 0.0),
                      std::vector<double>(model.bias.size(), 0.0)};
      for (const LossAndGrad& t : terms) {
        epoch_loss += t.loss;
        for (size_t k = 0; k < total.weights.size(); ++k) {
          total.weights[k] += t.grads.weights[k];
        }
        for (size_t k = 0; k < total.bias.size(); ++k) {
          total.bias[k] += t.grads.bias[k];
        }
        ++report.entries_seen;
      }
      for (const BatchEntry& e : batch.entries) {
        if (e.augmented) ++report.augmented_entries;
      }
      report.skipped_augmentations += batch.skipped;
      epoch_entries += n;
      const double scale = cfg.step_size / static_cast<double>(n);
      for (size_t k = 0; k < model.weights.size(); ++k) {
        model.weights[k] -= scale * total.weights[k];
      }
      for (size_t k = 0; k < model.bias.size(); ++k) {
        model.bias[k] -= scale * total.bias[k];
      }
    }
    const double mean_loss = epoch_loss / static_cast<double>(epoch_entries);
    if (!std::isfinite(mean_loss)) {
      throw TrainingError("loss diverged in epoch " + std::to_string(epoch));
    }
    report.epoch_losses.push_back(mean_loss);
  }
  return result;
}

Image normalize_min_max(const ScoreMap& scores) {
  Image out(scores.width(), scores.height(), 1, 0.0f);
  if (scores.empty()) return out;
  const auto [lo, hi] =
      std::minmax_element(scores.data().begin(), scores.data().end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (int y = 0; y < scores.height(); ++y) {
    for (int x = 0; x < scores.width(); ++x) {
      out.at(x, y) = static_cast<float>((scores.at(x, y) - *lo) / range);
    }
  }
  return out;
}

Image cam(const ToyModel& model, const Image& image, int category) {
  if (category < 1 || category > model.num_categories) {
    throw ConfigError("cam: category " + std::to_string(category) +
                      " outside the model");
  }
  const FeatureMap f = extract_features(image);
  check_depth(model, f);
  return normalize_min_max(score_map(model, f, category - 1));
}

Mask cam_to_mask(const Image& heatmap, double tau, int category) {
  Mask out(heatmap.width(), heatmap.height(), 1, kBackground);
  for (int y = 0; y < heatmap.height(); ++y) {
    for (int x = 0; x < heatmap.width(); ++x) {
      if (heatmap.at(x, y) >= tau) out.at(x, y) = static_cast<uint8_t>(category);
    }
  }
  return out;
}

Mask predict_mask(const ToyModel& model, const Image& image,
                  const LabelSet& labels, double tau) {
  Mask out(image.width(), image.height(), 1, kBackground);
  if (labels.empty()) return out;
  const FeatureMap f = extract_features(image);
  check_depth(model, f);
  std::vector<Image> heatmaps;
  for (int c : labels) {
    if (c > model.num_categories) {
      throw ConfigError("predict_mask: label " + std::to_string(c) +
                        " outside the model");
    }
    heatmaps.push_back(normalize_min_max(score_map(model, f, c - 1)));
  }
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      int best = kBackground;
      float best_value = -1.0f;
      size_t k = 0;
      for (int c : labels) {
        const float v = heatmaps[k++].at(x, y);
        if (v > best_value) {
          best_value = v;
          best = c;
        }
      }
      if (best_value >= tau) out.at(x, y) = static_cast<uint8_t>(best);
    }
  }
  return out;
}

void IouAccumulator::add(const Mask& pred, const Mask& gt) {
  if (!pred.same_size(gt) || pred.channels() != gt.channels()) {
    throw ShapeError("miou: prediction and ground truth sizes differ");
  }
  const auto p = pred.data();
  const auto g = gt.data();
  for (size_t i = 0; i < p.size(); ++i) {
    ++pred_count_[p[i]];
    ++gt_count_[g[i]];
    if (p[i] == g[i]) ++intersection_[p[i]];
  }
}

IouResult IouAccumulator::result(const LabelSet& categories) const {
  IouResult out;
  std::vector<int> classes{kBackground};
  classes.insert(classes.end(), categories.begin(), categories.end());
  double sum = 0.0;
  int present = 0;
  for (int c : classes) {
    const size_t uni = pred_count_[c] + gt_count_[c] - intersection_[c];
    if (uni == 0) {
      out.per_class[c] = std::nullopt;
      continue;
    }
    const double iou = static_cast<double>(intersection_[c]) / uni;
    out.per_class[c] = iou;
    sum += iou;
    ++present;
  }
  out.mean = present == 0 ? 0.0 : sum / present;
  return out;
}

IouResult miou(const Mask& pred, const Mask& gt, const LabelSet& categories) {
  IouAccumulator acc;
  acc.add(pred, gt);
  return acc.result(categories);
}

double average_precision(std::span<const double> scores,
                         const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) {
    throw ShapeError("average_precision: length mismatch");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  size_t hits = 0;
  double sum = 0.0;
  for (size_t rank = 0; rank < order.size(); ++rank) {
    if (!positive[order[rank]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / (rank + 1);
  }
  return hits == 0 ? 0.0 : sum / hits;
}

}  // namespace cdaug
