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


#include "cdaug/experiment.h"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <utility>

#include "cdaug/config.h"
#include "cdaug/errors.h"
#include "cdaug/formats.h"
#include "cdaug/parallel.h"
#include "cdaug/png_io.h"
#include "cdaug/rng.h"

namespace cdaug {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kReportVersion[] = "cdaug-report/1";

// Runs `fn`, re-raising a pipeline error with arm and stage context while
// keeping its kind.
template <typename Fn>
auto in_stage(const std::string& context, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), context + ": " + e.what());
  }
}

struct Corpora {
  std::vector<Sample> train;  // ground truth removed
  std::vector<Sample> eval;
};

Corpora make_corpora(const ExperimentConfig& cfg, int jobs) {
  const RngStream root(cfg.seed);
  Corpora c;
  c.train = gen_corpus(cfg.synth, cfg.train_size, root.child("train"), jobs);
  // Training sees image-level labels only; masks stay with evaluation.
  for (auto& s : c.train) s.gt_mask.reset();
  c.eval = gen_corpus(cfg.synth, cfg.eval_size, root.child("eval"), jobs);
  return c;
}

struct TrainedRound {
  TrainResult result;
  ArmMetrics metrics;
};

TrainedRound train_round(const ExperimentConfig& cfg, const Corpora& data,
                         const InstanceBank* bank, int round, int jobs) {
  const RngStream root(cfg.seed);
  BatchStream stream(data.train, bank, cfg.augment, cfg.model.batch_size,
                     root.child("order"), root.child("augment").child(round),
                     jobs);
  TrainedRound out;
  out.result = train(stream, cfg.model, cfg.synth.shape_categories, jobs);
  out.metrics =
      evaluate_model(out.result.model, data.eval, cfg.model.cam_threshold, jobs);
  out.result.report.per_class_ap.clear();
  for (const auto& [c, ap] : out.metrics.per_class_ap) {
    out.result.report.per_class_ap.push_back(ap);
  }
  return out;
}

BankSummary summarize(const InstanceBank& bank) {
  BankSummary s;
  s.size = bank.size();
  for (const auto& [c, idx] : bank.by_category()) s.per_category[c] = idx.size();
  s.provenance = bank.provenance();
  return s;
}

// Everything of a config that the baseline arm depends on.
std::string baseline_key(const ExperimentConfig& cfg) {
  return json{{"synth", to_json(cfg.synth)},
              {"model", to_json(cfg.model)},
              {"train_size", cfg.train_size},
              {"eval_size", cfg.eval_size},
              {"seed", cfg.seed}}
      .dump();
}

struct BaselineArtifacts {
  std::shared_ptr<const Corpora> data;
  std::shared_ptr<const TrainedRound> baseline;
};

BaselineArtifacts compute_baseline(const ExperimentConfig& cfg, int jobs) {
  BaselineArtifacts a;
  a.data = std::make_shared<const Corpora>(
      in_stage("corpus generation", [&] { return make_corpora(cfg, jobs); }));
  a.baseline = std::make_shared<const TrainedRound>(in_stage(
      "baseline arm, training",
      [&] { return train_round(cfg, *a.data, nullptr, 0, jobs); }));
  return a;
}

ExperimentReport run_with_baseline(const ExperimentConfig& cfg,
                                   const BaselineArtifacts& base,
                                   const RunOptions& opts) {
  const int jobs = opts.jobs;
  const Corpora& data = *base.data;
  const double tau = cfg.model.cam_threshold;

  ExperimentReport report;
  report.config = to_json(cfg);
  report.category_names = category_names(cfg.synth);
  report.rounds.push_back({0, base.baseline->metrics,
                           base.baseline->result.report,
                           base.baseline->result.model, std::nullopt});

  for (int r = 1; r <= cfg.rounds; ++r) {
    const std::string arm = "cda arm, round " + std::to_string(r);
    const ToyModel& previous = report.rounds.back().model;
    std::vector<Mask> predicted(data.train.size());
    in_stage(arm + ", pseudo-masks", [&] {
      parallel_for(data.train.size(), jobs, [&](size_t i) {
        predicted[i] = predict_mask(previous, data.train[i].image,
                                    data.train[i].labels, tau);
      });
    });
    const InstanceBank bank = in_stage(arm + ", harvest", [&] {
      return harvest(data.train, predicted, cfg.harvest,
                     "round-" + std::to_string(r - 1) + "-predictions", jobs);
    });
    TrainedRound trained = in_stage(arm + ", training", [&] {
      return train_round(cfg, data, &bank, r, jobs);
    });
    report.rounds.push_back({r, std::move(trained.metrics),
                             std::move(trained.result.report),
                             std::move(trained.result.model), summarize(bank)});
  }

  if (opts.dump_dir) {
    const fs::path dir = *opts.dump_dir;
    in_stage("dump", [&] {
      parallel_for(data.eval.size(), jobs, [&](size_t i) {
        const Sample& s = data.eval[i];
        write_mask_png(dir / "gt" / (s.id + ".png"), *s.gt_mask);
      });
      dump_predictions(dir / "baseline", report.baseline().model, data.eval,
                       tau, jobs);
      dump_predictions(dir / "cda", report.cda().model, data.eval, tau, jobs);
    });
  }
  return report;
}

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string name_of(const ExperimentReport& report, int category) {
  if (category >= 0 &&
      category < static_cast<int>(report.category_names.size())) {
    return report.category_names[category];
  }
  return std::to_string(category);
}

json metrics_to_json(const ExperimentReport& report, const ArmMetrics& m) {
  json iou = json::object();
  for (const auto& [c, v] : m.per_class_iou) {
    iou[name_of(report, c)] = optional_json(v);
  }
  json ap = json::object();
  for (const auto& [c, v] : m.per_class_ap) ap[name_of(report, c)] = v;
  return json{{"miou", m.miou},
              {"per_class_iou", iou},
              {"background_activation", m.background_activation},
              {"per_class_ap", ap}};
}

json bank_to_json(const ExperimentReport& report, const BankSummary& b) {
  json per_category = json::object();
  for (const auto& [c, n] : b.per_category) per_category[name_of(report, c)] = n;
  json rejected = json::object();
  for (size_t k = 0; k < kRejectReasonCount; ++k) {
    rejected[std::string(reason_name(static_cast<RejectReason>(k)))] =
        b.provenance.rejected[k];
  }
  return json{{"size", b.size},
              {"per_category", per_category},
              {"source_corpus", b.provenance.source_corpus},
              {"examined", b.provenance.examined},
              {"rejected", rejected}};
}

json model_params_to_json(const ToyModel& m) {
  json rows = json::array();
  for (int c = 0; c < m.num_categories; ++c) {
    rows.push_back(std::vector<double>(m.weights.begin() + c * m.feature_dim,
                                       m.weights.begin() + (c + 1) * m.feature_dim));
  }
  return json{{"weights", rows}, {"bias", m.bias}};
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// Expected direction of each ablation axis at full scale, stated over the
// CDA-arm mIoU of the named cells. Returns nullopt when cells are missing.
using CellMap = std::map<std::string, double>;
struct AxisTrend {
  std::string statement;
  std::function<std::optional<bool>(const CellMap&)> holds;
};

std::optional<bool> ordered(const CellMap& cells,
                            const std::vector<std::string>& descending) {
  for (const auto& n : descending) {
    if (!cells.count(n)) return std::nullopt;
  }
  for (size_t i = 1; i < descending.size(); ++i) {
    if (!(cells.at(descending[i - 1]) > cells.at(descending[i]))) return false;
  }
  return true;
}

const std::map<std::string, AxisTrend>& reference_trends() {
  static const auto* trends = new std::map<std::string, AxisTrend>{
      {"objects",
       {"fewer pasted objects is better; disjoint categories beat same-category",
        [](const CellMap& c) -> std::optional<bool> {
          auto a = ordered(c, {"objects=1,same=off", "objects=2,same=off",
                               "objects=3,same=off"});
          if (!a) return std::nullopt;
          bool ok = *a;
          for (int n = 1; n <= 3; ++n) {
            auto b = ordered(c, {"objects=" + std::to_string(n) + ",same=off",
                                 "objects=" + std::to_string(n) + ",same=on"});
            if (!b) return std::nullopt;
            ok = ok && *b;
          }
          return ok;
        }}},
      {"pairwise",
       {"pairwise batches beat unpaired augmented batches",
        [](const CellMap& c) { return ordered(c, {"pairwise=on", "pairwise=off"}); }}},
      {"pasting",
       {"rescale+rotation is the best pasting method; gaussian smoothing does "
        "not help",
        [](const CellMap& c) -> std::optional<bool> {
          const std::string best = "rescale+rotation";
          if (!c.count(best) || c.size() < 2) return std::nullopt;
          for (const auto& [name, v] : c) {
            if (name != best && !(c.at(best) > v)) return false;
          }
          return true;
        }}},
      {"rounds",
       {"a retraining round beats the baseline; two rounds are best",
        [](const CellMap& c) {
          return ordered(c, {"rounds=2", "rounds=1", "rounds=0"});
        }}},
  };
  return *trends;
}

}  // namespace

void ExperimentConfig::validate() const {
  synth.validate();
  harvest.validate();
  augment.validate();
  model.validate();
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  if (train_size < 1) throw ConfigError("train_size must be >= 1");
  if (eval_size < 1) throw ConfigError("eval_size must be >= 1");
}

ArmMetrics evaluate_model(const ToyModel& model, std::span<const Sample> eval,
                          double tau, int jobs) {
  struct PerSample {
    Mask pred;
    double bg_share_sum = 0.0;
    size_t bg_share_count = 0;
    std::vector<double> logits;
  };
  std::vector<PerSample> per(eval.size());
  parallel_for(eval.size(), jobs, [&](size_t i) {
    const Sample& s = eval[i];
    if (!s.gt_mask) {
      throw ShapeError("evaluation sample '" + s.id + "' has no gt_mask");
    }
    PerSample& out = per[i];
    out.pred = predict_mask(model, s.image, s.labels, tau);
    for (int c : s.labels) {
      const Image heat = cam(model, s.image, c);
      double total = 0.0, on_background = 0.0;
      for (int y = 0; y < heat.height(); ++y) {
        for (int x = 0; x < heat.width(); ++x) {
          total += heat.at(x, y);
          if (s.gt_mask->at(x, y) == kBackground) on_background += heat.at(x, y);
        }
      }
      // A constant score map carries no spatial evidence and is skipped.
      if (total > 0.0) {
        out.bg_share_sum += on_background / total;
        ++out.bg_share_count;
      }
    }
    out.logits = logits_from_pooled(
        model, pooled_features(extract_features(s.image)));
  });

  ArmMetrics m;
  IouAccumulator acc;
  double share_sum = 0.0;
  size_t share_count = 0;
  for (size_t i = 0; i < eval.size(); ++i) {
    acc.add(per[i].pred, *eval[i].gt_mask);
    share_sum += per[i].bg_share_sum;
    share_count += per[i].bg_share_count;
  }
  LabelSet categories;
  for (int c = 1; c <= model.num_categories; ++c) categories.insert(c);
  IouResult iou = acc.result(categories);
  m.miou = iou.mean;
  m.per_class_iou = std::move(iou.per_class);
  m.background_activation =
      share_count > 0 ? share_sum / static_cast<double>(share_count) : 0.0;
  for (int c = 1; c <= model.num_categories; ++c) {
    std::vector<double> scores(eval.size());
    std::vector<bool> positive(eval.size());
    for (size_t i = 0; i < eval.size(); ++i) {
      scores[i] = per[i].logits[c - 1];
      positive[i] = eval[i].labels.contains(c);
    }
    m.per_class_ap[c] = average_precision(scores, positive);
  }
  return m;
}

void dump_predictions(const fs::path& dir, const ToyModel& model,
                      std::span<const Sample> eval, double tau, int jobs) {
  parallel_for(eval.size(), jobs, [&](size_t i) {
    const Sample& s = eval[i];
    write_mask_png(dir / "masks" / (s.id + ".png"),
                   predict_mask(model, s.image, s.labels, tau));
    for (int c : s.labels) {
      write_gray_png(dir / "cam" / (s.id + "_" + std::to_string(c) + ".png"),
                     cam(model, s.image, c));
    }
  });
}

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const RunOptions& opts) {
  cfg.validate();
  return run_with_baseline(cfg, compute_baseline(cfg, opts.jobs), opts);
}

ExperimentConfig apply_override(const ExperimentConfig& base,
                                const SweepOverride& override) {
  json j = to_json(base);
  j.erase("sweep");
  j.merge_patch(override.patch);
  try {
    return experiment_config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError("override '" + override.name + "': " + e.what());
  }
}

SweepResult run_sweep(const ExperimentConfig& base,
                      std::span<const SweepOverride> overrides,
                      const RunOptions& opts) {
  if (overrides.empty()) throw ConfigError("run_sweep needs at least one override");
  std::vector<ExperimentConfig> configs;
  for (const auto& o : overrides) configs.push_back(apply_override(base, o));

  SweepResult result;
  std::map<std::string, BaselineArtifacts> baselines;
  for (size_t i = 0; i < overrides.size(); ++i) {
    const std::string key = baseline_key(configs[i]);
    auto it = baselines.find(key);
    if (it == baselines.end()) {
      it = baselines.emplace(key, compute_baseline(configs[i], opts.jobs)).first;
    }
    RunOptions point = opts;
    if (opts.dump_dir) point.dump_dir = *opts.dump_dir / overrides[i].name;
    result.overrides.push_back(overrides[i]);
    result.reports.push_back(in_stage("sweep '" + overrides[i].name + "'", [&] {
      return run_with_baseline(configs[i], it->second, point);
    }));
  }
  return result;
}

std::vector<SweepOverride> standard_ablation() {
  std::vector<SweepOverride> out;
  for (bool same : {false, true}) {
    for (int n = 1; n <= 3; ++n) {
      out.push_back({"objects",
                     "objects=" + std::to_string(n) + ",same=" +
                         (same ? "on" : "off"),
                     json{{"augment",
                           {{"objects_per_image", n},
                            {"allow_same_category", same}}}}});
    }
  }
  for (bool pairwise : {true, false}) {
    out.push_back({"pairwise", std::string("pairwise=") + (pairwise ? "on" : "off"),
                   json{{"augment", {{"pairwise", pairwise}}}}});
  }
  const std::pair<const char*, std::pair<bool, double>> pasting[] = {
      {"rescale", {false, 0.0}},
      {"rescale+rotation", {true, 0.0}},
      {"rescale+gaussian", {false, 1.0}},
      {"rescale+rotation+gaussian", {true, 1.0}},
  };
  for (const auto& [name, knobs] : pasting) {
    out.push_back({"pasting", name,
                   json{{"augment",
                         {{"blend",
                           {{"rotation_enabled", knobs.first},
                            {"gaussian_sigma", knobs.second}}}}}}});
  }
  for (int r = 0; r <= 2; ++r) {
    out.push_back({"rounds", "rounds=" + std::to_string(r), json{{"rounds", r}}});
  }
  return out;
}

json report_to_json(const ExperimentReport& report) {
  json rounds = json::array();
  for (const auto& r : report.rounds) {
    rounds.push_back(
        {{"round", r.round},
         {"metrics", metrics_to_json(report, r.metrics)},
         {"training", train_report_to_json(r.training)},
         {"model", model_params_to_json(r.model)},
         {"bank", r.bank ? bank_to_json(report, *r.bank) : json(nullptr)}});
  }
  const ArmMetrics& b = report.baseline().metrics;
  const ArmMetrics& c = report.cda().metrics;
  return json{
      {"version", kReportVersion},
      {"config", report.config},
      {"categories", report.category_names},
      {"arms",
       {{"baseline", metrics_to_json(report, b)},
        {"cda", metrics_to_json(report, c)}}},
      {"delta",
       {{"miou", c.miou - b.miou},
        {"background_activation",
         c.background_activation - b.background_activation}}},
      {"rounds", rounds}};
}

json sweep_to_json(const SweepResult& result) {
  json points = json::array();
  for (size_t i = 0; i < result.reports.size(); ++i) {
    points.push_back({{"axis", result.overrides[i].axis},
                      {"name", result.overrides[i].name},
                      {"set", result.overrides[i].patch},
                      {"report", report_to_json(result.reports[i])}});
  }
  return json{{"version", kReportVersion}, {"points", points}};
}

std::string format_report(const ExperimentReport& report) {
  std::ostringstream out;
  out << pad("arm", 10) << pad("mIoU", 10) << pad("bg-act", 10) << "per-class IoU\n";
  auto row = [&](const std::string& arm, const ArmMetrics& m) {
    out << pad(arm, 10) << pad(fixed(m.miou), 10)
        << pad(fixed(m.background_activation), 10);
    for (const auto& [cat, v] : m.per_class_iou) {
      out << name_of(report, cat) << "=" << (v ? fixed(*v, 3) : "n/a") << " ";
    }
    out << "\n";
  };
  for (const auto& r : report.rounds) {
    row(r.round == 0 ? "baseline" : "round " + std::to_string(r.round),
        r.metrics);
  }
  const auto& b = report.baseline().metrics;
  const auto& c = report.cda().metrics;
  out << "delta (cda - baseline): mIoU " << fixed(c.miou - b.miou)
      << ", bg-act " << fixed(c.background_activation - b.background_activation)
      << "\n";
  return out.str();
}

std::string format_sweep_tables(const SweepResult& result) {
  std::vector<std::string> axes;
  for (const auto& o : result.overrides) {
    if (std::find(axes.begin(), axes.end(), o.axis) == axes.end()) {
      axes.push_back(o.axis);
    }
  }
  std::ostringstream out;
  for (const auto& axis : axes) {
    out << "== " << axis << " ==\n"
        << pad("setting", 28) << pad("base mIoU", 11) << pad("CDA mIoU", 11)
        << pad("delta", 10) << pad("base bg", 10) << pad("CDA bg", 10)
        << "skipped\n";
    CellMap cells;
    for (size_t i = 0; i < result.reports.size(); ++i) {
      if (result.overrides[i].axis != axis) continue;
      const auto& r = result.reports[i];
      const auto& b = r.baseline().metrics;
      const auto& c = r.cda().metrics;
      cells[result.overrides[i].name] = c.miou;
      out << pad(result.overrides[i].name, 28) << pad(fixed(b.miou), 11)
          << pad(fixed(c.miou), 11) << pad(fixed(c.miou - b.miou), 10)
          << pad(fixed(b.background_activation), 10)
          << pad(fixed(c.background_activation), 10)
          << r.cda().training.skipped_augmentations << "\n";
    }
    const auto& trends = reference_trends();
    if (auto it = trends.find(axis); it != trends.end()) {
      const auto holds = it->second.holds(cells);
      out << "reference trend: " << it->second.statement << " -> "
          << (!holds ? "not evaluated" : *holds ? "agrees" : "differs")
          << "\n";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace cdaug
