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


// Command-line front end for the context decoupling augmentation pipeline.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 pipeline error.
// Failures print one machine-readable line to stderr:
//   error: <kind>: <message>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cdaug/augmentor.h"
#include "cdaug/config.h"
#include "cdaug/errors.h"
#include "cdaug/experiment.h"
#include "cdaug/formats.h"
#include "cdaug/harvester.h"
#include "cdaug/png_io.h"
#include "cdaug/rng.h"
#include "cdaug/synthgen.h"
#include "cdaug/toycam.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cdaug {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitPipeline = 3;

struct GlobalOptions {
  std::optional<uint64_t> seed;
  std::string config;
  std::string out;
  int jobs = 0;

  ExperimentConfig load() const {
    ExperimentConfig cfg;
    if (!config.empty()) {
      try {
        cfg = load_config(config);
      } catch (const IoError& e) {
        throw ConfigError(e.what());
      }
    }
    if (seed) cfg.seed = *seed;
    return cfg;
  }
  int workers() const {
    if (jobs > 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
  }
  fs::path require_out(const std::string& command) const {
    if (out.empty()) throw ConfigError(command + ": --out is required");
    return out;
  }
};

// Ground truth stays out of training and harvesting inputs.
std::vector<Sample> without_gt(std::vector<Sample> samples) {
  for (auto& s : samples) s.gt_mask.reset();
  return samples;
}

int category_count(const Manifest& m) {
  return static_cast<int>(m.category_names.size()) - 1;
}

void run_synth(const GlobalOptions& g, size_t count, const std::string& split) {
  const ExperimentConfig cfg = g.load();
  if (split != "train" && split != "eval") {
    throw ConfigError("synth: --split must be 'train' or 'eval'");
  }
  if (count == 0) count = split == "train" ? cfg.train_size : cfg.eval_size;
  const auto corpus =
      gen_corpus(cfg.synth, count, RngStream(cfg.seed).child(split), g.workers());
  save_corpus(g.require_out("synth"), corpus, category_names(cfg.synth),
              g.workers());
  std::cout << "wrote " << corpus.size() << " scenes to " << g.out << "\n";
}

void run_harvest(const GlobalOptions& g, const std::string& manifest,
                 const std::string& model_path, const std::string& pred_dir) {
  const ExperimentConfig cfg = g.load();
  const fs::path out = g.require_out("harvest");
  LoadedCorpus corpus = load_corpus(manifest, g.workers());
  const auto samples = without_gt(std::move(corpus.samples));
  std::vector<Mask> predicted(samples.size());
  if (!model_path.empty()) {
    const ModelFile model = load_model(model_path);
    const double tau = model.config.cam_threshold;
    parallel_for(samples.size(), g.workers(), [&](size_t i) {
      predicted[i] =
          predict_mask(model.model, samples[i].image, samples[i].labels, tau);
    });
  } else {
    parallel_for(samples.size(), g.workers(), [&](size_t i) {
      predicted[i] = read_mask_png(fs::path(pred_dir) / (samples[i].id + ".png"));
    });
  }
  const InstanceBank bank =
      harvest(samples, predicted, cfg.harvest, manifest, g.workers());
  save_bank(out, bank);
  std::cout << "harvested " << bank.size() << " instances from "
            << bank.provenance().examined << " samples into " << out.string()
            << "\n";
}

void run_augment(const GlobalOptions& g, const std::string& manifest,
                 const std::string& bank_dir, size_t count) {
  const ExperimentConfig cfg = g.load();
  const fs::path out = g.require_out("augment");
  const LoadedCorpus corpus = load_corpus(manifest, g.workers());
  if (corpus.samples.empty()) throw ConfigError("augment: manifest is empty");
  const InstanceBank bank = load_bank(bank_dir);
  const RngStream root = RngStream(cfg.seed).child("augment-cli");

  struct Outcome {
    std::optional<AugmentResult> result;
    size_t source = 0;
    std::string failure;
  };
  std::vector<Outcome> outcomes(count);
  parallel_for(count, g.workers(), [&](size_t i) {
    RngStream rng = root.child(i);
    Outcome& o = outcomes[i];
    o.source = rng.below(corpus.samples.size());
    try {
      o.result = augment_sample(corpus.samples[o.source], bank, cfg.augment, rng);
      o.result->sample.id += "_" + std::to_string(i);
    } catch (const Error& e) {
      o.failure = e.kind() + ": " + e.what();
    }
  });

  std::vector<Sample> samples;
  json records = json::array();
  for (size_t i = 0; i < count; ++i) {
    const Outcome& o = outcomes[i];
    json rec{{"index", i}, {"source_id", corpus.samples[o.source].id}};
    if (o.result) {
      json placements = json::array();
      for (const auto& p : o.result->placements) {
        json pj{{"instance_source_id", p.instance_source_id},
                {"category", p.category},
                {"scale_factor", p.scale_factor},
                {"rotation_deg", p.rotation_deg},
                {"x", p.paste_x},
                {"y", p.paste_y},
                {"width", p.width},
                {"height", p.height}};
        pj["occluded_fraction"] =
            p.occluded_fraction ? json(*p.occluded_fraction) : json(nullptr);
        placements.push_back(std::move(pj));
      }
      rec["id"] = o.result->sample.id;
      rec["placements"] = std::move(placements);
      samples.push_back(o.result->sample);
    } else {
      rec["skipped"] = o.failure;
    }
    records.push_back(std::move(rec));
  }
  save_corpus(out, samples, corpus.manifest.category_names, g.workers());
  write_json_file(out / "placements.json", json{{"augmented", records}});
  std::cout << "wrote " << samples.size() << " augmented samples ("
            << count - samples.size() << " skipped) to " << out.string() << "\n";
}

void run_train(const GlobalOptions& g, const std::string& manifest,
               const std::string& bank_dir, const std::string& eval_manifest) {
  const ExperimentConfig cfg = g.load();
  const fs::path out = g.require_out("train");
  LoadedCorpus corpus = load_corpus(manifest, g.workers());
  const auto samples = without_gt(std::move(corpus.samples));
  std::optional<InstanceBank> bank;
  if (!bank_dir.empty()) bank = load_bank(bank_dir);
  const RngStream root(cfg.seed);
  BatchStream stream(samples, bank ? &*bank : nullptr, cfg.augment,
                     cfg.model.batch_size, root.child("order"),
                     root.child("augment").child(bank ? 1 : 0), g.workers());
  TrainResult result = train(stream, cfg.model,
                             category_count(corpus.manifest), g.workers());
  if (!eval_manifest.empty()) {
    const LoadedCorpus eval = load_corpus(eval_manifest, g.workers());
    const ArmMetrics m = evaluate_model(result.model, eval.samples,
                                        cfg.model.cam_threshold, g.workers());
    for (const auto& [c, ap] : m.per_class_ap) {
      result.report.per_class_ap.push_back(ap);
    }
  }
  save_model(out / "model.json", {result.model, cfg.model, cfg.seed});
  write_json_file(out / "train_report.json",
                  train_report_to_json(result.report));
  std::cout << "trained " << (bank ? "cda" : "baseline") << " model: loss "
            << result.report.epoch_losses.front() << " -> "
            << result.report.epoch_losses.back() << "\n";
}

void run_eval(const GlobalOptions& g, const std::string& model_path,
              const std::string& manifest, std::optional<double> tau) {
  const ModelFile model = load_model(model_path);
  const LoadedCorpus corpus = load_corpus(manifest, g.workers());
  const double t = tau.value_or(model.config.cam_threshold);
  const ArmMetrics m = evaluate_model(model.model, corpus.samples, t, g.workers());
  json iou = json::object();
  for (const auto& [c, v] : m.per_class_iou) {
    iou[corpus.manifest.category_names.at(c)] = v ? json(*v) : json(nullptr);
  }
  json ap = json::object();
  for (const auto& [c, v] : m.per_class_ap) {
    ap[corpus.manifest.category_names.at(c)] = v;
  }
  const json report{{"miou", m.miou},
                    {"per_class_iou", iou},
                    {"background_activation", m.background_activation},
                    {"per_class_ap", ap},
                    {"cam_threshold", t},
                    {"samples", corpus.samples.size()}};
  if (!g.out.empty()) write_json_file(fs::path(g.out) / "eval.json", report);
  std::cout << dump_json(report);
}

void run_experiment_cmd(const GlobalOptions& g, bool dump, bool sweep,
                        bool ablation) {
  const ExperimentConfig cfg = g.load();
  RunOptions opts;
  opts.jobs = g.workers();
  if (dump) opts.dump_dir = g.require_out("experiment --dump") / "dumps";
  if (sweep || ablation) {
    const auto overrides = ablation ? standard_ablation() : cfg.sweep;
    const SweepResult result = run_sweep(cfg, overrides, opts);
    const std::string tables = format_sweep_tables(result);
    if (!g.out.empty()) {
      write_json_file(fs::path(g.out) / "sweep.json", sweep_to_json(result));
      std::ofstream(fs::path(g.out) / "sweep.txt", std::ios::binary) << tables;
    }
    std::cout << tables;
    return;
  }
  const ExperimentReport report = run_experiment(cfg, opts);
  const std::string text = format_report(report);
  if (!g.out.empty()) {
    write_json_file(fs::path(g.out) / "report.json", report_to_json(report));
    std::ofstream(fs::path(g.out) / "report.txt", std::ios::binary) << text;
  }
  std::cout << text;
}

void run_dump_cam(const GlobalOptions& g, const std::string& model_path,
                  const std::string& manifest, std::vector<std::string> ids) {
  const fs::path out = g.require_out("dump-cam");
  const ModelFile model = load_model(model_path);
  const LoadedCorpus corpus = load_corpus(manifest, g.workers());
  std::vector<const Sample*> chosen;
  if (ids.empty()) {
    for (const auto& s : corpus.samples) chosen.push_back(&s);
  }
  for (const auto& id : ids) {
    auto it = std::find_if(corpus.samples.begin(), corpus.samples.end(),
                           [&](const Sample& s) { return s.id == id; });
    if (it == corpus.samples.end()) {
      throw ConfigError("dump-cam: id '" + id + "' not in manifest");
    }
    chosen.push_back(&*it);
  }
  const double tau = model.config.cam_threshold;
  parallel_for(chosen.size(), g.workers(), [&](size_t i) {
    const Sample& s = *chosen[i];
    write_mask_png(out / (s.id + "_mask.png"),
                   predict_mask(model.model, s.image, s.labels, tau));
    for (int c : s.labels) {
      write_gray_png(out / (s.id + "_cam_" + std::to_string(c) + ".png"),
                     cam(model.model, s.image, c));
    }
  });
  std::cout << "dumped " << chosen.size() << " samples to " << out.string()
            << "\n";
}

int report_error(const std::string& kind, const std::string& message,
                 int code) {
  std::cerr << "error: " << kind << ": " << message << "\n";
  return code;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Context decoupling augmentation pipeline and synthetic harness",
               "cdaug"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Root seed (overrides the config)");
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--jobs", g.jobs, "Worker threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);

  size_t synth_count = 0;
  std::string split = "train";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--count", synth_count,
                    "Scenes to generate (default: train_size / eval_size)");
  synth->add_option("--split", split, "Stream to draw from: train or eval");

  std::string manifest, model_path, pred_dir, bank_dir, eval_manifest;
  auto* harvest_cmd =
      app.add_subcommand("harvest", "Build an instance bank from pseudo-masks");
  harvest_cmd->add_option("--manifest", manifest, "Corpus manifest")->required();
  auto* model_opt =
      harvest_cmd->add_option("--model", model_path, "Model producing masks");
  auto* pred_opt = harvest_cmd->add_option(
      "--pred-dir", pred_dir, "Directory of predicted masks <id>.png");
  model_opt->excludes(pred_opt);
  pred_opt->excludes(model_opt);

  size_t augment_count = 16;
  auto* augment_cmd =
      app.add_subcommand("augment", "Emit augmented samples for inspection");
  augment_cmd->add_option("--manifest", manifest, "Corpus manifest")->required();
  augment_cmd->add_option("--bank", bank_dir, "Instance bank directory")
      ->required();
  augment_cmd->add_option("--count", augment_count, "Samples to emit");

  auto* train_cmd = app.add_subcommand(
      "train", "Train a model (CDA when --bank is given, else baseline)");
  train_cmd->add_option("--manifest", manifest, "Training manifest")->required();
  train_cmd->add_option("--bank", bank_dir, "Instance bank directory");
  train_cmd->add_option("--eval-manifest", eval_manifest,
                        "Held-out manifest for per-class AP");

  std::optional<double> tau;
  auto* eval_cmd = app.add_subcommand("eval", "Score CAM masks against gt");
  eval_cmd->add_option("--model", model_path, "Model file")->required();
  eval_cmd->add_option("--manifest", manifest, "Manifest with gt masks")
      ->required();
  eval_cmd->add_option("--tau", tau, "CAM threshold (default: model's)")
      ->check(CLI::Range(0.0, 1.0));

  bool dump = false, sweep = false, ablation = false;
  auto* experiment_cmd = app.add_subcommand(
      "experiment", "Baseline vs CDA experiment, or an ablation sweep");
  experiment_cmd->add_flag("--dump", dump, "Write masks and heatmaps");
  auto* sweep_flag = experiment_cmd->add_flag(
      "--sweep", sweep, "Run the config's sweep overrides");
  auto* ablation_flag = experiment_cmd->add_flag(
      "--ablation", ablation, "Run the standard ablation axes");
  sweep_flag->excludes(ablation_flag);

  std::vector<std::string> ids;
  auto* dump_cmd =
      app.add_subcommand("dump-cam", "Write heatmaps and masks for samples");
  dump_cmd->add_option("--model", model_path, "Model file")->required();
  dump_cmd->add_option("--manifest", manifest, "Corpus manifest")->required();
  dump_cmd->add_option("--ids", ids, "Sample ids (default: all)")
      ->delimiter(',');

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kExitUsage);
  }

  try {
    if (*synth) {
      run_synth(g, synth_count, split);
    } else if (*harvest_cmd) {
      if (model_path.empty() == pred_dir.empty()) {
        throw ConfigError("harvest: exactly one of --model or --pred-dir");
      }
      run_harvest(g, manifest, model_path, pred_dir);
    } else if (*augment_cmd) {
      run_augment(g, manifest, bank_dir, augment_count);
    } else if (*train_cmd) {
      run_train(g, manifest, bank_dir, eval_manifest);
    } else if (*eval_cmd) {
      run_eval(g, model_path, manifest, tau);
    } else if (*experiment_cmd) {
      run_experiment_cmd(g, dump, sweep, ablation);
    } else if (*dump_cmd) {
      run_dump_cam(g, model_path, manifest, ids);
    }
  } catch (const ConfigError& e) {
    return report_error(e.kind(), e.what(), kExitUsage);
  } catch (const Error& e) {
    return report_error(e.kind(), e.what(), kExitPipeline);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kExitPipeline);
  }
  return kExitOk;
}

}  // namespace cdaug

int main(int argc, char** argv) { return cdaug::cli_main(argc, argv); }
