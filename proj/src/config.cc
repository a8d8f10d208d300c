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


#include "cdaug/config.h"

#include <fstream>
#include <sstream>

#include "cdaug/errors.h"
#include "json_fields.h"

namespace cdaug {

using nlohmann::json;
using internal::ObjectReader;

namespace {

// validate() messages already name the offending dotted field.
template <typename Cfg>
void validate_at(const Cfg& cfg, const std::string& /*path*/) {
  cfg.validate();
}

}  // namespace

json to_json(const SynthConfig& cfg) {
  return json{{"image_size", cfg.image_size},
              {"shape_categories", cfg.shape_categories},
              {"background_styles", cfg.background_styles},
              {"confound_prob", cfg.confound_prob},
              {"objects_min", cfg.objects_min},
              {"objects_max", cfg.objects_max},
              {"scale_min", cfg.scale_min},
              {"scale_max", cfg.scale_max},
              {"noise_sigma", cfg.noise_sigma}};
}

json to_json(const HarvestCriteria& cfg) {
  return json{{"eps1", cfg.eps1},
              {"eps2", cfg.eps2},
              {"require_single_class", cfg.require_single_class}};
}

json to_json(const BlendConfig& cfg) {
  return json{{"scale_area_min", cfg.scale_area_min},
              {"scale_area_max", cfg.scale_area_max},
              {"rotation_min_deg", cfg.rotation_min_deg},
              {"rotation_max_deg", cfg.rotation_max_deg},
              {"rotation_enabled", cfg.rotation_enabled},
              {"gaussian_sigma", cfg.gaussian_sigma}};
}

json to_json(const AugmentConfig& cfg) {
  return json{{"objects_per_image", cfg.objects_per_image},
              {"allow_same_category", cfg.allow_same_category},
              {"pairwise", cfg.pairwise},
              {"max_resample_attempts", cfg.max_resample_attempts},
              {"blend", to_json(cfg.blend)}};
}

json to_json(const ModelConfig& cfg) {
  return json{{"step_size", cfg.step_size},
              {"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"cam_threshold", cfg.cam_threshold}};
}

json to_json(const ExperimentConfig& cfg) {
  json sweep = json::array();
  for (const auto& o : cfg.sweep) {
    sweep.push_back({{"axis", o.axis}, {"name", o.name}, {"set", o.patch}});
  }
  return json{{"synth", to_json(cfg.synth)},
              {"harvest", to_json(cfg.harvest)},
              {"augment", to_json(cfg.augment)},
              {"model", to_json(cfg.model)},
              {"rounds", cfg.rounds},
              {"train_size", cfg.train_size},
              {"eval_size", cfg.eval_size},
              {"seed", cfg.seed},
              {"sweep", sweep}};
}

SynthConfig synth_config_from_json(const json& j, const std::string& path) {
  ObjectReader<ConfigError> r(j, path);
  SynthConfig cfg;
  r.optional("image_size", cfg.image_size);
  r.optional("shape_categories", cfg.shape_categories);
  r.optional("background_styles", cfg.background_styles);
  r.optional("confound_prob", cfg.confound_prob);
  r.optional("objects_min", cfg.objects_min);
  r.optional("objects_max", cfg.objects_max);
  r.optional("scale_min", cfg.scale_min);
  r.optional("scale_max", cfg.scale_max);
  r.optional("noise_sigma", cfg.noise_sigma);
  r.finish();
  validate_at(cfg, path);
  return cfg;
}

HarvestCriteria harvest_criteria_from_json(const json& j,
                                           const std::string& path) {
  ObjectReader<ConfigError> r(j, path);
  HarvestCriteria cfg;
  r.optional("eps1", cfg.eps1);
  r.optional("eps2", cfg.eps2);
  r.optional("require_single_class", cfg.require_single_class);
  r.finish();
  validate_at(cfg, path);
  return cfg;
}

BlendConfig blend_config_from_json(const json& j, const std::string& path) {
  ObjectReader<ConfigError> r(j, path);
  BlendConfig cfg;
  r.optional("scale_area_min", cfg.scale_area_min);
  r.optional("scale_area_max", cfg.scale_area_max);
  r.optional("rotation_min_deg", cfg.rotation_min_deg);
  r.optional("rotation_max_deg", cfg.rotation_max_deg);
  r.optional("rotation_enabled", cfg.rotation_enabled);
  r.optional("gaussian_sigma", cfg.gaussian_sigma);
  r.finish();
  validate_at(cfg, path);
  return cfg;
}

AugmentConfig augment_config_from_json(const json& j, const std::string& path) {
  ObjectReader<ConfigError> r(j, path);
  AugmentConfig cfg;
  r.optional("objects_per_image", cfg.objects_per_image);
  r.optional("allow_same_category", cfg.allow_same_category);
  r.optional("pairwise", cfg.pairwise);
  r.optional("max_resample_attempts", cfg.max_resample_attempts);
  if (const json* blend = r.find("blend")) {
    cfg.blend = blend_config_from_json(*blend, r.field_path("blend"));
  }
  r.finish();
  validate_at(cfg, path);
  return cfg;
}

ModelConfig model_config_from_json(const json& j, const std::string& path) {
  ObjectReader<ConfigError> r(j, path);
  ModelConfig cfg;
  r.optional("step_size", cfg.step_size);
  r.optional("epochs", cfg.epochs);
  r.optional("batch_size", cfg.batch_size);
  r.optional("cam_threshold", cfg.cam_threshold);
  r.finish();
  validate_at(cfg, path);
  return cfg;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ObjectReader<ConfigError> r(j, "");
  ExperimentConfig cfg;
  if (const json* v = r.find("synth")) cfg.synth = synth_config_from_json(*v);
  if (const json* v = r.find("harvest")) {
    cfg.harvest = harvest_criteria_from_json(*v);
  }
  if (const json* v = r.find("augment")) {
    cfg.augment = augment_config_from_json(*v);
  }
  if (const json* v = r.find("model")) cfg.model = model_config_from_json(*v);
  r.optional("rounds", cfg.rounds);
  r.optional("train_size", cfg.train_size);
  r.optional("eval_size", cfg.eval_size);
  r.optional("seed", cfg.seed);
  if (const json* v = r.find("sweep")) {
    if (!v->is_array()) internal::fail<ConfigError>("sweep", "expected array");
    for (size_t i = 0; i < v->size(); ++i) {
      const std::string at = internal::index_path("sweep", i);
      ObjectReader<ConfigError> o((*v)[i], at);
      SweepOverride ov;
      ov.axis = o.required<std::string>("axis");
      ov.name = o.required<std::string>("name");
      ov.patch = o.require("set");
      if (!ov.patch.is_object()) {
        internal::fail<ConfigError>(o.field_path("set"), "expected object");
      }
      o.finish();
      cfg.sweep.push_back(std::move(ov));
    }
  }
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const json j =
      internal::parse_text<ConfigError>(read_text_file(path), path.string());
  try {
    return experiment_config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << dump_json(j);
  if (!out) throw IoError(path.string() + ": write failed");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cdaug
