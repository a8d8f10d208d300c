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


#ifndef CDAUG_CONFIG_H_
#define CDAUG_CONFIG_H_

#include <filesystem>
#include <string>

#include "json.hpp"

#include "cdaug/experiment.h"

namespace cdaug {

// JSON form of every configuration section. Parsing is strict: unknown
// fields and type mismatches raise ConfigError naming the dotted field path
// (e.g. "augment.blend.gaussian_sigma"). Absent fields keep their defaults.

nlohmann::json to_json(const SynthConfig& cfg);
nlohmann::json to_json(const HarvestCriteria& cfg);
nlohmann::json to_json(const BlendConfig& cfg);
nlohmann::json to_json(const AugmentConfig& cfg);
nlohmann::json to_json(const ModelConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);

SynthConfig synth_config_from_json(const nlohmann::json& j,
                                   const std::string& path = "synth");
HarvestCriteria harvest_criteria_from_json(const nlohmann::json& j,
                                           const std::string& path = "harvest");
BlendConfig blend_config_from_json(const nlohmann::json& j,
                                   const std::string& path = "augment.blend");
AugmentConfig augment_config_from_json(const nlohmann::json& j,
                                       const std::string& path = "augment");
ModelConfig model_config_from_json(const nlohmann::json& j,
                                   const std::string& path = "model");
// Also validates the result.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

// Reads a config file; syntax errors carry line and column.
ExperimentConfig load_config(const std::filesystem::path& path);

// Pretty-printed JSON text with a trailing newline; keys sorted.
std::string dump_json(const nlohmann::json& j);
// Writes dump_json(j), creating parent directories; throws IoError.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
// Reads a whole file; throws IoError.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace cdaug

#endif  // CDAUG_CONFIG_H_
