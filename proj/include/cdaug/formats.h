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


#ifndef CDAUG_FORMATS_H_
#define CDAUG_FORMATS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdaug/harvester.h"
#include "cdaug/toycam.h"
#include "cdaug/types.h"

namespace cdaug {

inline constexpr char kManifestVersion[] = "cdaug-manifest/1";
inline constexpr char kBankVersion[] = "cdaug-bank/1";
inline constexpr char kModelVersion[] = "cdaug-model/1";

struct ManifestEntry {
  std::string id;
  std::string image;                   // path relative to the manifest
  std::vector<int> labels;             // category indices
  std::optional<std::string> gt_mask;  // path relative to the manifest

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::string version = kManifestVersion;
  std::vector<std::string> category_names;  // index 0 is "background"
  std::vector<ManifestEntry> entries;

  bool operator==(const Manifest&) const = default;
};

nlohmann::json manifest_to_json(const Manifest& m);
// Checks every manifest invariant except file existence; throws FormatError
// naming the offending field, e.g. "entries[4].labels[1]".
Manifest manifest_from_json(const nlohmann::json& j);
// Parses and validates a manifest file, including that every referenced
// file exists. Syntax errors carry line and column.
Manifest load_manifest(const std::filesystem::path& path);

// Writes images/<id>.png, masks/<id>.png (when gt is present) and
// manifest.json below `dir`.
Manifest save_corpus(const std::filesystem::path& dir,
                     std::span<const Sample> samples,
                     const std::vector<std::string>& category_names,
                     int jobs = 1);

struct LoadedCorpus {
  Manifest manifest;
  std::vector<Sample> samples;
};

// Loads every entry of a manifest; the raster of entry i becomes sample i.
// Throws FormatError when a sample violates its invariants.
LoadedCorpus load_corpus(const std::filesystem::path& manifest_path,
                         int jobs = 1);

// Bank directory: bank.json plus inst_<id>_rgb.png and inst_<id>_alpha.png
// per instance, ids being zero-padded instance positions.
void save_bank(const std::filesystem::path& dir, const InstanceBank& bank);
InstanceBank load_bank(const std::filesystem::path& dir);

struct ModelFile {
  ToyModel model;
  ModelConfig config;
  uint64_t seed = 0;
};

nlohmann::json model_to_json(const ModelFile& file);
ModelFile model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

nlohmann::json train_report_to_json(const TrainReport& report);

}  // namespace cdaug

#endif  // CDAUG_FORMATS_H_
