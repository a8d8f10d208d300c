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


#include "cdaug/formats.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "cdaug/config.h"
#include "cdaug/errors.h"
#include "cdaug/parallel.h"
#include "cdaug/png_io.h"
#include "json_fields.h"

namespace cdaug {

using nlohmann::json;
using internal::ObjectReader;
namespace fs = std::filesystem;

namespace {

constexpr const char* kFeatureNames[kFeatureCount] = {
    "r", "g", "b", "gray", "grad_x", "grad_y", "local_mean", "local_variance"};

std::string instance_id(size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06zu", index);
  return buf;
}

fs::path resolve(const fs::path& base, const std::string& relative) {
  const fs::path p(relative);
  return p.is_absolute() ? p : base / p;
}

// A file name component must not escape its directory.
bool safe_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return id.find_first_of("/\\") == std::string::npos;
}

}  // namespace

json manifest_to_json(const Manifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json j{{"id", e.id}, {"image", e.image}, {"labels", e.labels}};
    if (e.gt_mask) j["gt_mask"] = *e.gt_mask;
    entries.push_back(std::move(j));
  }
  return json{{"version", m.version},
              {"categories", m.category_names},
              {"entries", entries}};
}

Manifest manifest_from_json(const json& j) {
  using internal::fail;
  using internal::index_path;
  ObjectReader<FormatError> r(j, "");
  Manifest m;
  m.version = r.required<std::string>("version");
  if (m.version != kManifestVersion) {
    fail<FormatError>("version", "unsupported manifest version '" + m.version +
                                     "' (expected " + kManifestVersion + ")");
  }

  const json& names = r.require("categories");
  if (!names.is_array() || names.empty()) {
    fail<FormatError>("categories", "expected non-empty array of names");
  }
  std::set<std::string> seen_names;
  for (size_t i = 0; i < names.size(); ++i) {
    const std::string at = index_path("categories", i);
    auto name = internal::convert<FormatError, std::string>(names[i], at);
    if (name.empty()) fail<FormatError>(at, "empty category name");
    if (!seen_names.insert(name).second) {
      fail<FormatError>(at, "duplicate category name '" + name + "'");
    }
    m.category_names.push_back(std::move(name));
  }
  if (m.category_names[0] != "background") {
    fail<FormatError>("categories[0]", "must be \"background\"");
  }
  if (m.category_names.size() > 256) {
    fail<FormatError>("categories", "at most 256 categories fit 8-bit masks");
  }

  const json& entries = r.require("entries");
  if (!entries.is_array()) fail<FormatError>("entries", "expected array");
  std::set<std::string> ids;
  for (size_t i = 0; i < entries.size(); ++i) {
    ObjectReader<FormatError> er(entries[i], index_path("entries", i));
    ManifestEntry e;
    e.id = er.required<std::string>("id");
    if (!safe_id(e.id)) {
      fail<FormatError>(er.field_path("id"), "invalid id '" + e.id + "'");
    }
    if (!ids.insert(e.id).second) {
      fail<FormatError>(er.field_path("id"), "duplicate id '" + e.id + "'");
    }
    e.image = er.required<std::string>("image");
    const json& labels = er.require("labels");
    const std::string labels_at = er.field_path("labels");
    if (!labels.is_array()) fail<FormatError>(labels_at, "expected array");
    std::set<int> seen;
    for (size_t k = 0; k < labels.size(); ++k) {
      const std::string at = index_path(labels_at, k);
      const int c = internal::convert<FormatError, int>(labels[k], at);
      if (c <= 0 || c >= static_cast<int>(m.category_names.size())) {
        fail<FormatError>(at, "label " + std::to_string(c) +
                                  " is not a category index");
      }
      if (!seen.insert(c).second) {
        fail<FormatError>(at, "duplicate label " + std::to_string(c));
      }
      e.labels.push_back(c);
    }
    std::string gt;
    if (er.optional("gt_mask", gt)) e.gt_mask = gt;
    er.finish();
    m.entries.push_back(std::move(e));
  }
  r.finish();
  return m;
}

Manifest load_manifest(const fs::path& path) {
  const json j =
      internal::parse_text<FormatError>(read_text_file(path), path.string());
  Manifest m;
  try {
    m = manifest_from_json(j);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  for (size_t i = 0; i < m.entries.size(); ++i) {
    const auto& e = m.entries[i];
    const std::string at = path.string() + ": entries[" + std::to_string(i) + "]";
    if (!fs::exists(resolve(base, e.image))) {
      throw FormatError(at + ".image: file not found: " + e.image);
    }
    if (e.gt_mask && !fs::exists(resolve(base, *e.gt_mask))) {
      throw FormatError(at + ".gt_mask: file not found: " + *e.gt_mask);
    }
  }
  return m;
}

Manifest save_corpus(const fs::path& dir, std::span<const Sample> samples,
                     const std::vector<std::string>& category_names,
                     int jobs) {
  Manifest m;
  m.category_names = category_names;
  for (const auto& s : samples) {
    if (!safe_id(s.id)) throw FormatError("invalid sample id '" + s.id + "'");
    ManifestEntry e;
    e.id = s.id;
    e.image = "images/" + s.id + ".png";
    e.labels = s.labels.items();
    if (s.gt_mask) e.gt_mask = "masks/" + s.id + ".png";
    m.entries.push_back(std::move(e));
  }
  // Validates ids, labels and names before anything is written.
  manifest_from_json(manifest_to_json(m));
  fs::create_directories(dir / "images");
  if (std::any_of(samples.begin(), samples.end(),
                  [](const Sample& s) { return s.gt_mask.has_value(); })) {
    fs::create_directories(dir / "masks");
  }
  parallel_for(samples.size(), jobs, [&](size_t i) {
    write_color_png(dir / m.entries[i].image, samples[i].image);
    if (samples[i].gt_mask) {
      write_mask_png(dir / *m.entries[i].gt_mask, *samples[i].gt_mask);
    }
  });
  write_json_file(dir / "manifest.json", manifest_to_json(m));
  return m;
}

LoadedCorpus load_corpus(const fs::path& manifest_path, int jobs) {
  LoadedCorpus out;
  out.manifest = load_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  const auto& entries = out.manifest.entries;
  out.samples.resize(entries.size());
  parallel_for(entries.size(), jobs, [&](size_t i) {
    const auto& e = entries[i];
    Sample s;
    s.id = e.id;
    s.image = read_color_png(resolve(base, e.image));
    for (int c : e.labels) s.labels.insert(c);
    if (e.gt_mask) s.gt_mask = read_mask_png(resolve(base, *e.gt_mask));
    try {
      validate_sample(s);
    } catch (const Error& err) {
      throw FormatError(manifest_path.string() + ": entries[" +
                        std::to_string(i) + "]: " + err.what());
    }
    out.samples[i] = std::move(s);
  });
  return out;
}

void save_bank(const fs::path& dir, const InstanceBank& bank) {
  fs::create_directories(dir);
  const auto& prov = bank.provenance();
  json rejected = json::object();
  for (size_t k = 0; k < kRejectReasonCount; ++k) {
    rejected[std::string(reason_name(static_cast<RejectReason>(k)))] =
        prov.rejected[k];
  }
  json instances = json::array();
  for (size_t i = 0; i < bank.size(); ++i) {
    const auto& inst = bank.instances()[i];
    const std::string id = instance_id(i);
    const std::string rgb = "inst_" + id + "_rgb.png";
    const std::string alpha = "inst_" + id + "_alpha.png";
    write_color_png(dir / rgb, inst.cutout);
    write_gray_png(dir / alpha, inst.alpha);
    instances.push_back({{"id", id},
                         {"category", inst.category},
                         {"source_id", inst.source_id},
                         {"width", inst.width()},
                         {"height", inst.height()},
                         {"rgb", rgb},
                         {"alpha", alpha}});
  }
  write_json_file(dir / "bank.json",
                  json{{"version", kBankVersion},
                       {"provenance",
                        {{"criteria", to_json(prov.criteria)},
                         {"source_corpus", prov.source_corpus},
                         {"examined", prov.examined},
                         {"rejected", rejected}}},
                       {"instances", instances}});
}

InstanceBank load_bank(const fs::path& dir) {
  using internal::fail;
  const fs::path index = dir / "bank.json";
  const json j =
      internal::parse_text<FormatError>(read_text_file(index), index.string());
  try {
    ObjectReader<FormatError> r(j, "");
    const auto version = r.required<std::string>("version");
    if (version != kBankVersion) {
      fail<FormatError>("version", "unsupported bank version '" + version + "'");
    }
    ObjectReader<FormatError> pr(r.require("provenance"), "provenance");
    HarvestProvenance prov;
    try {
      prov.criteria = harvest_criteria_from_json(pr.require("criteria"),
                                                 "provenance.criteria");
    } catch (const ConfigError& e) {
      throw FormatError(e.what());
    }
    prov.source_corpus = pr.required<std::string>("source_corpus");
    prov.examined = pr.required<size_t>("examined");
    ObjectReader<FormatError> rr(pr.require("rejected"), "provenance.rejected");
    for (size_t k = 0; k < kRejectReasonCount; ++k) {
      prov.rejected[k] = rr.required<size_t>(
          std::string(reason_name(static_cast<RejectReason>(k))));
    }
    rr.finish();
    pr.finish();

    const json& list = r.require("instances");
    if (!list.is_array()) fail<FormatError>("instances", "expected array");
    std::vector<ObjectInstance> instances;
    for (size_t i = 0; i < list.size(); ++i) {
      ObjectReader<FormatError> ir(list[i], internal::index_path("instances", i));
      ir.required<std::string>("id");
      ObjectInstance inst;
      inst.category = ir.required<int>("category");
      inst.source_id = ir.required<std::string>("source_id");
      const int w = ir.required<int>("width");
      const int h = ir.required<int>("height");
      inst.cutout = read_color_png(dir / ir.required<std::string>("rgb"));
      inst.alpha = read_gray_png(dir / ir.required<std::string>("alpha"));
      ir.finish();
      if (inst.cutout.width() != w || inst.cutout.height() != h ||
          !inst.alpha.same_size(inst.cutout)) {
        fail<FormatError>(ir.path(), "raster dimensions disagree with index");
      }
      if (inst.category <= 0) {
        fail<FormatError>(ir.field_path("category"), "must be >= 1");
      }
      try {
        validate_instance(inst);
      } catch (const Error& e) {
        fail<FormatError>(ir.path(), e.what());
      }
      instances.push_back(std::move(inst));
    }
    r.finish();
    if (instances.empty()) throw EmptyBankError(index.string() + ": no instances");
    return InstanceBank(std::move(instances), std::move(prov));
  } catch (const FormatError& e) {
    throw FormatError(index.string() + ": " + e.what());
  }
}

json model_to_json(const ModelFile& file) {
  const ToyModel& m = file.model;
  json rows = json::array();
  for (int c = 0; c < m.num_categories; ++c) {
    json row = json::array();
    for (int k = 0; k < m.feature_dim; ++k) row.push_back(m.weight(c, k));
    rows.push_back(std::move(row));
  }
  json features = json::array();
  for (int k = 0; k < m.feature_dim && k < kFeatureCount; ++k) {
    features.push_back(kFeatureNames[k]);
  }
  return json{{"version", kModelVersion},
              {"num_categories", m.num_categories},
              {"feature_dim", m.feature_dim},
              {"features", features},
              {"weights", rows},
              {"bias", m.bias},
              {"config", to_json(file.config)},
              {"provenance", {{"seed", file.seed}}}};
}

ModelFile model_from_json(const json& j) {
  using internal::fail;
  ObjectReader<FormatError> r(j, "");
  const auto version = r.required<std::string>("version");
  if (version != kModelVersion) {
    fail<FormatError>("version", "unsupported model version '" + version + "'");
  }
  ModelFile file;
  const int c_count = r.required<int>("num_categories");
  const int k_count = r.required<int>("feature_dim");
  if (c_count < 1) fail<FormatError>("num_categories", "must be >= 1");
  if (k_count != kFeatureCount) {
    fail<FormatError>("feature_dim",
                      "must be " + std::to_string(kFeatureCount));
  }
  r.find("features");
  file.model = ToyModel::zeros(c_count, k_count);
  const json& rows = r.require("weights");
  if (!rows.is_array() || rows.size() != static_cast<size_t>(c_count)) {
    fail<FormatError>("weights", "expected " + std::to_string(c_count) + " rows");
  }
  for (int c = 0; c < c_count; ++c) {
    const std::string at = internal::index_path("weights", c);
    if (!rows[c].is_array() || rows[c].size() != static_cast<size_t>(k_count)) {
      fail<FormatError>(at, "expected " + std::to_string(k_count) + " values");
    }
    for (int k = 0; k < k_count; ++k) {
      const std::string vat = internal::index_path(at, k);
      const double v = internal::convert<FormatError, double>(rows[c][k], vat);
      if (!std::isfinite(v)) fail<FormatError>(vat, "non-finite weight");
      file.model.weight(c, k) = v;
    }
  }
  const json& bias = r.require("bias");
  if (!bias.is_array() || bias.size() != static_cast<size_t>(c_count)) {
    fail<FormatError>("bias", "expected " + std::to_string(c_count) + " values");
  }
  for (int c = 0; c < c_count; ++c) {
    file.model.bias[c] = internal::convert<FormatError, double>(
        bias[c], internal::index_path("bias", c));
  }
  try {
    file.config = model_config_from_json(r.require("config"), "config");
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
  ObjectReader<FormatError> pr(r.require("provenance"), "provenance");
  file.seed = pr.required<uint64_t>("seed");
  pr.finish();
  r.finish();
  return file;
}

void save_model(const fs::path& path, const ModelFile& file) {
  write_json_file(path, model_to_json(file));
}

ModelFile load_model(const fs::path& path) {
  const json j =
      internal::parse_text<FormatError>(read_text_file(path), path.string());
  try {
    return model_from_json(j);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

json train_report_to_json(const TrainReport& report) {
  return json{{"epoch_losses", report.epoch_losses},
              {"per_class_ap", report.per_class_ap},
              {"entries_seen", report.entries_seen},
              {"augmented_entries", report.augmented_entries},
              {"skipped_augmentations", report.skipped_augmentations}};
}

}  // namespace cdaug
