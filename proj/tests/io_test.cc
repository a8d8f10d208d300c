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
#include <filesystem>
#include <fstream>
#include <string>

#include "cdaug/config.h"
#include "cdaug/errors.h"
#include "cdaug/experiment.h"
#include "cdaug/formats.h"
#include "cdaug/png_io.h"
#include "cdaug/synthgen.h"
#include "test_util.h"

namespace cdaug {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cdaug_io_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

template <typename E, typename F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const E& e) {
    return e.what();
  }
  ADD_FAILURE() << "no error raised";
  return "";
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

using PngTest = TempDir;

TEST_F(PngTest, MaskRoundTripIsExact) {
  RngStream rng(1);
  const Mask m = testing::random_mask(17, 9, 20, rng);
  write_mask_png(dir_ / "sub" / "m.png", m);
  EXPECT_EQ(read_mask_png(dir_ / "sub" / "m.png"), m);
}

TEST_F(PngTest, ColorRoundTripWithinOneLevel) {
  RngStream rng(2);
  const Image img = testing::random_image(11, 13, 3, rng);
  write_color_png(dir_ / "c.png", img);
  const Image back = read_color_png(dir_ / "c.png");
  ASSERT_TRUE(back.same_size(img));
  for (size_t i = 0; i < img.data().size(); ++i) {
    EXPECT_LE(std::abs(back.data()[i] - img.data()[i]), 0.5f / 255 + 1e-6f);
    EXPECT_EQ(back.data()[i] * 255, quantize_unit(img.data()[i]));
  }
}

TEST_F(PngTest, GrayRoundTripAndQuantization) {
  Image g(3, 1, 1);
  g.at(0, 0) = -0.5f;
  g.at(1, 0) = 0.5f;
  g.at(2, 0) = 2.0f;
  write_gray_png(dir_ / "g.png", g);
  const Image back = read_gray_png(dir_ / "g.png");
  EXPECT_EQ(back.at(0, 0), 0.0f);
  EXPECT_EQ(back.at(1, 0), 128.0f / 255);
  EXPECT_EQ(back.at(2, 0), 1.0f);
}

TEST_F(PngTest, MissingFileAndWrongLayoutAreReported) {
  EXPECT_THROW(read_color_png(dir_ / "absent.png"), IoError);
  write_mask_png(dir_ / "m.png", Mask(2, 2, 1));
  EXPECT_THROW(read_color_png(dir_ / "m.png"), FormatError);
  write_color_png(dir_ / "c.png", Image(2, 2, 3));
  EXPECT_THROW(read_mask_png(dir_ / "c.png"), FormatError);
  EXPECT_THROW(write_color_png(dir_ / "x.png", Image(2, 2, 1)), ShapeError);
}

using ManifestTest = TempDir;

std::vector<Sample> corpus(size_t n) {
  SynthConfig cfg;
  cfg.image_size = 20;
  return gen_corpus(cfg, n, 5, 1);
}

TEST_F(ManifestTest, CorpusRoundTrip) {
  const auto samples = corpus(6);
  const auto names = category_names(SynthConfig{});
  const Manifest saved = save_corpus(dir_, samples, names);
  EXPECT_EQ(load_manifest(dir_ / "manifest.json"), saved);
  const LoadedCorpus loaded = load_corpus(dir_ / "manifest.json", 2);
  ASSERT_EQ(loaded.samples.size(), samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(loaded.samples[i].id, samples[i].id);
    EXPECT_EQ(loaded.samples[i].labels, samples[i].labels);
    EXPECT_EQ(loaded.samples[i].gt_mask, samples[i].gt_mask);
    write_color_png(dir_ / "again.png", samples[i].image);
    EXPECT_EQ(loaded.samples[i].image, read_color_png(dir_ / "again.png"));
  }
}

json valid_manifest() {
  return json{{"version", kManifestVersion},
              {"categories", {"background", "square"}},
              {"entries",
               {{{"id", "a"}, {"image", "a.png"}, {"labels", {1}}},
                {{"id", "b"}, {"image", "b.png"}, {"labels", json::array()}}}}};
}

TEST_F(ManifestTest, ValidationNamesTheField) {
  EXPECT_NO_THROW(manifest_from_json(valid_manifest()));
  json j = valid_manifest();
  j["entries"][1]["labels"] = {1, 2};
  EXPECT_NE(error_of<FormatError>([&] { manifest_from_json(j); })
                .find("entries[1].labels[1]"),
            std::string::npos);
  j = valid_manifest();
  j["entries"][1]["id"] = "a";
  EXPECT_NE(error_of<FormatError>([&] { manifest_from_json(j); })
                .find("entries[1].id"),
            std::string::npos);
  j = valid_manifest();
  j["entries"][0]["extra"] = 1;
  EXPECT_NE(error_of<FormatError>([&] { manifest_from_json(j); })
                .find("entries[0].extra"),
            std::string::npos);
  j = valid_manifest();
  j["version"] = "cdaug-manifest/9";
  EXPECT_THROW(manifest_from_json(j), FormatError);
  j = valid_manifest();
  j["categories"][0] = "sky";
  EXPECT_THROW(manifest_from_json(j), FormatError);
  j = valid_manifest();
  j["entries"][0]["labels"] = {1, 1};
  EXPECT_THROW(manifest_from_json(j), FormatError);
  j = valid_manifest();
  j["entries"][0]["id"] = "../escape";
  EXPECT_THROW(manifest_from_json(j), FormatError);
}

TEST_F(ManifestTest, SyntaxErrorsCarryLineNumbers) {
  write_text(dir_ / "manifest.json", "{\n  \"version\": \"x\",\n  oops\n}\n");
  const std::string msg =
      error_of<FormatError>([&] { load_manifest(dir_ / "manifest.json"); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST_F(ManifestTest, MissingImageFileIsReported) {
  write_text(dir_ / "manifest.json", valid_manifest().dump());
  EXPECT_THROW(load_corpus(dir_ / "manifest.json"), Error);
}

using BankFileTest = TempDir;

TEST_F(BankFileTest, RoundTripPreservesInstancesAndProvenance) {
  HarvestProvenance prov;
  prov.examined = 9;
  prov.source_corpus = "corpus/manifest.json";
  prov.rejected[static_cast<size_t>(RejectReason::kRatioTooSmall)] = 4;
  ObjectInstance a = testing::solid_instance(5, 3, 1, 0.2f, 0.4f, 0.6f);
  a.alpha.at(0, 0) = 0.0f;
  ObjectInstance b = testing::solid_instance(2, 7, 3, 1.0f, 0.0f, 0.0f);
  const InstanceBank bank({a, b}, prov);
  save_bank(dir_, bank);
  const InstanceBank back = load_bank(dir_);
  EXPECT_EQ(back.instances(), bank.instances());
  EXPECT_EQ(back.provenance().examined, 9u);
  EXPECT_EQ(back.provenance().source_corpus, prov.source_corpus);
  EXPECT_EQ(back.provenance().rejected, prov.rejected);
}

TEST_F(BankFileTest, MissingBankIsAnIoError) {
  EXPECT_THROW(load_bank(dir_ / "nothing"), IoError);
}

using ModelFileTest = TempDir;

TEST_F(ModelFileTest, RoundTripIsExact) {
  ModelFile file;
  file.model = ToyModel::zeros(3);
  RngStream rng(4);
  for (double& w : file.model.weights) w = rng.normal() / 3.0;
  for (double& b : file.model.bias) b = rng.normal() * 1e-7;
  file.config.epochs = 12;
  file.seed = 99;
  save_model(dir_ / "model.json", file);
  const ModelFile back = load_model(dir_ / "model.json");
  EXPECT_EQ(back.model, file.model);
  EXPECT_EQ(back.config, file.config);
  EXPECT_EQ(back.seed, 99u);
}

TEST_F(ModelFileTest, InconsistentShapesAreRejected) {
  ModelFile file;
  file.model = ToyModel::zeros(2);
  json j = model_to_json(file);
  j["bias"].push_back(0.0);
  EXPECT_THROW(model_from_json(j), FormatError);
}

TEST(ConfigTest, DefaultsRoundTrip) {
  const ExperimentConfig d;
  const ExperimentConfig back = experiment_config_from_json(to_json(d));
  EXPECT_EQ(to_json(back), to_json(d));
  EXPECT_EQ(experiment_config_from_json(json::object()).seed, 7u);
}

TEST(ConfigTest, StrictErrorsNameTheField) {
  auto message = [](const json& j) {
    return error_of<ConfigError>([&] { experiment_config_from_json(j); });
  };
  EXPECT_NE(message(json{{"augment", {{"blend", {{"gaussian_sigma", "x"}}}}}})
                .find("augment.blend.gaussian_sigma"),
            std::string::npos);
  EXPECT_NE(message(json{{"synth", {{"colour", 1}}}}).find("synth.colour"),
            std::string::npos);
  EXPECT_NE(message(json{{"harvest", {{"eps1", 0.8}}}}).find("eps1"),
            std::string::npos);
  EXPECT_NE(message(json{{"model", {{"epochs", -1}}}}).find("model.epochs"),
            std::string::npos);
  EXPECT_NE(message(json{{"rounds", 1.5}}).find("rounds"), std::string::npos);
}

TEST(ConfigTest, ShippedDefaultFileMatchesBuiltInDefaults) {
  const ExperimentConfig shipped =
      load_config(fs::path(CDAUG_SOURCE_DIR) / "configs" / "default.json");
  ExperimentConfig expect;
  expect.sweep = standard_ablation();
  EXPECT_EQ(to_json(shipped), to_json(expect));
  EXPECT_EQ(shipped.sweep.size(), 15u);
}

TEST(ConfigTest, MissingFileAndBadSyntax) {
  EXPECT_THROW(load_config("/nonexistent/cfg.json"), Error);
  const fs::path p = fs::temp_directory_path() / "cdaug_bad_cfg.json";
  write_text(p, "{\n\"seed\": 3,\n}");
  const std::string msg = error_of<ConfigError>([&] { load_config(p); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  fs::remove(p);
}

}  // namespace
}  // namespace cdaug
