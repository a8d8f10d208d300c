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

#include <vector>

#include "cdaug/errors.h"
#include "cdaug/rng.h"
#include "cdaug/synthgen.h"
#include "cdaug/types.h"

namespace cdaug {
namespace {

TEST(SynthConfigTest, DefaultsAreValid) {
  SynthConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.image_size, 64);
  EXPECT_EQ(cfg.shape_categories, 4);
  EXPECT_EQ(cfg.background_styles, cfg.shape_categories);
  EXPECT_DOUBLE_EQ(cfg.confound_prob, 0.95);
}

TEST(SynthConfigTest, RejectsInvalidFields) {
  SynthConfig cfg;
  cfg.confound_prob = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.objects_min = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.scale_max = 1.2;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(SynthgenTest, CategoryNames) {
  EXPECT_EQ(category_names(SynthConfig{}),
            (std::vector<std::string>{"background", "square", "disk",
                                      "triangle", "cross"}));
}

TEST(SynthgenTest, SceneIsDeterministicGivenStream) {
  const SynthConfig cfg;
  RngStream a = RngStream(3).child(5), b = RngStream(3).child(5);
  EXPECT_EQ(gen_scene(cfg, a), gen_scene(cfg, b));
}

TEST(SynthgenTest, SingletonCorpusEqualsSceneFromStreamZero) {
  const SynthConfig cfg;
  const RngStream root(9);
  const auto corpus = gen_corpus(cfg, 1, root);
  RngStream s0 = root.child(uint64_t{0});
  Sample expected = gen_scene(cfg, s0);
  expected.id = scene_id(0);
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_EQ(corpus[0], expected);
}

TEST(SynthgenTest, CorpusIndependentOfWorkerCount) {
  const SynthConfig cfg;
  EXPECT_EQ(gen_corpus(cfg, 100, 4, 1), gen_corpus(cfg, 100, 4, 8));
}

TEST(SynthgenTest, FullConfoundPairsEveryScene) {
  SynthConfig cfg;
  cfg.confound_prob = 1.0;
  std::vector<SceneInfo> infos;
  const auto corpus = gen_corpus(cfg, 300, RngStream(2), 1, &infos);
  for (size_t i = 0; i < corpus.size(); ++i) {
    ASSERT_TRUE(infos[i].confounded);
    // The first placed shape decides the style; with one object it is the
    // only label.
    if (corpus[i].labels.size() == 1) {
      EXPECT_EQ(infos[i].background_style,
                paired_style(cfg, corpus[i].labels.items().front()));
    }
  }
}

TEST(SynthgenTest, ZeroConfoundNeverUsesPairedStyleOfFirstShape) {
  SynthConfig cfg;
  cfg.confound_prob = 0.0;
  cfg.objects_max = 1;
  std::vector<SceneInfo> infos;
  const auto corpus = gen_corpus(cfg, 300, RngStream(2), 1, &infos);
  for (size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_FALSE(infos[i].confounded);
    EXPECT_NE(infos[i].background_style,
              paired_style(cfg, corpus[i].labels.items().front()));
  }
}

TEST(SynthgenTest, ConfoundFractionMatchesProbability) {
  const SynthConfig cfg;
  std::vector<SceneInfo> infos;
  gen_corpus(cfg, 2000, RngStream(7).child("train"), 1, &infos);
  size_t confounded = 0;
  for (const auto& info : infos) confounded += info.confounded;
  EXPECT_NEAR(confounded / 2000.0, 0.95, 0.02);
}

TEST(SynthgenTest, MasksAgreeWithLabelsAndValuesInRange) {
  const SynthConfig cfg;
  const auto corpus = gen_corpus(cfg, 2000, 11, 1);
  for (const auto& s : corpus) {
    ASSERT_TRUE(s.gt_mask);
    ASSERT_EQ(categories_in(*s.gt_mask), s.labels) << s.id;
    ASSERT_GE(s.labels.size(), 1u);
    ASSERT_LE(s.labels.size(), 2u);
    for (float v : s.image.data()) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
    for (uint8_t v : s.gt_mask->data()) ASSERT_LE(v, cfg.shape_categories);
  }
}

TEST(SynthgenTest, ShapeSizesFollowScaleRange) {
  SynthConfig cfg;
  cfg.objects_max = 1;
  for (const auto& s : gen_corpus(cfg, 200, 5, 1)) {
    const auto box = tight_bbox(*s.gt_mask, [](uint8_t v) { return v != 0; });
    ASSERT_TRUE(box);
    const int side = std::max(box->width, box->height);
    EXPECT_LE(side, static_cast<int>(cfg.scale_max * cfg.image_size) + 1);
    EXPECT_GE(side, static_cast<int>(cfg.scale_min * cfg.image_size) / 2);
  }
}

}  // namespace
}  // namespace cdaug
