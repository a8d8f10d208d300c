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

#ifndef CDAUG_SYNTHGEN_H_
#define CDAUG_SYNTHGEN_H_

#include <array>
#include <string>
#include <vector>

#include "cdaug/rng.h"
#include "cdaug/types.h"

namespace cdaug {

enum class ShapeKind { kSquare, kDisk, kTriangle, kCross };

// Scenes of flat-colored shapes over textured backgrounds. Each category has
// a paired background style; `confound_prob` controls how often a scene's
// background is the one paired with its first shape.
struct SynthConfig {
  int image_size = 64;
  int shape_categories = 4;
  int background_styles = 4;
  double confound_prob = 0.95;
  int objects_min = 1;
  int objects_max = 2;
  double scale_min = 0.25;
  double scale_max = 0.5;
  double noise_sigma = 0.02;

  // Throws ConfigError on an invalid field.
  void validate() const;
};

ShapeKind shape_of(int category);
std::string category_name(int category);
// Names indexed by category, with "background" at 0.
std::vector<std::string> category_names(const SynthConfig& cfg);
// Background style paired with a category.
int paired_style(const SynthConfig& cfg, int category);
std::array<float, 3> category_color(int category);

struct SceneInfo {
  int background_style = 0;
  bool confounded = false;
};

// Generates one scene. Every draw comes from `rng`, so equal streams give
// bit-identical samples. `info`, when given, receives the background choice.
Sample gen_scene(const SynthConfig& cfg, RngStream& rng,
                 SceneInfo* info = nullptr);

// Scene i is generated from root.child(i) and named by index.
std::vector<Sample> gen_corpus(const SynthConfig& cfg, size_t n,
                               const RngStream& root, int jobs = 1,
                               std::vector<SceneInfo>* infos = nullptr);
std::vector<Sample> gen_corpus(const SynthConfig& cfg, size_t n,
                               uint64_t seed, int jobs = 1);

std::string scene_id(size_t index);

}  // namespace cdaug

#endif  // CDAUG_SYNTHGEN_H_
