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

#include "cdaug/synthgen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "cdaug/errors.h"
#include "cdaug/parallel.h"

namespace cdaug {
namespace {

constexpr int kPlacementRetries = 20;

// Object colors: bright, moderately saturated hues spaced 90 degrees apart on
// the chroma circle (luminance 0.65), followed by the in-between hues.
constexpr std::array<std::array<float, 3>, 8> kPalette = {{
    {0.977f, 0.487f, 0.487f},
    {0.650f, 0.933f, 0.367f},
    {0.323f, 0.813f, 0.813f},
    {0.650f, 0.367f, 0.933f},
    {0.881f, 0.735f, 0.335f},
    {0.419f, 0.965f, 0.565f},
    {0.419f, 0.565f, 0.965f},
    {0.881f, 0.335f, 0.735f},
}};

bool shape_covers(ShapeKind kind, int size, int i, int j) {
  const double u = (i + 0.5) / size - 0.5;
  const double v = (j + 0.5) / size - 0.5;
  switch (kind) {
    case ShapeKind::kSquare:
      return true;
    case ShapeKind::kDisk:
      return u * u + v * v <= 0.25;
    case ShapeKind::kTriangle:
      // Apex at the top center, base along the bottom edge.
      return std::abs(u) <= (v + 0.5) / 2.0 + 1e-12;
    case ShapeKind::kCross:
      return std::abs(u) <= 1.0 / 6.0 || std::abs(v) <= 1.0 / 6.0;
  }
  return false;
}

struct Placement {
  int category;
  int size;
  int x;
  int y;
};

bool overlaps(const Placement& p, const Mask& occupied) {
  const ShapeKind kind = shape_of(p.category);
  for (int j = 0; j < p.size; ++j) {
    for (int i = 0; i < p.size; ++i) {
      if (shape_covers(kind, p.size, i, j) &&
          occupied.at(p.x + i, p.y + j) != kBackground) {
        return true;
      }
    }
  }
  return false;
}

void stamp(const Placement& p, Mask& mask) {
  const ShapeKind kind = shape_of(p.category);
  for (int j = 0; j < p.size; ++j) {
    for (int i = 0; i < p.size; ++i) {
      if (shape_covers(kind, p.size, i, j)) {
        mask.at(p.x + i, p.y + j) = static_cast<uint8_t>(p.category);
      }
    }
  }
}

// Background tints: dark (luminance 0.3) and hue-shifted 45 degrees from the
// object color of the category they are paired with, so that a background is
// a strong class cue while carrying no "object-like" brightness.
constexpr std::array<std::array<float, 3>, 4> kBackdrop = {{
    {0.473f, 0.363f, 0.063f},
    {0.127f, 0.537f, 0.237f},
    {0.127f, 0.237f, 0.537f},
    {0.473f, 0.063f, 0.363f},
}};

constexpr double kWaveAmplitude = 0.05;

// Flat color plus a low-frequency oriented sinusoid.
std::array<float, 3> background_color(const SynthConfig& cfg, int style,
                                      int x, int y) {
  const auto& tint = kBackdrop[style % kBackdrop.size()];
  const double angle = std::numbers::pi * (style % 4) / 4.0;
  const double cycles = 1.0 + style % 3;
  const double t = (std::cos(angle) * x + std::sin(angle) * y) /
                   cfg.image_size;
  const double wave = kWaveAmplitude * std::sin(2.0 * std::numbers::pi * cycles * t);
  std::array<float, 3> out;
  for (int c = 0; c < 3; ++c) {
    out[c] = static_cast<float>(tint[c] + wave);
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  if (image_size < 4) throw ConfigError("synth.image_size must be >= 4");
  if (shape_categories < 1 || shape_categories > 255) {
    throw ConfigError("synth.shape_categories must be in [1, 255]");
  }
  if (background_styles < 1) {
    throw ConfigError("synth.background_styles must be >= 1");
  }
  if (!(confound_prob >= 0.0 && confound_prob <= 1.0)) {
    throw ConfigError("synth.confound_prob must be in [0, 1]");
  }
  if (objects_min < 1 || objects_max < objects_min) {
    throw ConfigError("synth.objects_min/objects_max must satisfy 1 <= min <= max");
  }
  if (!(scale_min > 0.0 && scale_min <= scale_max && scale_max <= 1.0)) {
    throw ConfigError("synth.scale_min/scale_max must satisfy 0 < min <= max <= 1");
  }
  if (!(noise_sigma >= 0.0)) {
    throw ConfigError("synth.noise_sigma must be >= 0");
  }
}

ShapeKind shape_of(int category) {
  return static_cast<ShapeKind>((category - 1) % 4);
}

std::string category_name(int category) {
  static const char* kShapes[] = {"square", "disk", "triangle", "cross"};
  if (category == kBackground) return "background";
  std::string name = kShapes[(category - 1) % 4];
  if (category > 4) name += "_" + std::to_string((category - 1) / 4);
  return name;
}

std::vector<std::string> category_names(const SynthConfig& cfg) {
  std::vector<std::string> names;
  for (int c = 0; c <= cfg.shape_categories; ++c) {
    names.push_back(category_name(c));
  }
  return names;
}

int paired_style(const SynthConfig& cfg, int category) {
  return (category - 1) % cfg.background_styles;
}

std::array<float, 3> category_color(int category) {
  return kPalette[(category - 1) % kPalette.size()];
}

Sample gen_scene(const SynthConfig& cfg, RngStream& rng, SceneInfo* info) {
  cfg.validate();
  const int n = cfg.image_size;
  const int wanted = static_cast<int>(rng.range(cfg.objects_min,
                                                cfg.objects_max));

  std::vector<int> categories;
  for (int k = 0; k < wanted && k < cfg.shape_categories; ++k) {
    std::vector<int> free;
    for (int c = 1; c <= cfg.shape_categories; ++c) {
      if (std::find(categories.begin(), categories.end(), c) ==
          categories.end()) {
        free.push_back(c);
      }
    }
    categories.push_back(free[rng.below(free.size())]);
  }

  int style = paired_style(cfg, categories.front());
  const bool confounded =
      cfg.background_styles == 1 || rng.bernoulli(cfg.confound_prob);
  if (!confounded) {
    const int other = static_cast<int>(rng.below(cfg.background_styles - 1));
    style = other >= style ? other + 1 : other;
  }
  if (info) *info = SceneInfo{style, style == paired_style(cfg, categories.front())};

  Mask mask(n, n, 1, kBackground);
  for (size_t k = 0; k < categories.size(); ++k) {
    const double scale = rng.uniform(cfg.scale_min, cfg.scale_max);
    const int size = std::clamp(static_cast<int>(std::lround(scale * n)), 1, n);
    const int attempts = k == 0 ? 1 : kPlacementRetries;
    for (int a = 0; a < attempts; ++a) {
      Placement p{categories[k], size,
                  static_cast<int>(rng.range(0, n - size)),
                  static_cast<int>(rng.range(0, n - size))};
      if (!overlaps(p, mask)) {
        stamp(p, mask);
        break;
      }
    }
  }

  Sample s;
  s.image = Image(n, n, 3);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const int c = mask.at(x, y);
      const auto color =
          c == kBackground ? background_color(cfg, style, x, y)
                           : category_color(c);
      for (int ch = 0; ch < 3; ++ch) {
        double v = color[ch];
        if (cfg.noise_sigma > 0) v += cfg.noise_sigma * rng.normal();
        s.image.at(x, y, ch) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  s.labels = categories_in(mask);
  s.gt_mask = std::move(mask);
  return s;
}

std::string scene_id(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%06zu", index);
  return buf;
}

std::vector<Sample> gen_corpus(const SynthConfig& cfg, size_t n,
                               const RngStream& root, int jobs,
                               std::vector<SceneInfo>* infos) {
  cfg.validate();
  if (n < 1) throw ConfigError("corpus size must be >= 1");
  std::vector<Sample> corpus(n);
  std::vector<SceneInfo> scene_infos(n);
  parallel_for(n, jobs, [&](size_t i) {
    RngStream rng = root.child(i);
    corpus[i] = gen_scene(cfg, rng, &scene_infos[i]);
    corpus[i].id = scene_id(i);
  });
  if (infos) *infos = std::move(scene_infos);
  return corpus;
}

std::vector<Sample> gen_corpus(const SynthConfig& cfg, size_t n,
                               uint64_t seed, int jobs) {
  return gen_corpus(cfg, n, RngStream(seed), jobs);
}

}  // namespace cdaug
