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

#include "cdaug/blender.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cdaug/errors.h"

namespace cdaug {
namespace {

constexpr int kAreaCorrections = 6;
constexpr int kFitRetries = 8;

// Bilinear sample of channel c at continuous pixel-index coordinates.
// Clamped sampling replicates border pixels; otherwise taps outside the
// raster read as zero.
float bilinear(const Image& img, double fx, double fy, int c, bool clamped) {
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double tx = fx - x0;
  const double ty = fy - y0;
  auto tap = [&](int x, int y) -> double {
    if (clamped) {
      x = std::clamp(x, 0, img.width() - 1);
      y = std::clamp(y, 0, img.height() - 1);
    } else if (!img.contains(x, y)) {
      return 0.0;
    }
    return img.at(x, y, c);
  };
  const double top = (1 - tx) * tap(x0, y0) + tx * tap(x0 + 1, y0);
  const double bottom = (1 - tx) * tap(x0, y0 + 1) + tx * tap(x0 + 1, y0 + 1);
  return static_cast<float>((1 - ty) * top + ty * bottom);
}

float binarize(float a) { return a >= 0.5f ? 1.0f : 0.0f; }

ObjectInstance recrop(ObjectInstance inst, const char* op) {
  const auto box = tight_bbox(inst.alpha, in_support);
  if (!box) {
    throw TooSmallError(std::string(op) + ": instance " + inst.source_id +
                        " lost its support");
  }
  if (box->width != inst.width() || box->height != inst.height()) {
    inst.cutout = crop(inst.cutout, *box);
    inst.alpha = crop(inst.alpha, *box);
  }
  return inst;
}

std::vector<double> gaussian_taps(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) {
    taps[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));
  }
  return taps;
}

}  // namespace

void BlendConfig::validate() const {
  if (!(scale_area_min > 0.0 && scale_area_min <= scale_area_max &&
        scale_area_max <= 1.0)) {
    throw ConfigError("augment.blend.scale_area_min/scale_area_max must satisfy 0 < min <= max <= 1");
  }
  if (rotation_enabled && !(rotation_min_deg <= rotation_max_deg)) {
    throw ConfigError("augment.blend.rotation_min_deg/rotation_max_deg must satisfy min <= max");
  }
  if (!(gaussian_sigma >= 0.0)) {
    throw ConfigError("augment.blend.gaussian_sigma must be >= 0");
  }
}

ObjectInstance rescale_instance(const ObjectInstance& inst, double factor) {
  if (!(factor > 0.0)) throw ConfigError("rescale factor must be positive");
  if (factor == 1.0) return inst;
  const int w = static_cast<int>(std::lround(inst.width() * factor));
  const int h = static_cast<int>(std::lround(inst.height() * factor));
  if (w < 1 || h < 1) {
    throw TooSmallError("rescale by " + std::to_string(factor) + " of " +
                        inst.source_id + " gives an empty raster");
  }
  const double sx = static_cast<double>(inst.width()) / w;
  const double sy = static_cast<double>(inst.height()) / h;
  ObjectInstance out;
  out.category = inst.category;
  out.source_id = inst.source_id;
  out.cutout = Image(w, h, 3);
  out.alpha = Image(w, h, 1);
  for (int y = 0; y < h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      for (int c = 0; c < 3; ++c) {
        out.cutout.at(x, y, c) = bilinear(inst.cutout, fx, fy, c, true);
      }
      out.alpha.at(x, y) = binarize(bilinear(inst.alpha, fx, fy, 0, true));
    }
  }
  return recrop(std::move(out), "rescale_instance");
}

ObjectInstance rotate_instance(const ObjectInstance& inst, double degrees) {
  if (degrees == 0.0) return inst;
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double w = inst.width();
  const double h = inst.height();
  // The epsilon keeps exact quarter turns from growing the canvas.
  const int cw = std::max(
      1, static_cast<int>(std::ceil(w * std::abs(cs) + h * std::abs(sn) - 1e-9)));
  const int ch = std::max(
      1, static_cast<int>(std::ceil(w * std::abs(sn) + h * std::abs(cs) - 1e-9)));
  ObjectInstance out;
  out.category = inst.category;
  out.source_id = inst.source_id;
  out.cutout = Image(cw, ch, 3);
  out.alpha = Image(cw, ch, 1);
  for (int y = 0; y < ch; ++y) {
    const double dy = y + 0.5 - ch / 2.0;
    for (int x = 0; x < cw; ++x) {
      const double dx = x + 0.5 - cw / 2.0;
      const double fx = cs * dx - sn * dy + w / 2.0 - 0.5;
      const double fy = sn * dx + cs * dy + h / 2.0 - 0.5;
      for (int c = 0; c < 3; ++c) {
        out.cutout.at(x, y, c) = bilinear(inst.cutout, fx, fy, c, true);
      }
      out.alpha.at(x, y) = binarize(bilinear(inst.alpha, fx, fy, 0, false));
    }
  }
  return recrop(std::move(out), "rotate_instance");
}

ObjectInstance smooth_alpha(const ObjectInstance& inst, double sigma) {
  if (!(sigma >= 0.0)) throw ConfigError("smoothing sigma must be >= 0");
  if (sigma == 0.0) return inst;
  const std::vector<double> taps = gaussian_taps(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  double norm = 0.0;
  for (double t : taps) norm += t;

  const int w = inst.width();
  const int h = inst.height();
  // Accumulating in tap order keeps all-opaque neighborhoods exactly 1.
  std::vector<double> rows(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int sx = x + k;
        const double a = sx >= 0 && sx < w ? inst.alpha.at(sx, y) : 0.0;
        acc += taps[k + radius] * a;
      }
      rows[static_cast<size_t>(y) * w + x] = acc / norm;
    }
  }
  ObjectInstance out = inst;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int sy = y + k;
        const double a = sy >= 0 && sy < h ? rows[static_cast<size_t>(sy) * w + x] : 0.0;
        acc += taps[k + radius] * a;
      }
      out.alpha.at(x, y) = static_cast<float>(std::clamp(acc / norm, 0.0, 1.0));
    }
  }
  return out;
}

Image paste(const Image& target, const ObjectInstance& inst, int x, int y) {
  if (target.channels() != 3 || inst.cutout.channels() != 3 ||
      !inst.cutout.same_size(inst.alpha)) {
    throw ShapeError("paste: channel or size mismatch");
  }
  if (x < 0 || y < 0 || x + inst.width() > target.width() ||
      y + inst.height() > target.height()) {
    throw BoundsError("paste: " + std::to_string(inst.width()) + "x" +
                      std::to_string(inst.height()) + " instance at (" +
                      std::to_string(x) + "," + std::to_string(y) +
                      ") leaves the " + std::to_string(target.width()) + "x" +
                      std::to_string(target.height()) + " target");
  }
  Image out = target;
  for (int j = 0; j < inst.height(); ++j) {
    for (int i = 0; i < inst.width(); ++i) {
      const float a = inst.alpha.at(i, j);
      for (int c = 0; c < 3; ++c) {
        out.at(x + i, y + j, c) =
            a * inst.cutout.at(i, j, c) + (1.0f - a) * target.at(x + i, y + j, c);
      }
    }
  }
  return out;
}

BlendResult random_blend(const Sample& target, const ObjectInstance& inst,
                         const BlendConfig& cfg, RngStream& rng) {
  cfg.validate();
  const Image& canvas = target.image;
  const double target_area =
      static_cast<double>(canvas.width()) * canvas.height();
  if (target_area == 0) throw PlacementError("random_blend: empty target");

  PlacementRecord record;
  record.instance_source_id = inst.source_id;
  record.category = inst.category;

  // Rescale before rotating so the bilinear passes run on the small raster.
  // The fit bound accounts for the rotated bounding box analytically.
  BlendResult result;
  try {
    if (cfg.rotation_enabled) {
      record.rotation_deg =
          rng.uniform(cfg.rotation_min_deg, cfg.rotation_max_deg);
    }
    const double wanted =
        rng.uniform(cfg.scale_area_min, cfg.scale_area_max);
    const double theta = record.rotation_deg * std::numbers::pi / 180.0;
    const double cs = std::abs(std::cos(theta));
    const double sn = std::abs(std::sin(theta));
    const double turned_w = inst.width() * cs + inst.height() * sn;
    const double turned_h = inst.width() * sn + inst.height() * cs;
    const double fit =
        std::min(canvas.width() / turned_w, canvas.height() / turned_h);
    auto transform = [&](double factor) {
      return rotate_instance(rescale_instance(inst, factor),
                             record.rotation_deg);
    };
    const double area = static_cast<double>(support_area(inst));
    double factor = std::min(std::sqrt(wanted * target_area / area), fit);
    ObjectInstance shaped = transform(factor);
    auto fits = [&](const ObjectInstance& o) {
      return o.width() <= canvas.width() && o.height() <= canvas.height();
    };
    auto shrink_to_fit = [&](const ObjectInstance& o) {
      return factor * std::min(static_cast<double>(canvas.width()) / o.width(),
                               static_cast<double>(canvas.height()) / o.height());
    };
    // Resampling shifts the support area slightly; steer it back toward the
    // drawn fraction. A factor that overflowed the canvas caps later steps.
    double cap = fit;
    for (int k = 0; k < kAreaCorrections; ++k) {
      const double got = support_area(shaped) / target_area;
      const bool inside = fits(shaped);
      if (inside && got >= cfg.scale_area_min && got <= cfg.scale_area_max) {
        break;
      }
      if (!inside) cap = std::min(cap, shrink_to_fit(shaped));
      const double next = std::min(factor * std::sqrt(wanted / got), cap);
      if (next == factor) break;
      factor = next;
      shaped = transform(factor);
    }
    // Rounding can still leave the raster a pixel too large.
    for (int k = 0; k < kFitRetries && !fits(shaped); ++k) {
      factor = std::min(shrink_to_fit(shaped), factor * (1.0 - 1e-3));
      shaped = transform(factor);
    }
    record.scale_factor = factor;
    result.pasted = smooth_alpha(shaped, cfg.gaussian_sigma);
  } catch (const TooSmallError& e) {
    throw PlacementError(std::string("random_blend: ") + e.what());
  }

  const ObjectInstance& pasted = result.pasted;
  if (pasted.width() > canvas.width() || pasted.height() > canvas.height()) {
    throw PlacementError("random_blend: instance " + inst.source_id +
                         " does not fit the target");
  }
  record.width = pasted.width();
  record.height = pasted.height();
  record.paste_x = static_cast<int>(rng.range(0, canvas.width() - pasted.width()));
  record.paste_y =
      static_cast<int>(rng.range(0, canvas.height() - pasted.height()));

  if (target.gt_mask) {
    size_t foreground = 0;
    size_t covered = 0;
    const Mask& gt = *target.gt_mask;
    for (int y = 0; y < gt.height(); ++y) {
      for (int x = 0; x < gt.width(); ++x) {
        if (gt.at(x, y) == kBackground) continue;
        ++foreground;
        const int i = x - record.paste_x;
        const int j = y - record.paste_y;
        if (i >= 0 && j >= 0 && i < pasted.width() && j < pasted.height() &&
            in_support(pasted.alpha.at(i, j))) {
          ++covered;
        }
      }
    }
    record.occluded_fraction =
        foreground == 0 ? 0.0 : static_cast<double>(covered) / foreground;
  }
  result.image = paste(canvas, pasted, record.paste_x, record.paste_y);
  result.record = std::move(record);
  return result;
}

}  // namespace cdaug
