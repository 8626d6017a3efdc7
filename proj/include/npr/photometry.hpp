// Copyright 2026 the npr-toolkit authors
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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "npr/error.hpp"
#include "npr/image.hpp"
#include "npr/parallel.hpp"
#include "npr/rng.hpp"

namespace npr {

enum class DayNight { Day, Night };

/// Mean Rec.709 luma over all pixels, in [0, 1]. Summation is row-major
/// sequential, so the value is bit-stable.
inline double mean_luminance(const Image& img) {
  if (img.empty()) throw Error("mean_luminance: empty image");
  double sum = 0.0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) sum += pixel_luma(img, x, y);
  }
  return sum / static_cast<double>(img.pixel_count());
}

/// Night iff luminance is strictly below the threshold.
inline DayNight classify_by_brightness(double luminance, double threshold) {
  return luminance < threshold ? DayNight::Night : DayNight::Day;
}

inline constexpr double kDefaultBrightnessThreshold = 0.25;

/// Parameters of the synthetic day-to-night transform. The defaults give a
/// plausible "street at night" look: strongly underexposed, gamma-crushed,
/// blue-shifted, vignetted, with a few warm light blobs and sensor noise.
struct NightParams {
  double exposure_gain = 0.32;            // (0, 1]
  double gamma = 1.6;                     // > 0
  std::array<double, 3> wb_shift = {0.72, 0.80, 1.14};
  double vignette_strength = 0.35;        // [0, 1]
  double noise_sigma = 0.012;             // [0, 0.2], normalized units
  int light_count = 5;                    // synthetic street-light blobs
  std::uint64_t seed = 0;

  static NightParams identity() {
    return NightParams{1.0, 1.0, {1.0, 1.0, 1.0}, 0.0, 0.0, 0, 0};
  }

  void validate() const {
    if (!(exposure_gain > 0.0 && exposure_gain <= 1.0)) {
      throw DomainError("exposure_gain must lie in (0, 1]");
    }
    if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
    if (!(vignette_strength >= 0.0 && vignette_strength <= 1.0)) {
      throw DomainError("vignette_strength must lie in [0, 1]");
    }
    if (!(noise_sigma >= 0.0 && noise_sigma <= 0.2)) {
      throw DomainError("noise_sigma must lie in [0, 0.2]");
    }
    if (light_count < 0) throw DomainError("light_count must be >= 0");
  }
};

namespace detail {

struct LightBlob {
  double cx, cy, radius, intensity;
};

inline std::vector<LightBlob> make_lights(const NightParams& p, int width, int height) {
  std::vector<LightBlob> lights;
  lights.reserve(p.light_count);
  const double extent = std::max(width, height);
  for (int i = 0; i < p.light_count; ++i) {
    const std::uint64_t k = hash_mix(p.seed, 0x11647 /*lights*/, static_cast<std::uint64_t>(i));
    LightBlob b;
    b.cx = uniform_from_bits(splitmix64(k ^ 1)) * width;
    b.cy = uniform_from_bits(splitmix64(k ^ 2)) * height * 0.6;  // upper part of the frame
    b.radius = (0.02 + 0.04 * uniform_from_bits(splitmix64(k ^ 3))) * extent;
    b.intensity = 0.5 + 0.5 * uniform_from_bits(splitmix64(k ^ 4));
    lights.push_back(b);
  }
  return lights;
}

}  // namespace detail

/// Deterministic synthetic day-to-night transform. Stage order is fixed:
/// exposure, gamma, white balance, vignette, additive lights, noise; every
/// stage is skipped when its parameter is the identity, so identity
/// parameters reproduce the input bit for bit. Noise is keyed per pixel, so
/// the result is independent of the parallel schedule.
inline Image night_transform(const Image& input, const NightParams& params,
                             unsigned threads = 1) {
  params.validate();
  Image out(input.width, input.height);
  if (input.empty()) return out;

  const bool do_gain = params.exposure_gain != 1.0;
  const bool do_gamma = params.gamma != 1.0;
  const bool do_wb = params.wb_shift != std::array<double, 3>{1.0, 1.0, 1.0};
  const bool do_vignette = params.vignette_strength != 0.0;
  const bool do_noise = params.noise_sigma != 0.0;
  const auto lights = detail::make_lights(params, input.width, input.height);

  // Warm lamp color, scaled into the additive stage.
  static constexpr double kLampColor[3] = {1.0, 0.86, 0.55};

  const double cx = (input.width - 1) / 2.0;
  const double cy = (input.height - 1) / 2.0;
  const double r_max2 = cx * cx + cy * cy;

  parallel_for(static_cast<std::size_t>(input.height), threads, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < input.width; ++x) {
      double vignette = 1.0;
      if (do_vignette && r_max2 > 0.0) {
        const double dx = x - cx;
        const double dy = y - cy;
        vignette = 1.0 - params.vignette_strength * ((dx * dx + dy * dy) / r_max2);
      }
      double lamp = 0.0;
      for (const auto& b : lights) {
        const double dx = x - b.cx;
        const double dy = y - b.cy;
        lamp += b.intensity * std::exp(-(dx * dx + dy * dy) / (2.0 * b.radius * b.radius));
      }
      for (int c = 0; c < 3; ++c) {
        double v = input.at(x, y, c) / 255.0;
        if (do_gain) v *= params.exposure_gain;
        if (do_gamma) v = std::pow(v, params.gamma);
        if (do_wb) v *= params.wb_shift[c];
        if (do_vignette) v *= vignette;
        if (lamp > 0.0) v += lamp * kLampColor[c];
        if (do_noise) {
          const std::uint64_t key = hash_mix(params.seed, static_cast<std::uint64_t>(y),
                                             static_cast<std::uint64_t>(x),
                                             static_cast<std::uint64_t>(c));
          v += params.noise_sigma * gaussian_from_counter(key);
        }
        const double scaled = std::clamp(v, 0.0, 1.0) * 255.0;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::llrint(scaled));
      }
    }
  });
  return out;
}

/// Pooled 32-bin luma histogram of an image set, normalized to unit mass.
inline std::array<double, 32> luma_histogram(std::span<const Image> images) {
  if (images.empty()) throw Error("luma_histogram: empty image set");
  std::array<double, 32> hist{};
  std::size_t total = 0;
  for (const auto& img : images) {
    if (img.empty()) throw Error("luma_histogram: empty image in set");
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const double luma = pixel_luma(img, x, y);
        const int bin = std::min(31, static_cast<int>(luma * 32.0));
        hist[bin] += 1.0;
      }
    }
    total += img.pixel_count();
  }
  for (auto& h : hist) h /= static_cast<double>(total);
  return hist;
}

struct RealismGap {
  double rendered_vs_night = 0.0;  // L1 histogram distance, [0, 2]
  double rendered_vs_day = 0.0;
};

/// Diagnostic for the synthetic renderer: how far the rendered set's
/// luminance statistics sit from real night (and day) sets.
inline RealismGap adversarial_realism_gap(std::span<const Image> day_set,
                                          std::span<const Image> night_set,
                                          std::span<const Image> rendered_set) {
  const auto day_h = luma_histogram(day_set);
  const auto night_h = luma_histogram(night_set);
  const auto rendered_h = luma_histogram(rendered_set);
  auto l1 = [](const std::array<double, 32>& a, const std::array<double, 32>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
  };
  return RealismGap{l1(rendered_h, night_h), l1(rendered_h, day_h)};
}

}  // namespace npr
