// Copyright 2026 The cordseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cordseg/errors.hpp"
#include "cordseg/image.hpp"
#include "cordseg/postprocess.hpp"

namespace cordseg {

/// Parameters of one synthetic scene: bright curvilinear cords over a noisy,
/// unevenly lit background.
struct SynthSpec {
  int width = 64;
  int height = 64;
  int n_cords = 3;
  int thickness_min = 2;
  int thickness_max = 4;
  int length_min = 20;  // random-walk steps of one pixel
  int length_max = 50;
  double turn_std = 0.12;  // radians of heading-rate noise per step
  double noise_std = 40.0;
  int blur_radius = 1;
  double fg_mean = 150.0;
  double bg_mean = 80.0;
  double illumination = 30.0;  // peak amplitude of the smooth background swell
  int min_separation = 4;      // background pixels between any two cords
  // Let cords run off the frame and keep the visible part, as in a crop of a
  // larger field. Off: every cord stays one pixel clear of the border.
  bool clip_at_border = true;
  int min_visible_area = 60;  // smallest visible part kept for a clipped cord
  std::uint64_t seed = 0;

  void validate() const {
    require(width > 0 && height > 0, Errc::invalid_argument, "synth: dims must be positive");
    require(n_cords >= 0, Errc::invalid_argument, "synth: n_cords must be >= 0");
    require(thickness_min >= 1 && thickness_max >= thickness_min, Errc::invalid_argument,
            "synth: bad thickness range");
    require(length_min >= 1 && length_max >= length_min, Errc::invalid_argument,
            "synth: bad length range");
    require(fg_mean >= 0 && fg_mean <= 255 && bg_mean >= 0 && bg_mean <= 255,
            Errc::invalid_argument, "synth: intensities must be in [0, 255]");
    require(noise_std >= 0 && blur_radius >= 0 && illumination >= 0, Errc::invalid_argument,
            "synth: negative noise, blur or illumination");
    // At least one background pixel between cords keeps them separate 8-components.
    require(min_separation >= 1, Errc::invalid_argument, "synth: min_separation must be >= 1");
    require(min_visible_area >= 1, Errc::invalid_argument, "synth: min_visible_area must be >= 1");
  }
};

struct SynthCase {
  GrayImage image;
  BinaryMask mask;
  int true_count = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct Pixel {
  int x, y;
};

// True iff the (sorted, unique) pixel set is one 8-connected piece.
inline bool single_piece(const std::vector<Pixel>& px) {
  if (px.empty()) return false;
  auto less = [](Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; };
  std::vector<std::uint8_t> seen(px.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const Pixel p = px[stack.back()];
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Pixel q{p.x + dx, p.y + dy};
        auto it = std::lower_bound(px.begin(), px.end(), q, less);
        if (it == px.end() || it->x != q.x || it->y != q.y) continue;
        const auto i = static_cast<std::size_t>(it - px.begin());
        if (seen[i]) continue;
        seen[i] = 1;
        ++reached;
        stack.push_back(i);
      }
    }
  }
  return reached == px.size();
}

// Pixels covered by one cord: a disc of diameter `thickness` stamped along a
// heading-smoothed random walk. Without clipping the walk is rejected when it
// strays within one pixel of the border; with clipping the off-frame part is
// dropped and the rest kept if it is one piece of at least min_visible_area.
inline std::optional<std::vector<Pixel>> draw_cord(const SynthSpec& s, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> thick(s.thickness_min, s.thickness_max);
  std::uniform_int_distribution<int> len(s.length_min, s.length_max);
  std::uniform_real_distribution<double> ux(0.0, s.width), uy(0.0, s.height);
  std::uniform_real_distribution<double> heading0(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> turn(0.0, s.turn_std);

  const int t = thick(rng);
  const int steps = len(rng);
  double px = ux(rng), py = uy(rng), heading = heading0(rng), rate = 0.0;
  const double c = (t - 1) / 2.0;
  const double r2 = (t / 2.0) * (t / 2.0);

  std::vector<Pixel> out;
  bool clipped = false;
  for (int i = 0; i <= steps; ++i) {
    const int bx = static_cast<int>(std::lround(px - c));
    const int by = static_cast<int>(std::lround(py - c));
    for (int dy = 0; dy < t; ++dy) {
      for (int dx = 0; dx < t; ++dx) {
        const double ex = dx - c, ey = dy - c;
        if (ex * ex + ey * ey > r2) continue;
        const int x = bx + dx, y = by + dy;
        if (s.clip_at_border) {
          if (x < 0 || y < 0 || x >= s.width || y >= s.height) {
            clipped = true;
            continue;
          }
        } else if (x < 1 || y < 1 || x > s.width - 2 || y > s.height - 2) {
          return std::nullopt;
        }
        out.push_back({x, y});
      }
    }
    const double dr = std::clamp(turn(rng), -2.5 * s.turn_std, 2.5 * s.turn_std);
    rate = std::clamp(0.8 * rate + dr, -0.25, 0.25);
    heading += rate;
    px += std::cos(heading);
    py += std::sin(heading);
  }
  std::sort(out.begin(), out.end(),
            [](Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](Pixel a, Pixel b) { return a.x == b.x && a.y == b.y; }),
            out.end());
  if (clipped &&
      (static_cast<int>(out.size()) < s.min_visible_area || !single_piece(out)))
    return std::nullopt;
  return out;
}

inline std::vector<float> box_blur(std::vector<float> img, int w, int h, int r) {
  if (r <= 0) return img;
  std::vector<float> tmp(img.size());
  const float inv = 1.0f / static_cast<float>(2 * r + 1);
  auto clampi = [](int v, int lo, int hi) { return std::max(lo, std::min(v, hi)); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float s = 0;
      for (int d = -r; d <= r; ++d) s += img[static_cast<std::size_t>(y) * w + clampi(x + d, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = s * inv;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float s = 0;
      for (int d = -r; d <= r; ++d) s += tmp[static_cast<std::size_t>(clampi(y + d, 0, h - 1)) * w + x];
      img[static_cast<std::size_t>(y) * w + x] = s * inv;
    }
  }
  return img;
}

}  // namespace detail

inline constexpr int kPlacementAttempts = 400;
inline constexpr int kLayoutRestarts = 25;

namespace detail {

// Places `n` cords with the separation rule; false if some cord found no room.
inline bool place_cords(const SynthSpec& spec, std::mt19937_64& rng, BinaryMask& mask) {
  const int w = spec.width, h = spec.height, sep = spec.min_separation;
  mask = BinaryMask(w, h);
  BinaryMask forbidden(w, h);
  for (int c = 0; c < spec.n_cords; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      auto cord = draw_cord(spec, rng);
      if (!cord) continue;
      const bool clear = std::none_of(cord->begin(), cord->end(),
                                      [&](Pixel p) { return forbidden.at(p.x, p.y) != 0; });
      if (!clear) continue;
      for (auto p : *cord) {
        mask.at(p.x, p.y) = 1;
        for (int dy = -sep; dy <= sep; ++dy) {
          for (int dx = -sep; dx <= sep; ++dx) {
            const int x = p.x + dx, y = p.y + dy;
            if (x >= 0 && y >= 0 && x < w && y < h) forbidden.at(x, y) = 1;
          }
        }
      }
      placed = true;
    }
    if (!placed) return false;
  }
  return true;
}

}  // namespace detail

/// Renders one scene. The mask is the exact cord support before blurring and
/// cords never come within `min_separation` pixels of each other, so the mask
/// has exactly `true_count` 8-connected components. An unlucky layout that
/// leaves no room for a later cord is discarded and redrawn.
inline SynthCase generate_case(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const int w = spec.width, h = spec.height;
  BinaryMask mask;
  bool placed = false;
  for (int restart = 0; restart < kLayoutRestarts && !placed; ++restart)
    placed = detail::place_cords(spec, rng, mask);
  require(placed, Errc::placement,
          "could not place " + std::to_string(spec.n_cords) + " cords in " + std::to_string(w) +
              "x" + std::to_string(h));

  // Smooth illumination swell: a single low-frequency cosine bump with a random phase.
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double phx = phase(rng), phy = phase(rng);
  const double fx = 2.0 * std::numbers::pi / std::max(w, 96);
  const double fy = 2.0 * std::numbers::pi / std::max(h, 96);
  std::normal_distribution<double> noise(0.0, spec.noise_std);
  std::vector<float> px(mask.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double light =
          spec.illumination * 0.5 * (std::cos(fx * x + phx) + std::cos(fy * y + phy));
      const double base = mask.at(x, y) ? spec.fg_mean : spec.bg_mean;
      px[static_cast<std::size_t>(y) * w + x] =
          static_cast<float>(base + light + (spec.noise_std > 0 ? noise(rng) : 0.0));
    }
  }
  px = detail::box_blur(std::move(px), w, h, spec.blur_radius);

  GrayImage img(w, h);
  auto out = img.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(px[i]), 0L, 255L));
  }
  return {std::move(img), std::move(mask), spec.n_cords};
}

// ---------------------------------------------------------------------------
// Datasets

enum class Split { train, test };

inline std::string_view to_string(Split s) noexcept { return s == Split::train ? "train" : "test"; }

struct DatasetCase {
  std::string id;
  Split split = Split::train;
  std::uint64_t seed = 0;
  SynthCase data;
  std::optional<Verdict> label;
};

struct SynthDataset {
  std::vector<DatasetCase> cases;

  std::size_t count(Split s) const {
    return static_cast<std::size_t>(std::count_if(cases.begin(), cases.end(),
                                                  [s](const DatasetCase& c) { return c.split == s; }));
  }
};

inline std::string case_id(std::string_view prefix, std::size_t index) {
  std::string n = std::to_string(index);
  if (n.size() < 3) n.insert(0, 3 - n.size(), '0');
  return std::string(prefix) + "_" + n;
}

/// n_train + n_test tile-sized cases with per-case derived seeds. Each case
/// draws its cord count uniformly from [min_cords, tmpl.n_cords].
inline SynthDataset generate_dataset(const SynthSpec& tmpl, int n_train, int n_test,
                                     std::uint64_t seed, int min_cords = 0) {
  require(n_train >= 0 && n_test >= 0, Errc::invalid_argument, "split sizes must be >= 0");
  require(min_cords >= 0 && min_cords <= tmpl.n_cords, Errc::invalid_argument,
          "min_cords must be in [0, n_cords]");
  SynthDataset ds;
  const int total = n_train + n_test;
  for (int i = 0; i < total; ++i) {
    const std::uint64_t case_seed = detail::splitmix64(seed ^ detail::splitmix64(i + 1));
    std::mt19937_64 rng(case_seed);
    SynthSpec s = tmpl;
    s.seed = case_seed;
    s.n_cords = std::uniform_int_distribution<int>(min_cords, tmpl.n_cords)(rng);
    DatasetCase c;
    c.id = case_id("case", i);
    c.split = i < n_train ? Split::train : Split::test;
    c.seed = case_seed;
    c.data = generate_case(s);
    ds.cases.push_back(std::move(c));
  }
  return ds;
}

/// Full-size labelled scenes for case-level evaluation. Cases alternate
/// between clearly negative (cord count at most threshold - margin) and
/// clearly positive (at least threshold + margin) counts.
inline SynthDataset generate_scenes(const SynthSpec& tmpl, int count, std::uint64_t seed,
                                    int threshold = kDefaultThreshold, int margin = 4,
                                    int max_positive = 0) {
  require(count >= 0, Errc::invalid_argument, "scene count must be >= 0");
  if (max_positive <= 0) max_positive = threshold + margin + 6;
  SynthDataset ds;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t case_seed = detail::splitmix64(~seed ^ detail::splitmix64(i + 1));
    std::mt19937_64 rng(case_seed);
    const bool positive = i % 2 == 1;
    const int lo = positive ? threshold + margin : 0;
    const int hi = positive ? max_positive : std::max(0, threshold - margin);
    SynthSpec s = tmpl;
    s.seed = case_seed;
    s.n_cords = std::uniform_int_distribution<int>(lo, hi)(rng);
    DatasetCase c;
    c.id = case_id("scene", i);
    c.split = Split::test;
    c.seed = case_seed;
    c.data = generate_case(s);
    c.label = c.data.true_count > threshold ? Verdict::positive : Verdict::negative;
    ds.cases.push_back(std::move(c));
  }
  return ds;
}

}  // namespace cordseg
