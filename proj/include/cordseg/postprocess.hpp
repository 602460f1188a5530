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
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "cordseg/errors.hpp"
#include "cordseg/image.hpp"

namespace cordseg {

inline BinaryMask binarize(const ProbMap& prob, float cut = 0.5f) {
  BinaryMask m(prob.width(), prob.height());
  auto in = prob.pixels();
  auto out = m.pixels();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] >= cut ? 1 : 0;
  return m;
}

// ---------------------------------------------------------------------------
// Morphology with a 3x3 square structuring element. Pixels outside the image
// are background for both operations, so erosion always clears the border.

namespace detail {

// One pass of a 3x3 max (dilate) or min (erode), done separably.
inline BinaryMask morph_once(const BinaryMask& in, bool dilate) {
  const int w = in.width(), h = in.height();
  BinaryMask tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    const auto* s = in.row(y);
    auto* d = tmp.row(y);
    for (int x = 0; x < w; ++x) {
      const std::uint8_t l = x > 0 ? s[x - 1] : 0;
      const std::uint8_t r = x + 1 < w ? s[x + 1] : 0;
      d[x] = dilate ? (l | s[x] | r) : (l & s[x] & r);
    }
  }
  for (int y = 0; y < h; ++y) {
    const auto* up = y > 0 ? tmp.row(y - 1) : nullptr;
    const auto* mid = tmp.row(y);
    const auto* dn = y + 1 < h ? tmp.row(y + 1) : nullptr;
    auto* d = out.row(y);
    for (int x = 0; x < w; ++x) {
      const std::uint8_t u = up ? up[x] : 0;
      const std::uint8_t b = dn ? dn[x] : 0;
      d[x] = dilate ? (u | mid[x] | b) : (u & mid[x] & b);
    }
  }
  return out;
}

}  // namespace detail

inline BinaryMask dilate(const BinaryMask& mask, int iterations = 1) {
  require(iterations >= 0, Errc::invalid_argument, "dilate: iterations must be >= 0");
  BinaryMask m = mask;
  for (int i = 0; i < iterations; ++i) m = detail::morph_once(m, true);
  return m;
}

inline BinaryMask erode(const BinaryMask& mask, int iterations = 1) {
  require(iterations >= 0, Errc::invalid_argument, "erode: iterations must be >= 0");
  BinaryMask m = mask;
  for (int i = 0; i < iterations; ++i) m = detail::morph_once(m, false);
  return m;
}

/// Morphological closing: `iterations` dilations then as many erosions.
inline BinaryMask close(const BinaryMask& mask, int iterations = 1) {
  require(iterations >= 1, Errc::invalid_argument, "close: iterations must be >= 1");
  return erode(dilate(mask, iterations), iterations);
}

// ---------------------------------------------------------------------------
// Connected components

struct BBox {
  int x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Region {
  int id = 0;
  long area = 0;
  BBox bbox;
  double cx = 0.0, cy = 0.0;
  bool included = true;

  friend bool operator==(const Region&, const Region&) = default;
};

/// `labels` is 0 for background and k for pixels of regions[k - 1].
struct LabeledRegions {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;
  std::vector<Region> regions;

  std::size_t count() const noexcept { return regions.size(); }
  std::size_t included_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(regions.begin(), regions.end(), [](const Region& r) { return r.included; }));
  }
};

enum class Connectivity { four = 4, eight = 8 };

namespace detail {

struct DisjointSet {
  std::vector<std::int32_t> parent;

  std::int32_t make() {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    return parent.back();
  }
  std::int32_t find(std::int32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  }
};

}  // namespace detail

/// Two-pass union-find labeling. Labels are assigned 1..K in the row-major
/// order in which each component is first encountered.
inline LabeledRegions connected_components(const BinaryMask& mask,
                                           Connectivity conn = Connectivity::eight) {
  const int w = mask.width(), h = mask.height();
  LabeledRegions out{w, h, std::vector<std::int32_t>(mask.size(), 0), {}};
  std::vector<std::int32_t> provisional(mask.size(), -1);
  detail::DisjointSet sets;
  const bool diag = conn == Connectivity::eight;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      std::int32_t nb[4];
      int k = 0;
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || nx >= w || ny < 0) return;
        const std::int32_t l = provisional[static_cast<std::size_t>(ny) * w + nx];
        if (l >= 0) nb[k++] = l;
      };
      visit(x - 1, y);
      visit(x, y - 1);
      if (diag) {
        visit(x - 1, y - 1);
        visit(x + 1, y - 1);
      }
      std::int32_t label;
      if (k == 0) {
        label = sets.make();
      } else {
        label = nb[0];
        for (int i = 1; i < k; ++i) sets.unite(label, nb[i]);
      }
      provisional[static_cast<std::size_t>(y) * w + x] = label;
    }
  }

  std::vector<std::int32_t> final_label(sets.parent.size(), 0);
  struct Acc {
    long area = 0;
    int x0, y0, x1, y1;
    double sx = 0, sy = 0;
  };
  std::vector<Acc> acc;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (provisional[i] < 0) continue;
      const std::int32_t root = sets.find(provisional[i]);
      if (final_label[root] == 0) {
        acc.push_back({0, x, y, x, y});
        final_label[root] = static_cast<std::int32_t>(acc.size());
      }
      const std::int32_t id = final_label[root];
      out.labels[i] = id;
      Acc& a = acc[id - 1];
      ++a.area;
      a.x0 = std::min(a.x0, x);
      a.x1 = std::max(a.x1, x);
      a.y0 = std::min(a.y0, y);
      a.y1 = std::max(a.y1, y);
      a.sx += x;
      a.sy += y;
    }
  }
  out.regions.reserve(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) {
    const Acc& a = acc[k];
    out.regions.push_back({static_cast<int>(k + 1), a.area,
                           BBox{a.x0, a.y0, a.x1 - a.x0 + 1, a.y1 - a.y0 + 1},
                           a.sx / static_cast<double>(a.area), a.sy / static_cast<double>(a.area),
                           true});
  }
  return out;
}

/// Marks regions smaller than `min_area` as excluded; the label map is untouched.
inline LabeledRegions filter_regions(LabeledRegions regions, long min_area) {
  require(min_area >= 0, Errc::invalid_argument, "filter_regions: min_area must be >= 0");
  for (Region& r : regions.regions) r.included = r.area >= min_area;
  return regions;
}

// ---------------------------------------------------------------------------
// Decision

enum class Verdict { negative, positive };

constexpr std::string_view to_string(Verdict v) noexcept {
  return v == Verdict::positive ? "positive" : "negative";
}

inline Verdict parse_verdict(std::string_view s) {
  if (s == "positive") return Verdict::positive;
  if (s == "negative") return Verdict::negative;
  fail(Errc::malformed, "unknown verdict '" + std::string(s) + "'");
}

struct Decision {
  int cord_count = 0;
  int threshold = 10;
  Verdict verdict = Verdict::negative;

  friend bool operator==(const Decision&, const Decision&) = default;
};

inline constexpr int kDefaultThreshold = 10;

/// Positive iff strictly more than `threshold` cords.
inline Decision decide_count(int cord_count, int threshold = kDefaultThreshold) {
  require(threshold >= 0, Errc::invalid_argument, "decision threshold must be >= 0");
  require(cord_count >= 0, Errc::invalid_argument, "cord count must be >= 0");
  return {cord_count, threshold, cord_count > threshold ? Verdict::positive : Verdict::negative};
}

inline Decision decide(std::span<const Region> regions, int threshold = kDefaultThreshold) {
  const auto n = std::count_if(regions.begin(), regions.end(),
                               [](const Region& r) { return r.included; });
  return decide_count(static_cast<int>(n), threshold);
}

inline Decision decide(const LabeledRegions& regions, int threshold = kDefaultThreshold) {
  return decide(std::span<const Region>(regions.regions), threshold);
}

}  // namespace cordseg
