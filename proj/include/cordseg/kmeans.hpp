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
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "cordseg/errors.hpp"
#include "cordseg/image.hpp"

// Intensity-only k-means segmentation, the non-learned baseline. All work is
// done on the 256-bin histogram, which gives the same assignments as a
// per-pixel Lloyd iteration because assignment depends on intensity alone.

namespace cordseg {

struct KMeansOptions {
  int k = 2;
  int max_iters = 50;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  int width = 0;
  int height = 0;
  std::vector<double> initial_centroids;
  std::vector<double> centroids;          // ascending
  std::vector<std::uint8_t> assignment;   // cluster index per pixel, row-major
  std::vector<std::size_t> population;    // pixels per cluster
  std::vector<double> inertia;            // within-cluster sum of squares after each iteration
  int iterations = 0;
  bool converged = false;
};

using Histogram = std::array<std::size_t, 256>;

inline Histogram intensity_histogram(const GrayImage& img) {
  Histogram h{};
  for (auto v : img.pixels()) ++h[v];
  return h;
}

/// k evenly spaced quantiles of the histogram. Colliding quantiles are
/// replaced by distinct intensities drawn with `seed`.
inline std::vector<double> kmeans_initial_centroids(const GrayImage& img, int k, std::uint64_t seed) {
  require(k >= 2 && k <= 255, Errc::invalid_argument, "k must be in [2, 255]");
  require(!img.empty(), Errc::invalid_argument, "kmeans: empty image");
  const Histogram h = intensity_histogram(img);
  std::vector<int> distinct;
  for (int v = 0; v < 256; ++v) {
    if (h[v]) distinct.push_back(v);
  }
  require(static_cast<int>(distinct.size()) >= k, Errc::degenerate_input,
          "image has " + std::to_string(distinct.size()) + " distinct intensities, need " +
              std::to_string(k));

  const double n = static_cast<double>(img.size());
  std::vector<int> picks;
  for (int i = 0; i < k; ++i) {
    const double target = (static_cast<double>(i) + 0.5) / k * n;
    std::size_t cum = 0;
    int v = 0;
    for (; v < 256; ++v) {
      cum += h[v];
      if (static_cast<double>(cum) > target) break;
    }
    picks.push_back(std::min(v, 255));
  }
  std::vector<int> unique_picks;
  for (int p : picks) {
    if (std::find(unique_picks.begin(), unique_picks.end(), p) == unique_picks.end())
      unique_picks.push_back(p);
  }
  if (static_cast<int>(unique_picks.size()) < k) {
    std::vector<int> pool;
    for (int v : distinct) {
      if (std::find(unique_picks.begin(), unique_picks.end(), v) == unique_picks.end())
        pool.push_back(v);
    }
    std::mt19937_64 rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t i = 0; static_cast<int>(unique_picks.size()) < k; ++i)
      unique_picks.push_back(pool[i]);
  }
  std::sort(unique_picks.begin(), unique_picks.end());
  return std::vector<double>(unique_picks.begin(), unique_picks.end());
}

/// Index of the nearest centroid; ties go to the lower index.
inline int nearest_centroid(double v, const std::vector<double>& centroids) {
  int best = 0;
  double bd = std::abs(v - centroids[0]);
  for (int c = 1; c < static_cast<int>(centroids.size()); ++c) {
    const double d = std::abs(v - centroids[c]);
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  return best;
}

inline KMeansResult kmeans_cluster(const GrayImage& img, std::vector<double> centroids,
                                   int max_iters) {
  require(max_iters >= 1, Errc::invalid_argument, "max_iters must be >= 1");
  const int k = static_cast<int>(centroids.size());
  const Histogram h = intensity_histogram(img);
  KMeansResult r;
  r.width = img.width();
  r.height = img.height();
  r.initial_centroids = centroids;

  std::array<int, 256> bin_cluster;
  bin_cluster.fill(-1);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (int v = 0; v < 256; ++v) {
      const int c = nearest_centroid(v, centroids);
      if (c != bin_cluster[v]) {
        changed = changed || h[v] > 0;
        bin_cluster[v] = c;
      }
    }
    if (!changed && it > 0) {
      r.converged = true;
      break;
    }
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (int v = 0; v < 256; ++v) {
      sum[bin_cluster[v]] += static_cast<double>(h[v]) * v;
      cnt[bin_cluster[v]] += h[v];
    }
    for (int c = 0; c < k; ++c) {
      if (cnt[c]) centroids[c] = sum[c] / static_cast<double>(cnt[c]);
    }
    double inertia = 0.0;
    for (int v = 0; v < 256; ++v) {
      const double d = v - centroids[bin_cluster[v]];
      inertia += static_cast<double>(h[v]) * d * d;
    }
    r.inertia.push_back(inertia);
    r.iterations = it + 1;
  }
  if (!r.converged) {
    // Final assignment against the last centroids, as a fixed point check.
    bool changed = false;
    for (int v = 0; v < 256; ++v) {
      const int c = nearest_centroid(v, centroids);
      if (c != bin_cluster[v]) {
        changed = changed || h[v] > 0;
        bin_cluster[v] = c;
      }
    }
    r.converged = !changed;
  }

  // Sort clusters ascending by centroid and remap.
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return centroids[a] < centroids[b]; });
  std::vector<int> rank(k);
  for (int i = 0; i < k; ++i) rank[order[i]] = i;
  r.centroids.resize(k);
  for (int i = 0; i < k; ++i) r.centroids[i] = centroids[order[i]];
  r.population.assign(k, 0);
  r.assignment.resize(img.size());
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const int c = rank[bin_cluster[px[i]]];
    r.assignment[i] = static_cast<std::uint8_t>(c);
    ++r.population[c];
  }
  return r;
}

inline KMeansResult kmeans(const GrayImage& img, const KMeansOptions& opt = {}) {
  return kmeans_cluster(img, kmeans_initial_centroids(img, opt.k, opt.seed), opt.max_iters);
}

/// Foreground is the least populated cluster (cords are sparse); among equal
/// populations the brighter cluster wins.
inline BinaryMask kmeans_segment(const GrayImage& img, const KMeansOptions& opt = {}) {
  const KMeansResult r = kmeans(img, opt);
  int fg = 0;
  for (int c = 1; c < static_cast<int>(r.population.size()); ++c) {
    if (r.population[c] <= r.population[fg]) fg = c;
  }
  BinaryMask m(img.width(), img.height());
  auto out = m.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r.assignment[i] == fg ? 1 : 0;
  return m;
}

}  // namespace cordseg
