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
#include <span>
#include <utility>
#include <vector>

#include "cordseg/errors.hpp"
#include "cordseg/image.hpp"

namespace cordseg {

enum class PadMode { reflect };

/// Non-overlapping decomposition of a width x height image into s x s tiles,
/// emitted row-major. The right and bottom edges are padded up to a multiple of s.
struct TileGrid {
  int width = 0;
  int height = 0;
  int tile = 0;
  int columns = 0;
  int rows = 0;
  int pad_right = 0;
  int pad_bottom = 0;
  PadMode pad_mode = PadMode::reflect;

  static TileGrid make(int width, int height, int tile) {
    require(width > 0 && height > 0, Errc::invalid_argument, "empty image");
    require(tile >= 16, Errc::invalid_argument, "tile side must be >= 16");
    TileGrid g;
    g.width = width;
    g.height = height;
    g.tile = tile;
    g.columns = (width + tile - 1) / tile;
    g.rows = (height + tile - 1) / tile;
    g.pad_right = g.columns * tile - width;
    g.pad_bottom = g.rows * tile - height;
    return g;
  }

  int count() const noexcept { return columns * rows; }
  /// Top-left pixel of tile `index` in original image coordinates.
  std::pair<int, int> origin(int index) const noexcept {
    return {(index % columns) * tile, (index / columns) * tile};
  }

  friend bool operator==(const TileGrid&, const TileGrid&) = default;
};

/// Mirror index into [0, n) without repeating the edge sample; periodic so
/// any padding width works even when it exceeds n.
constexpr int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int r = i % period;
  if (r < 0) r += period;
  return r < n ? r : period - r;
}

template <class R>
struct TileSet {
  TileGrid grid;
  std::vector<R> tiles;
};

template <class R>
TileSet<R> split(const R& image, int tile) {
  require(!image.empty(), Errc::invalid_argument, "split: empty image");
  TileSet<R> out{TileGrid::make(image.width(), image.height(), tile), {}};
  const TileGrid& g = out.grid;
  out.tiles.reserve(g.count());
  for (int i = 0; i < g.count(); ++i) {
    const auto [ox, oy] = g.origin(i);
    R t(tile, tile);
    for (int y = 0; y < tile; ++y) {
      const int sy = reflect_index(oy + y, image.height());
      const auto* src = image.row(sy);
      auto* dst = t.row(y);
      for (int x = 0; x < tile; ++x) dst[x] = src[reflect_index(ox + x, image.width())];
    }
    out.tiles.push_back(std::move(t));
  }
  return out;
}

/// Places each tile at its origin and crops the padding away.
template <class R>
R stitch(const TileGrid& grid, std::span<const R> tiles) {
  require(static_cast<int>(tiles.size()) == grid.count(), Errc::shape_mismatch,
          "stitch: expected " + std::to_string(grid.count()) + " tiles, got " +
              std::to_string(tiles.size()));
  R out(grid.width, grid.height);
  for (int i = 0; i < grid.count(); ++i) {
    const R& t = tiles[i];
    require(t.width() == grid.tile && t.height() == grid.tile, Errc::shape_mismatch,
            "stitch: tile " + std::to_string(i) + " has wrong side");
    const auto [ox, oy] = grid.origin(i);
    const int h = std::min(grid.tile, grid.height - oy);
    const int w = std::min(grid.tile, grid.width - ox);
    for (int y = 0; y < h; ++y) std::copy_n(t.row(y), w, out.row(oy + y) + ox);
  }
  return out;
}

template <class R>
R stitch(const TileGrid& grid, const std::vector<R>& tiles) {
  return stitch<R>(grid, std::span<const R>(tiles));
}

}  // namespace cordseg
