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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "cordseg/tiling.hpp"

namespace cordseg {
namespace {

GrayImage random_image(int w, int h, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 255);
  GrayImage img(w, h);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(d(rng));
  return img;
}

TEST(TileGrid, FullResolutionMicroscopeFrame) {
  const auto g = TileGrid::make(3840, 2700, 256);
  EXPECT_EQ(g.columns, 15);
  EXPECT_EQ(g.rows, 11);
  EXPECT_EQ(g.pad_right, 0);
  EXPECT_EQ(g.pad_bottom, 116);
  EXPECT_EQ(g.count(), 165);
  EXPECT_EQ(g.origin(16), (std::pair{256, 256}));
}

TEST(TileGrid, ExactDivisionAndErrors) {
  const auto g = TileGrid::make(512, 512, 256);
  EXPECT_EQ(g.columns, 2);
  EXPECT_EQ(g.rows, 2);
  EXPECT_EQ(g.pad_right, 0);
  EXPECT_EQ(g.pad_bottom, 0);
  EXPECT_THROW(TileGrid::make(0, 10, 16), Error);
  EXPECT_THROW(TileGrid::make(10, 10, 8), Error);
}

TEST(ReflectIndex, MirrorsWithoutRepeatingEdge) {
  EXPECT_EQ(reflect_index(-1, 5), 1);
  EXPECT_EQ(reflect_index(5, 5), 3);
  EXPECT_EQ(reflect_index(6, 5), 2);
  EXPECT_EQ(reflect_index(8, 5), 0);
  EXPECT_EQ(reflect_index(9, 5), 1);  // periodic past a full mirror
  EXPECT_EQ(reflect_index(7, 1), 0);
}

TEST(Split, SingleTileIsIdentity) {
  std::mt19937_64 rng(1);
  const auto img = random_image(256, 256, rng);
  const auto ts = split(img, 256);
  ASSERT_EQ(ts.tiles.size(), 1u);
  EXPECT_EQ(ts.tiles[0], img);
}

TEST(Split, PaddingReflectsEdges) {
  std::mt19937_64 rng(2);
  const auto img = random_image(20, 18, rng);
  const auto ts = split(img, 16);
  ASSERT_EQ(ts.tiles.size(), 4u);
  const auto& br = ts.tiles[3];  // origin (16, 16)
  // Column 20 (local 4) mirrors column 18; row 18 (local 2) mirrors row 16.
  EXPECT_EQ(br.at(4, 0), img.at(18, 16));
  EXPECT_EQ(br.at(0, 2), img.at(16, 16));
  EXPECT_EQ(br.at(5, 3), img.at(17, 15));
}

TEST(Split, PaddingWiderThanImage) {
  // Padding wider than the image still works thanks to the periodic mirror.
  std::mt19937_64 rng(3);
  const auto img = random_image(3, 2, rng);
  const auto ts = split(img, 16);
  ASSERT_EQ(ts.tiles.size(), 1u);
  EXPECT_EQ(stitch(ts.grid, ts.tiles), img);
}

TEST(Stitch, RoundTripOnFullFrame) {
  std::mt19937_64 rng(4);
  const auto img = random_image(3840, 2700, rng);
  const auto ts = split(img, 256);
  EXPECT_EQ(stitch(ts.grid, ts.tiles), img);
}

TEST(Stitch, RoundTripRandomDims) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 300), side(16, 80);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = dim(rng), h = dim(rng), s = side(rng);
    const auto img = random_image(w, h, rng);
    const auto ts = split(img, s);
    ASSERT_EQ(stitch(ts.grid, ts.tiles), img) << w << "x" << h << " s=" << s;
  }
}

TEST(Stitch, SinglePixelMapsToGlobalCoordinates) {
  const auto grid = TileGrid::make(100, 70, 32);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> ti(0, grid.count() - 1), loc(0, 31);
    std::vector<BinaryMask> masks(grid.count(), BinaryMask(32, 32));
    const int t = ti(rng), lx = loc(rng), ly = loc(rng);
    masks[t].at(lx, ly) = 1;
    const auto full = stitch(grid, masks);
    const auto [ox, oy] = grid.origin(t);
    const int gx = ox + lx, gy = oy + ly;
    const std::size_t expected = (gx < 100 && gy < 70) ? 1 : 0;
    EXPECT_EQ(count_foreground(full), expected);
    if (expected) {
      EXPECT_EQ(full.at(gx, gy), 1);
    }
  }
}

TEST(Stitch, ZeroTilesGiveZeroMask) {
  const auto grid = TileGrid::make(50, 40, 16);
  std::vector<BinaryMask> masks(grid.count(), BinaryMask(16, 16));
  EXPECT_EQ(stitch(grid, masks), BinaryMask(50, 40));
}

TEST(Stitch, OrderInsensitiveGivenOrigins) {
  // Building the tiles in reverse and putting them back by index gives the same image.
  std::mt19937_64 rng(7);
  const auto img = random_image(70, 50, rng);
  const auto ts = split(img, 32);
  std::vector<GrayImage> rebuilt(ts.tiles.size());
  for (int i = ts.grid.count() - 1; i >= 0; --i) rebuilt[i] = ts.tiles[i];
  EXPECT_EQ(stitch(ts.grid, rebuilt), img);
}

TEST(Stitch, Errors) {
  const auto grid = TileGrid::make(50, 40, 16);
  std::vector<BinaryMask> few(grid.count() - 1, BinaryMask(16, 16));
  EXPECT_THROW(stitch(grid, few), Error);
  std::vector<BinaryMask> wrong(grid.count(), BinaryMask(16, 15));
  EXPECT_THROW(stitch(grid, wrong), Error);
  EXPECT_THROW(split(GrayImage(), 16), Error);
}

}  // namespace
}  // namespace cordseg
