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

#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "cordseg/postprocess.hpp"
#include "oracles.hpp"

namespace cordseg {
namespace {

bool subset(const BinaryMask& a, const BinaryMask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.pixels()[i] && !b.pixels()[i]) return false;
  return true;
}

TEST(Binarize, BoundaryConvention) {
  ProbMap p(3, 1, std::vector<float>{0.49f, 0.5f, 0.51f});
  EXPECT_EQ(binarize(p), BinaryMask(3, 1, std::vector<std::uint8_t>{0, 1, 1}));
  EXPECT_EQ(count_foreground(binarize(ProbMap(4, 4, 0.0f))), 0u);
  EXPECT_EQ(count_foreground(binarize(ProbMap(4, 4, 1.0f))), 16u);
}

TEST(Morphology, ZeroIterationsIsIdentity) {
  std::mt19937_64 rng(1);
  const auto m = oracle::random_mask(9, 7, 0.4, rng);
  EXPECT_EQ(dilate(m, 0), m);
  EXPECT_EQ(erode(m, 0), m);
  EXPECT_THROW(dilate(m, -1), Error);
  EXPECT_THROW(close(m, 0), Error);
}

TEST(Morphology, SinglePixelDilatesToBlock) {
  BinaryMask m(7, 7);
  m.at(3, 3) = 1;
  const auto d = dilate(m);
  EXPECT_EQ(count_foreground(d), 9u);
  for (int y = 2; y <= 4; ++y)
    for (int x = 2; x <= 4; ++x) EXPECT_EQ(d.at(x, y), 1);
  EXPECT_EQ(count_foreground(dilate(m, 2)), 25u);
}

TEST(Morphology, MatchesSetDefinitionOracle) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> dim(1, 24);
  std::uniform_real_distribution<double> dens(0.05, 0.7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = oracle::random_mask(dim(rng), dim(rng), dens(rng), rng);
    ASSERT_EQ(dilate(m), oracle::dilate_set(m)) << trial;
    ASSERT_EQ(erode(m), oracle::erode_set(m)) << trial;
    ASSERT_EQ(close(m), oracle::erode_set(oracle::dilate_set(m))) << trial;
  }
}

TEST(Morphology, ExtensiveAndMonotone) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = oracle::random_mask(16, 12, 0.3, rng);
    auto b = a;  // b ⊇ a
    const auto extra = oracle::random_mask(16, 12, 0.2, rng);
    for (std::size_t i = 0; i < b.size(); ++i) b.pixels()[i] |= extra.pixels()[i];
    EXPECT_TRUE(subset(a, dilate(a)));
    EXPECT_TRUE(subset(erode(a), a));
    EXPECT_TRUE(subset(dilate(a), dilate(b)));
    EXPECT_TRUE(subset(erode(a), erode(b)));
  }
}

TEST(Morphology, ClosingIsExtensiveAwayFromBorder) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = oracle::random_mask(20, 20, 0.3, rng);
    for (int i = 0; i < 20; ++i) m.at(i, 0) = m.at(i, 19) = m.at(0, i) = m.at(19, i) = 0;
    EXPECT_TRUE(subset(m, close(m)));
  }
}

TEST(Close, Examples) {
  BinaryMask two(9, 5);
  two.at(3, 2) = 1;
  two.at(5, 2) = 1;
  EXPECT_EQ(connected_components(two).count(), 2u);
  EXPECT_EQ(connected_components(close(two)).count(), 1u);

  BinaryMask rect(12, 10);
  for (int y = 2; y < 7; ++y)
    for (int x = 3; x < 9; ++x) rect.at(x, y) = 1;
  EXPECT_EQ(close(rect), rect);
  EXPECT_EQ(close(BinaryMask(5, 5)), BinaryMask(5, 5));
}

TEST(ConnectedComponents, Examples) {
  BinaryMask blob(6, 6);
  for (int y = 1; y < 5; ++y)
    for (int x = 1; x < 4; ++x) blob.at(x, y) = 1;
  const auto one = connected_components(blob);
  ASSERT_EQ(one.count(), 1u);
  EXPECT_EQ(one.regions[0].area, 12);
  EXPECT_EQ(one.regions[0].bbox, (BBox{1, 1, 3, 4}));
  EXPECT_DOUBLE_EQ(one.regions[0].cx, 2.0);
  EXPECT_DOUBLE_EQ(one.regions[0].cy, 2.5);

  BinaryMask diag(2, 2, std::vector<std::uint8_t>{1, 0, 0, 1});
  EXPECT_EQ(connected_components(diag, Connectivity::eight).count(), 1u);
  EXPECT_EQ(connected_components(diag, Connectivity::four).count(), 2u);

  const auto none = connected_components(BinaryMask(4, 4));
  EXPECT_EQ(none.count(), 0u);
  EXPECT_TRUE(none.regions.empty());
}

TEST(ConnectedComponents, MergesUShapes) {
  // Two arms that only meet at the bottom need the union step.
  BinaryMask u(5, 4, std::vector<std::uint8_t>{1, 0, 1, 0, 1,  //
                                               1, 0, 1, 0, 1,  //
                                               1, 0, 1, 0, 1,  //
                                               1, 1, 1, 1, 1});
  const auto r = connected_components(u, Connectivity::four);
  EXPECT_EQ(r.count(), 1u);
  EXPECT_EQ(r.regions[0].area, 14);
}

TEST(ConnectedComponents, MatchesFloodFillOracle) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 40);
  std::uniform_real_distribution<double> dens(0.05, 0.75);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = oracle::random_mask(dim(rng), dim(rng), dens(rng), rng);
    for (auto conn : {Connectivity::four, Connectivity::eight}) {
      int k = 0;
      const auto ref = oracle::flood_fill_labels(m, conn == Connectivity::eight, &k);
      const auto got = connected_components(m, conn);
      ASSERT_EQ(static_cast<int>(got.count()), k) << trial;
      ASSERT_TRUE(oracle::same_partition(ref, got.labels)) << trial;
      // Both number components by first row-major encounter, so labels agree exactly.
      ASSERT_TRUE(std::equal(ref.begin(), ref.end(), got.labels.begin())) << trial;
      const long total = std::accumulate(got.regions.begin(), got.regions.end(), 0L,
                                         [](long s, const Region& r) { return s + r.area; });
      ASSERT_EQ(total, static_cast<long>(count_foreground(m)));
      for (std::size_t i = 0; i < got.regions.size(); ++i)
        ASSERT_EQ(got.regions[i].id, static_cast<int>(i + 1));
    }
  }
}

TEST(FilterRegions, Examples) {
  BinaryMask m(20, 10);
  for (int y = 0; y < 1; ++y)
    for (int x = 0; x < 3; ++x) m.at(x, y) = 1;  // area 3
  for (int y = 3; y < 8; ++y)
    for (int x = 5; x < 15; ++x) m.at(x, y) = 1;  // area 50
  const auto r = connected_components(m);
  ASSERT_EQ(r.count(), 2u);
  EXPECT_EQ(filter_regions(r, 0).included_count(), 2u);
  const auto f = filter_regions(r, 10);
  EXPECT_FALSE(f.regions[0].included);
  EXPECT_TRUE(f.regions[1].included);
  EXPECT_EQ(f.labels, r.labels);
  EXPECT_EQ(filter_regions(r, 51).included_count(), 0u);
  EXPECT_THROW(filter_regions(r, -1), Error);
}

TEST(Decide, StrictThreshold) {
  EXPECT_EQ(decide_count(11, 10).verdict, Verdict::positive);
  EXPECT_EQ(decide_count(10, 10).verdict, Verdict::negative);
  EXPECT_EQ(decide_count(0).verdict, Verdict::negative);
  EXPECT_THROW(decide_count(3, -1), Error);

  std::vector<Region> regions(11);
  EXPECT_EQ(decide(regions).verdict, Verdict::positive);
  regions[4].included = false;
  const auto d = decide(regions);
  EXPECT_EQ(d.cord_count, 10);
  EXPECT_EQ(d.verdict, Verdict::negative);
}

TEST(Decide, MonotoneInIncludedRegions) {
  for (int threshold = 0; threshold < 15; ++threshold) {
    std::vector<Region> regions;
    bool was_positive = false;
    for (int n = 0; n < 20; ++n) {
      const bool pos = decide(regions, threshold).verdict == Verdict::positive;
      EXPECT_TRUE(!was_positive || pos);
      was_positive = pos;
      regions.push_back(Region{});
    }
  }
}

TEST(Verdict, StringRoundTrip) {
  EXPECT_EQ(parse_verdict(to_string(Verdict::positive)), Verdict::positive);
  EXPECT_EQ(parse_verdict(to_string(Verdict::negative)), Verdict::negative);
  EXPECT_THROW(parse_verdict("maybe"), Error);
}

}  // namespace
}  // namespace cordseg
