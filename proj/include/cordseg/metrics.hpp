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
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cordseg/errors.hpp"
#include "cordseg/image.hpp"
#include "cordseg/postprocess.hpp"

namespace cordseg {

/// A mask packed 64 pixels per word, row-major; trailing bits of the last word are zero.
class PackedMask {
 public:
  explicit PackedMask(const BinaryMask& m) : width_(m.width()), height_(m.height()) {
    auto px = m.pixels();
    words_.assign((px.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (px[i]) words_[i / 64] |= std::uint64_t{1} << (i % 64);
    }
  }

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

 private:
  int width_, height_;
  std::vector<std::uint64_t> words_;
};

struct OverlapCounts {
  std::size_t intersection = 0;
  std::size_t union_ = 0;
  std::size_t disagree = 0;
  std::size_t total = 0;
};

inline OverlapCounts overlap_counts(const BinaryMask& pred, const BinaryMask& gt) {
  require(pred.same_dims(gt), Errc::shape_mismatch, "mask dimensions differ");
  const PackedMask a(pred), b(gt);
  OverlapCounts c;
  c.total = pred.size();
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    const std::uint64_t x = a.words()[i], y = b.words()[i];
    c.intersection += static_cast<std::size_t>(std::popcount(x & y));
    c.union_ += static_cast<std::size_t>(std::popcount(x | y));
    c.disagree += static_cast<std::size_t>(std::popcount(x ^ y));
  }
  return c;
}

/// Jaccard index. Two empty masks agree perfectly and score 1.
inline double iou(const BinaryMask& pred, const BinaryMask& gt) {
  const auto c = overlap_counts(pred, gt);
  if (c.union_ == 0) return 1.0;
  return static_cast<double>(c.intersection) / static_cast<double>(c.union_);
}

inline double pixel_accuracy(const BinaryMask& pred, const BinaryMask& gt) {
  const auto c = overlap_counts(pred, gt);
  if (c.total == 0) return 1.0;
  return 1.0 - static_cast<double>(c.disagree) / static_cast<double>(c.total);
}

inline double case_accuracy(std::span<const Verdict> verdicts, std::span<const Verdict> labels) {
  require(verdicts.size() == labels.size(), Errc::shape_mismatch,
          "case_accuracy: verdict and label counts differ");
  require(!verdicts.empty(), Errc::invalid_argument, "case_accuracy: no cases");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) ok += verdicts[i] == labels[i];
  return static_cast<double>(ok) / static_cast<double>(verdicts.size());
}

inline double case_accuracy(std::span<const Decision> decisions, std::span<const Verdict> labels) {
  std::vector<Verdict> v;
  v.reserve(decisions.size());
  for (const auto& d : decisions) v.push_back(d.verdict);
  return case_accuracy(std::span<const Verdict>(v), labels);
}

/// Mean and per-image sample standard deviation of IoU, plus case accuracy
/// when labelled decisions are supplied.
struct EvalSummary {
  std::vector<double> ious;
  double mean = 0.0;
  double stddev = 0.0;
  bool degenerate = false;  // fewer than two samples; stddev forced to 0
  std::size_t both_empty = 0;
  std::optional<double> pixel_accuracy;
  std::optional<double> case_accuracy;
};

inline EvalSummary summarize(std::span<const double> ious, std::span<const Decision> decisions = {},
                             std::span<const Verdict> labels = {}) {
  require(!ious.empty(), Errc::invalid_argument, "summarize: empty IoU list");
  EvalSummary s;
  s.ious.assign(ious.begin(), ious.end());
  // Summing in sorted order makes the mean independent of list order.
  std::vector<double> sorted(ious.begin(), ious.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(ious.size());
  if (ious.size() < 2) {
    s.degenerate = true;
  } else {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(ious.size() - 1));
  }
  if (!decisions.empty() || !labels.empty()) s.case_accuracy = case_accuracy(decisions, labels);
  return s;
}

}  // namespace cordseg
