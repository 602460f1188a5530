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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cordseg/errors.hpp"
#include "cordseg/tensor.hpp"

namespace cordseg {

/// Dense row-major 2-D raster. The tag keeps grayscale images, binary masks
/// and probability maps from being mixed up even when they share a pixel type.
template <class Pixel, class Tag>
class Raster {
 public:
  using pixel_type = Pixel;

  Raster() = default;
  Raster(int width, int height, Pixel fill = Pixel{})
      : width_(width), height_(height), px_(checked_area(width, height), fill) {}
  Raster(int width, int height, std::vector<Pixel> pixels)
      : width_(width), height_(height), px_(std::move(pixels)) {
    require(px_.size() == checked_area(width, height), Errc::shape_mismatch,
            "pixel buffer does not match " + std::to_string(width) + "x" + std::to_string(height));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return px_.size(); }
  bool empty() const noexcept { return px_.empty(); }

  Pixel& at(int x, int y) noexcept { return px_[static_cast<std::size_t>(y) * width_ + x]; }
  const Pixel& at(int x, int y) const noexcept {
    return px_[static_cast<std::size_t>(y) * width_ + x];
  }
  Pixel* row(int y) noexcept { return px_.data() + static_cast<std::size_t>(y) * width_; }
  const Pixel* row(int y) const noexcept {
    return px_.data() + static_cast<std::size_t>(y) * width_;
  }

  std::span<Pixel> pixels() noexcept { return px_; }
  std::span<const Pixel> pixels() const noexcept { return px_; }

  bool same_dims(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  static std::size_t checked_area(int width, int height) {
    require(width >= 0 && height >= 0, Errc::invalid_argument, "negative raster dims");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Pixel> px_;
};

struct GrayTag {};
struct MaskTag {};
struct ProbTag {};

/// 8-bit grayscale intensities.
using GrayImage = Raster<std::uint8_t, GrayTag>;
/// One byte per pixel, 0 background / 1 cord.
using BinaryMask = Raster<std::uint8_t, MaskTag>;
/// Per-pixel foreground probability in [0, 1].
using ProbMap = Raster<float, ProbTag>;

inline std::size_t count_foreground(const BinaryMask& m) {
  std::size_t n = 0;
  for (auto v : m.pixels()) n += v != 0;
  return n;
}

/// 1 x 1 x h x w tensor with intensities scaled to [0, 1].
inline Tensor image_to_tensor(const GrayImage& img) {
  Tensor t(Shape{1, 1, static_cast<std::size_t>(img.height()), static_cast<std::size_t>(img.width())});
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) t[i] = static_cast<float>(px[i]) / 255.0f;
  return t;
}

inline Tensor mask_to_tensor(const BinaryMask& m) {
  Tensor t(Shape{1, 1, static_cast<std::size_t>(m.height()), static_cast<std::size_t>(m.width())});
  auto px = m.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) t[i] = px[i] ? 1.0f : 0.0f;
  return t;
}

inline ProbMap tensor_to_prob(const Tensor& t) {
  require(t.shape().n == 1 && t.shape().c == 1, Errc::shape_mismatch,
          "tensor_to_prob expects a single-channel tensor");
  return ProbMap(static_cast<int>(t.shape().w), static_cast<int>(t.shape().h),
                 std::vector<float>(t.data().begin(), t.data().end()));
}

}  // namespace cordseg
