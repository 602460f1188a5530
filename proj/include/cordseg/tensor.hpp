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
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cordseg/errors.hpp"

namespace cordseg {

/// (batch, channels, height, width)
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  constexpr std::size_t size() const noexcept { return n * c * h * w; }
  constexpr std::size_t plane() const noexcept { return h * w; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
         std::to_string(s.w) + ")";
}

/// Dense rank-4 array, row-major over (n, c, h, w).
template <class T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T{}) : shape_(shape), data_(shape.size(), fill) {}
  BasicTensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    require(data_.size() == shape_.size(), Errc::shape_mismatch,
            "data length " + std::to_string(data_.size()) + " does not match shape " +
                to_string(shape_));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::size_t index(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) noexcept {
    return data_[index(n, c, y, x)];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return data_[index(n, c, y, x)];
  }

  T* plane(std::size_t n, std::size_t c) noexcept { return data_.data() + index(n, c, 0, 0); }
  const T* plane(std::size_t n, std::size_t c) const noexcept {
    return data_.data() + index(n, c, 0, 0);
  }

  template <class U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(shape_, std::move(out));
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  Shape shape_{};
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

/// Convolution kernel (out_ch, in_ch, kh, kw) and per-output-channel bias.
template <class T>
struct BasicConvParams {
  BasicTensor<T> kernel;
  std::vector<T> bias;

  BasicConvParams() = default;
  BasicConvParams(BasicTensor<T> k, std::vector<T> b) : kernel(std::move(k)), bias(std::move(b)) {
    validate();
  }
  BasicConvParams(std::size_t out_ch, std::size_t in_ch, std::size_t kh, std::size_t kw)
      : kernel(Shape{out_ch, in_ch, kh, kw}), bias(out_ch, T{}) {
    validate();
  }

  std::size_t out_channels() const noexcept { return kernel.shape().n; }
  std::size_t in_channels() const noexcept { return kernel.shape().c; }
  std::size_t kh() const noexcept { return kernel.shape().h; }
  std::size_t kw() const noexcept { return kernel.shape().w; }

  void validate() const {
    const Shape& s = kernel.shape();
    require(s.h >= 1 && s.h <= 3 && s.w >= 1 && s.w <= 3, Errc::invalid_argument,
            "kernel side must be 1, 2 or 3, got " + to_string(s));
    require(bias.size() == s.n, Errc::shape_mismatch, "bias length does not match out channels");
  }

  template <class U>
  BasicConvParams<U> cast() const {
    return BasicConvParams<U>(kernel.template cast<U>(), std::vector<U>(bias.begin(), bias.end()));
  }

  friend bool operator==(const BasicConvParams&, const BasicConvParams&) = default;
};

using ConvParams = BasicConvParams<float>;

enum class Padding { same, valid };

// ---------------------------------------------------------------------------
// conv2d

namespace detail {

struct ConvGeometry {
  std::size_t out_h, out_w;
  std::ptrdiff_t pad_top, pad_left;
};

inline ConvGeometry conv_geometry(const Shape& in, std::size_t kh, std::size_t kw, Padding padding) {
  require(in.h > 0 && in.w > 0, Errc::invalid_argument, "empty spatial dims " + to_string(in));
  if (padding == Padding::same) {
    return {in.h, in.w, static_cast<std::ptrdiff_t>((kh - 1) / 2),
            static_cast<std::ptrdiff_t>((kw - 1) / 2)};
  }
  require(in.h >= kh && in.w >= kw, Errc::invalid_argument,
          "input smaller than kernel for valid padding " + to_string(in));
  return {in.h - kh + 1, in.w - kw + 1, 0, 0};
}

// Half-open range of output coordinates o with 0 <= o + offset < limit.
inline std::pair<std::size_t, std::size_t> overlap(std::ptrdiff_t offset, std::size_t out,
                                                   std::size_t limit) {
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -offset);
  const std::ptrdiff_t hi =
      std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(out),
                               static_cast<std::ptrdiff_t>(limit) - offset);
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace detail

template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicConvParams<T>& params,
                      Padding padding = Padding::same) {
  const Shape& in = input.shape();
  require(in.c == params.in_channels(), Errc::shape_mismatch,
          "conv2d: input has " + std::to_string(in.c) + " channels, kernel expects " +
              std::to_string(params.in_channels()));
  const std::size_t kh = params.kh(), kw = params.kw();
  const auto g = detail::conv_geometry(in, kh, kw, padding);
  const std::size_t oc_count = params.out_channels();
  BasicTensor<T> out(Shape{in.n, oc_count, g.out_h, g.out_w});

  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t oc = 0; oc < oc_count; ++oc) {
      T* o = out.plane(n, oc);
      std::fill(o, o + g.out_h * g.out_w, params.bias[oc]);
      for (std::size_t ic = 0; ic < in.c; ++ic) {
        const T* ip = input.plane(n, ic);
        for (std::size_t ky = 0; ky < kh; ++ky) {
          const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - g.pad_top;
          const auto [y0, y1] = detail::overlap(dy, g.out_h, in.h);
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - g.pad_left;
            const auto [x0, x1] = detail::overlap(dx, g.out_w, in.w);
            const T wv = params.kernel.at(oc, ic, ky, kx);
            for (std::size_t y = y0; y < y1; ++y) {
              T* orow = o + y * g.out_w;
              const T* irow = ip + static_cast<std::ptrdiff_t>((y + dy) * in.w) + dx;
              for (std::size_t x = x0; x < x1; ++x) orow[x] += wv * irow[x];
            }
          }
        }
      }
    }
  }
  return out;
}

template <class T>
struct BasicConvGrads {
  BasicTensor<T> input;
  BasicTensor<T> kernel;
  std::vector<T> bias;
};

/// Gradients of conv2d w.r.t. its input, kernel and bias given dL/d(out).
template <class T>
BasicConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicConvParams<T>& params,
                                  const BasicTensor<T>& grad_out, Padding padding = Padding::same) {
  const Shape& in = input.shape();
  require(in.c == params.in_channels(), Errc::shape_mismatch, "conv2d_backward: channel mismatch");
  const std::size_t kh = params.kh(), kw = params.kw();
  const auto g = detail::conv_geometry(in, kh, kw, padding);
  const Shape expect{in.n, params.out_channels(), g.out_h, g.out_w};
  require(grad_out.shape() == expect, Errc::shape_mismatch,
          "conv2d_backward: grad_out " + to_string(grad_out.shape()) + " expected " +
              to_string(expect));

  BasicConvGrads<T> grads{BasicTensor<T>(in), BasicTensor<T>(params.kernel.shape()),
                          std::vector<T>(params.out_channels(), T{})};
  std::vector<T> acc(g.out_w);

  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t oc = 0; oc < params.out_channels(); ++oc) {
      const T* go = grad_out.plane(n, oc);
      T bsum{};
      for (std::size_t i = 0; i < g.out_h * g.out_w; ++i) bsum += go[i];
      grads.bias[oc] += bsum;

      for (std::size_t ic = 0; ic < in.c; ++ic) {
        const T* ip = input.plane(n, ic);
        T* gi = grads.input.plane(n, ic);
        for (std::size_t ky = 0; ky < kh; ++ky) {
          const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - g.pad_top;
          const auto [y0, y1] = detail::overlap(dy, g.out_h, in.h);
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - g.pad_left;
            const auto [x0, x1] = detail::overlap(dx, g.out_w, in.w);
            const T wv = params.kernel.at(oc, ic, ky, kx);
            std::fill(acc.begin(), acc.end(), T{});
            for (std::size_t y = y0; y < y1; ++y) {
              const T* gorow = go + y * g.out_w;
              const std::ptrdiff_t off = static_cast<std::ptrdiff_t>((y + dy) * in.w) + dx;
              const T* irow = ip + off;
              T* girow = gi + off;
              for (std::size_t x = x0; x < x1; ++x) {
                acc[x] += gorow[x] * irow[x];
                girow[x] += wv * gorow[x];
              }
            }
            T ksum{};
            for (std::size_t x = x0; x < x1; ++x) ksum += acc[x];
            grads.kernel.at(oc, ic, ky, kx) += ksum;
          }
        }
      }
    }
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Elementwise activations

template <class T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
  BasicTensor<T> out = input;
  for (T& v : out.data()) v = v > T{} ? v : T{};
  return out;
}

/// Passes grad_out where the forward input was strictly positive.
template <class T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& grad_out) {
  require(input.shape() == grad_out.shape(), Errc::shape_mismatch, "relu_backward: shape mismatch");
  BasicTensor<T> g(input.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = input[i] > T{} ? grad_out[i] : T{};
  return g;
}

template <class T>
T sigmoid_scalar(T x) noexcept {
  if (x >= T{}) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <class T>
BasicTensor<T> sigmoid(const BasicTensor<T>& input) {
  BasicTensor<T> out(input.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(input[i]);
  return out;
}

/// Takes the forward *output* p; d(sigmoid)/dx = p (1 - p).
template <class T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& output, const BasicTensor<T>& grad_out) {
  require(output.shape() == grad_out.shape(), Errc::shape_mismatch,
          "sigmoid_backward: shape mismatch");
  BasicTensor<T> g(output.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_out[i] * output[i] * (T(1) - output[i]);
  return g;
}

// ---------------------------------------------------------------------------
// 2x2 max pooling

/// Flat input index of the winning element of each pooling window.
struct ArgmaxRecord {
  Shape input_shape;
  std::vector<std::uint32_t> index;
};

template <class T>
struct BasicPoolResult {
  BasicTensor<T> output;
  ArgmaxRecord argmax;
};

template <class T>
BasicPoolResult<T> maxpool2x2(const BasicTensor<T>& input) {
  const Shape& in = input.shape();
  require(in.h % 2 == 0 && in.w % 2 == 0, Errc::invalid_argument,
          "maxpool2x2 needs even spatial dims, got " + to_string(in));
  const Shape os{in.n, in.c, in.h / 2, in.w / 2};
  BasicPoolResult<T> r{BasicTensor<T>(os), ArgmaxRecord{in, std::vector<std::uint32_t>(os.size())}};
  std::size_t o = 0;
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t c = 0; c < in.c; ++c) {
      for (std::size_t y = 0; y < os.h; ++y) {
        for (std::size_t x = 0; x < os.w; ++x, ++o) {
          std::size_t best = input.index(n, c, 2 * y, 2 * x);
          const std::size_t cand[3] = {best + 1, best + in.w, best + in.w + 1};
          for (std::size_t k : cand) {
            if (input[k] > input[best]) best = k;
          }
          r.output[o] = input[best];
          r.argmax.index[o] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }
  return r;
}

/// Routes each window's gradient entirely to its recorded argmax.
template <class T>
BasicTensor<T> maxpool2x2_backward(const ArgmaxRecord& argmax, const BasicTensor<T>& grad_out) {
  require(grad_out.size() == argmax.index.size(), Errc::shape_mismatch,
          "maxpool2x2_backward: grad_out does not match argmax record");
  BasicTensor<T> g(argmax.input_shape);
  for (std::size_t i = 0; i < grad_out.size(); ++i) g[argmax.index[i]] += grad_out[i];
  return g;
}

// ---------------------------------------------------------------------------
// 2x2 stride-2 transposed convolution

template <class T>
BasicTensor<T> upconv2x2(const BasicTensor<T>& input, const BasicConvParams<T>& params) {
  const Shape& in = input.shape();
  require(params.kh() == 2 && params.kw() == 2, Errc::invalid_argument,
          "upconv2x2 needs a 2x2 kernel");
  require(in.c == params.in_channels(), Errc::shape_mismatch, "upconv2x2: channel mismatch");
  const std::size_t oh = 2 * in.h, ow = 2 * in.w;
  BasicTensor<T> out(Shape{in.n, params.out_channels(), oh, ow});
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t oc = 0; oc < params.out_channels(); ++oc) {
      T* o = out.plane(n, oc);
      std::fill(o, o + oh * ow, params.bias[oc]);
      for (std::size_t ic = 0; ic < in.c; ++ic) {
        const T* ip = input.plane(n, ic);
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const T wv = params.kernel.at(oc, ic, dy, dx);
            for (std::size_t y = 0; y < in.h; ++y) {
              T* orow = o + (2 * y + dy) * ow + dx;
              const T* irow = ip + y * in.w;
              for (std::size_t x = 0; x < in.w; ++x) orow[2 * x] += wv * irow[x];
            }
          }
        }
      }
    }
  }
  return out;
}

template <class T>
BasicConvGrads<T> upconv2x2_backward(const BasicTensor<T>& input, const BasicConvParams<T>& params,
                                     const BasicTensor<T>& grad_out) {
  const Shape& in = input.shape();
  require(in.c == params.in_channels() && params.kh() == 2 && params.kw() == 2,
          Errc::shape_mismatch, "upconv2x2_backward: parameter mismatch");
  const std::size_t oh = 2 * in.h, ow = 2 * in.w;
  require(grad_out.shape() == Shape{in.n, params.out_channels(), oh, ow}, Errc::shape_mismatch,
          "upconv2x2_backward: grad_out shape mismatch");
  BasicConvGrads<T> grads{BasicTensor<T>(in), BasicTensor<T>(params.kernel.shape()),
                          std::vector<T>(params.out_channels(), T{})};
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t oc = 0; oc < params.out_channels(); ++oc) {
      const T* go = grad_out.plane(n, oc);
      T bsum{};
      for (std::size_t i = 0; i < oh * ow; ++i) bsum += go[i];
      grads.bias[oc] += bsum;
      for (std::size_t ic = 0; ic < in.c; ++ic) {
        const T* ip = input.plane(n, ic);
        T* gi = grads.input.plane(n, ic);
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const T wv = params.kernel.at(oc, ic, dy, dx);
            T ksum{};
            for (std::size_t y = 0; y < in.h; ++y) {
              const T* gorow = go + (2 * y + dy) * ow + dx;
              const T* irow = ip + y * in.w;
              T* girow = gi + y * in.w;
              for (std::size_t x = 0; x < in.w; ++x) {
                ksum += gorow[2 * x] * irow[x];
                girow[x] += wv * gorow[2 * x];
              }
            }
            grads.kernel.at(oc, ic, dy, dx) += ksum;
          }
        }
      }
    }
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Channel concatenation (skip connections)

template <class T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  require(sa.n == sb.n && sa.h == sb.h && sa.w == sb.w, Errc::shape_mismatch,
          "concat_channels: " + to_string(sa) + " vs " + to_string(sb));
  BasicTensor<T> out(Shape{sa.n, sa.c + sb.c, sa.h, sa.w});
  const std::size_t plane = sa.plane();
  for (std::size_t n = 0; n < sa.n; ++n) {
    if (sa.c > 0) std::copy_n(a.plane(n, 0), sa.c * plane, out.plane(n, 0));
    if (sb.c > 0) std::copy_n(b.plane(n, 0), sb.c * plane, out.plane(n, sa.c));
  }
  return out;
}

/// Channels [begin, begin + count) of `t`.
template <class T>
BasicTensor<T> slice_channels(const BasicTensor<T>& t, std::size_t begin, std::size_t count) {
  const Shape& s = t.shape();
  require(begin + count <= s.c, Errc::shape_mismatch, "slice_channels out of range");
  BasicTensor<T> out(Shape{s.n, count, s.h, s.w});
  for (std::size_t n = 0; n < s.n; ++n) {
    if (count > 0) std::copy_n(t.plane(n, begin), count * s.plane(), out.plane(n, 0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loss

template <class T>
struct BasicLoss {
  T value{};
  BasicTensor<T> grad;  // dL/d(pred)
};

inline constexpr double kBceClamp = 1e-7;

/// Mean pixelwise binary cross-entropy with predictions clamped to [eps, 1 - eps].
template <class T>
BasicLoss<T> bce_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
  require(pred.shape() == target.shape(), Errc::shape_mismatch,
          "bce_loss: " + to_string(pred.shape()) + " vs " + to_string(target.shape()));
  require(!pred.empty(), Errc::invalid_argument, "bce_loss: empty tensor");
  const T eps = static_cast<T>(kBceClamp);
  const T inv_n = T(1) / static_cast<T>(pred.size());
  BasicLoss<T> r{T{}, BasicTensor<T>(pred.shape())};
  // Accumulate the sum in double so the loss value is order-insensitive at tile scale.
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T p = std::clamp(pred[i], eps, T(1) - eps);
    const T t = target[i];
    sum += -(static_cast<double>(t) * std::log(static_cast<double>(p)) +
             (1.0 - static_cast<double>(t)) * std::log(1.0 - static_cast<double>(p)));
    r.grad[i] = -(t / p - (T(1) - t) / (T(1) - p)) * inv_n;
  }
  r.value = static_cast<T>(sum / static_cast<double>(pred.size()));
  return r;
}

// ---------------------------------------------------------------------------
// Adaptive-moment optimizer

template <class T>
struct BasicOptimState {
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
  std::uint64_t step = 0;
};

using OptimState = BasicOptimState<float>;

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected update over a list of flat parameter buffers. The state
/// is sized lazily on the first call and shape-checked on every later one.
template <class T>
void adam_step(std::span<const std::span<T>> params, std::span<const std::span<const T>> grads,
               BasicOptimState<T>& state, const AdamOptions& opt) {
  require(params.size() == grads.size(), Errc::shape_mismatch, "adam_step: param/grad count");
  if (state.step == 0 && state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), T{});
      state.second_moment.emplace_back(p.size(), T{});
    }
  }
  require(state.first_moment.size() == params.size() &&
              state.second_moment.size() == params.size(),
          Errc::shape_mismatch, "adam_step: state does not match parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i].size() == grads[i].size() && state.first_moment[i].size() == params[i].size() &&
                state.second_moment[i].size() == params[i].size(),
            Errc::shape_mismatch, "adam_step: buffer " + std::to_string(i) + " size mismatch");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(opt.beta1), b2 = static_cast<T>(opt.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(opt.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(opt.beta2, t));
  const T lr = static_cast<T>(opt.lr), eps = static_cast<T>(opt.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::span<T> p = params[i];
    std::span<const T> g = grads[i];
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const T mhat = m[j] / c1;
      const T vhat = v[j] / c2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace cordseg
