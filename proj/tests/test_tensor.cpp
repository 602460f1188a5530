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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cordseg/tensor.hpp"
#include "oracles.hpp"

namespace cordseg {
namespace {

Tensor make(Shape s, std::vector<float> v) { return Tensor(s, std::move(v)); }

// ---------------------------------------------------------------------------
// conv2d

TEST(Conv2d, DeltaKernelIsIdentity) {
  Tensor in = make({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  ConvParams p(1, 1, 3, 3);
  p.kernel.at(0, 0, 1, 1) = 1.0f;
  EXPECT_EQ(conv2d(in, p), in);
}

TEST(Conv2d, OnesKernelCountsNeighbours) {
  Tensor in({1, 1, 4, 4}, 1.0f);
  ConvParams p(1, 1, 3, 3);
  for (auto& v : p.kernel.data()) v = 1.0f;
  // Frozen from the six-loop oracle: corners see 4 pixels, edges 6, interior 9.
  const std::vector<float> expected = {4, 6, 6, 4, 6, 9, 9, 6, 6, 9, 9, 6, 4, 6, 6, 4};
  EXPECT_EQ(oracle::conv2d_same(in, p).storage(), expected);
  EXPECT_EQ(conv2d(in, p).storage(), expected);
}

TEST(Conv2d, ZeroKernelYieldsBias) {
  std::mt19937_64 rng(3);
  Tensor in = oracle::random_tensor<float>({1, 2, 5, 4}, rng);
  ConvParams p(3, 2, 3, 3);
  p.bias = {0.25f, -1.5f, 2.0f};
  Tensor out = conv2d(in, p);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(out.plane(0, c)[i], p.bias[c]);
}

TEST(Conv2d, Errors) {
  ConvParams p(1, 2, 3, 3);
  Tensor wrong_channels({1, 1, 4, 4});
  try {
    conv2d(wrong_channels, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::shape_mismatch);
  }
  Tensor empty({1, 2, 0, 4});
  try {
    conv2d(empty, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_argument);
  }
}

TEST(Conv2d, ValidPaddingShrinks) {
  std::mt19937_64 rng(9);
  Tensor in = oracle::random_tensor<float>({1, 1, 6, 5}, rng);
  auto p = oracle::random_conv<float>(2, 1, 3, rng);
  Tensor valid = conv2d(in, p, Padding::valid);
  EXPECT_EQ(valid.shape(), (Shape{1, 2, 4, 3}));
  // Interior of the same-padded output equals the valid output.
  Tensor same = conv2d(in, p, Padding::same);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 3; ++x) EXPECT_EQ(valid.at(0, c, y, x), same.at(0, c, y + 1, x + 1));
}

TEST(Conv2d, MatchesOracleOnRandomShapes) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    std::uniform_int_distribution<int> dim(1, 9), ch(1, 3), ks(1, 3);
    const Shape s{1, static_cast<std::size_t>(ch(rng)), static_cast<std::size_t>(dim(rng)),
                  static_cast<std::size_t>(dim(rng))};
    const std::size_t k = static_cast<std::size_t>(ks(rng));
    Tensor in = oracle::random_tensor<float>(s, rng);
    auto p = oracle::random_conv<float>(static_cast<std::size_t>(ch(rng)), s.c, k, rng);
    Tensor out = conv2d(in, p);
    ASSERT_EQ(out.shape(), (Shape{1, p.out_channels(), s.h, s.w}));
    EXPECT_LE(oracle::max_abs_diff(out, oracle::conv2d_same(in, p)), 1e-6) << "trial " << trial;
  }
}

// ---------------------------------------------------------------------------
// Activations

TEST(Relu, Examples) {
  EXPECT_EQ(relu(make({1, 1, 1, 3}, {-1, 0, 2})).storage(), (std::vector<float>{0, 0, 2}));
  EXPECT_EQ(relu(Tensor({1, 2, 3, 3}, -0.5f)), Tensor({1, 2, 3, 3}, 0.0f));
  std::mt19937_64 rng(5);
  Tensor pos = oracle::random_tensor<float>({1, 2, 4, 4}, rng, 0.0, 1.0);
  EXPECT_EQ(relu(pos), pos);
}

TEST(Relu, BackwardMasksNonPositiveInputs) {
  Tensor in = make({1, 1, 1, 4}, {-1, 0, 0.5f, 3});
  Tensor g = make({1, 1, 1, 4}, {10, 20, 30, 40});
  EXPECT_EQ(relu_backward(in, g).storage(), (std::vector<float>{0, 0, 30, 40}));
}

TEST(Sigmoid, Examples) {
  EXPECT_EQ(sigmoid(Tensor({1, 1, 1, 1}, 0.0f))[0], 0.5f);
  EXPECT_GT(sigmoid(Tensor({1, 1, 1, 1}, 20.0f))[0], 0.999999f);
  std::mt19937_64 rng(8);
  Tensor x = oracle::random_tensor<float>({1, 1, 8, 8}, rng, -6.0, 6.0);
  Tensor neg = x;
  for (auto& v : neg.data()) v = -v;
  Tensor a = sigmoid(x), b = sigmoid(neg);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(b[i], 1.0f - a[i], 1e-7);
    EXPECT_GT(a[i], 0.0f);
    EXPECT_LT(a[i], 1.0f);
  }
}

// ---------------------------------------------------------------------------
// Pooling

TEST(MaxPool, Examples) {
  auto r = maxpool2x2(make({1, 1, 2, 2}, {1, 2, 3, 4}));
  EXPECT_EQ(r.output.storage(), (std::vector<float>{4}));
  EXPECT_EQ(r.argmax.index, (std::vector<std::uint32_t>{3}));
  EXPECT_EQ(maxpool2x2(Tensor({1, 3, 4, 6}, 2.5f)).output, Tensor({1, 3, 2, 3}, 2.5f));
}

TEST(MaxPool, RejectsOddDims) {
  EXPECT_THROW(maxpool2x2(Tensor({1, 1, 3, 4})), Error);
  EXPECT_THROW(maxpool2x2(Tensor({1, 1, 4, 5})), Error);
}

TEST(MaxPool, MatchesWindowScan) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> half(1, 5), ch(1, 3);
    const Shape s{1, static_cast<std::size_t>(ch(rng)), 2u * half(rng), 2u * half(rng)};
    Tensor in = oracle::random_tensor<float>(s, rng);
    EXPECT_EQ(maxpool2x2(in).output, oracle::maxpool(in));
  }
}

TEST(MaxPool, BackwardRoutesToArgmax) {
  Tensor in = make({1, 1, 2, 4}, {1, 9, 2, 3, 4, 5, 8, 7});
  auto r = maxpool2x2(in);
  Tensor g = maxpool2x2_backward(r.argmax, make({1, 1, 1, 2}, {10, 20}));
  EXPECT_EQ(g.storage(), (std::vector<float>{0, 10, 0, 0, 0, 0, 20, 0}));
}

// ---------------------------------------------------------------------------
// Up-convolution

TEST(UpConv, SinglePixelExpands) {
  ConvParams p(1, 1, 2, 2);
  for (auto& v : p.kernel.data()) v = 1.0f;
  Tensor out = upconv2x2(make({1, 1, 1, 1}, {3.5f}), p);
  EXPECT_EQ(out, Tensor({1, 1, 2, 2}, 3.5f));
}

TEST(UpConv, DoublesSpatialDims) {
  std::mt19937_64 rng(4);
  auto p = oracle::random_conv<float>(3, 2, 2, rng);
  EXPECT_EQ(upconv2x2(Tensor({1, 2, 3, 5}), p).shape(), (Shape{1, 3, 6, 10}));
  EXPECT_THROW(upconv2x2(Tensor({1, 1, 3, 5}), p), Error);
  auto three = oracle::random_conv<float>(3, 2, 3, rng);
  EXPECT_THROW(upconv2x2(Tensor({1, 2, 3, 5}), three), Error);
}

TEST(UpConv, MatchesScatterAdd) {
  std::mt19937_64 rng(21);
  Tensor in = oracle::random_tensor<float>({1, 2, 3, 3}, rng);
  auto p = oracle::random_conv<float>(1, 2, 2, rng);
  EXPECT_LE(oracle::max_abs_diff(upconv2x2(in, p), oracle::upconv_scatter(in, p)), 1e-6);
}

// ---------------------------------------------------------------------------
// Concatenation

TEST(Concat, ShapeAndOrdering) {
  std::mt19937_64 rng(2);
  Tensor a = oracle::random_tensor<float>({1, 2, 4, 4}, rng);
  Tensor b = oracle::random_tensor<float>({1, 3, 4, 4}, rng);
  Tensor c = concat_channels(a, b);
  EXPECT_EQ(c.shape(), (Shape{1, 5, 4, 4}));
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(c.plane(0, 0)[i], a.plane(0, 0)[i]);
    EXPECT_EQ(c.plane(0, 2)[i], b.plane(0, 0)[i]);
  }
  EXPECT_EQ(slice_channels(c, 0, 2), a);
  EXPECT_EQ(slice_channels(c, 2, 3), b);
  EXPECT_EQ(concat_channels(a, Tensor({1, 0, 4, 4})), a);
  EXPECT_THROW(concat_channels(a, Tensor({1, 1, 4, 3})), Error);
}

// ---------------------------------------------------------------------------
// Loss

TEST(BceLoss, Examples) {
  std::mt19937_64 rng(6);
  Tensor half({1, 1, 4, 4}, 0.5f);
  Tensor target = oracle::random_tensor<float>({1, 1, 4, 4}, rng, 0.0, 1.0);
  for (auto& v : target.data()) v = v > 0.5f ? 1.0f : 0.0f;
  EXPECT_NEAR(bce_loss(half, target).value, std::log(2.0), 1e-6);
  EXPECT_LE(bce_loss(target, target).value, 2e-6);
  EXPECT_NEAR(bce_loss(make({1, 1, 1, 1}, {0.9f}), make({1, 1, 1, 1}, {0.0f})).value, 2.302585, 1e-5);
  EXPECT_THROW(bce_loss(half, Tensor({1, 1, 4, 3})), Error);
}

TEST(BceLoss, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(16);
  Tensor p = oracle::random_tensor<float>({1, 1, 3, 3}, rng, 0.05, 0.95);
  Tensor t = oracle::random_tensor<float>({1, 1, 3, 3}, rng, 0.0, 1.0);
  auto loss = bce_loss(p, t);
  auto pd = p.cast<double>();
  auto td = t.cast<double>();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double num = oracle::central_difference(pd[i], 1e-5, [&] { return bce_loss(pd, td).value; });
    EXPECT_LT(oracle::relative_error(loss.grad[i], num), 1e-3);
  }
}

// ---------------------------------------------------------------------------
// Gradient checks: float analytic gradients against double-precision central
// differences of a random linear objective sum(r * out).

template <class Forward>
double lin_objective(const Forward& f, const BasicTensor<double>& r) {
  const auto out = f();
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += r[i] * out[i];
  return s;
}

TEST(LayerGradients, Conv2dKernelOn5x5) {
  std::mt19937_64 rng(100);
  Tensor in = oracle::random_tensor<float>({1, 1, 5, 5}, rng);
  auto p = oracle::random_conv<float>(1, 1, 3, rng);
  Tensor r = oracle::random_tensor<float>({1, 1, 5, 5}, rng);
  auto g = conv2d_backward(in, p, r);

  auto ind = in.cast<double>();
  auto pd = p.cast<double>();
  auto rd = r.cast<double>();
  auto f = [&] { return lin_objective([&] { return conv2d(ind, pd); }, rd); };
  double worst = 0.0;
  for (std::size_t i = 0; i < pd.kernel.size(); ++i)
    worst = std::max(worst, oracle::relative_error(g.kernel[i],
                                                   oracle::central_difference(pd.kernel[i], 1e-3, f)));
  EXPECT_LT(worst, 1e-3);
}

TEST(LayerGradients, Conv2dAndUpconvOnRandomConfigs) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 24; ++trial) {
    std::uniform_int_distribution<int> dim(2, 6), ch(1, 3), ks(1, 3);
    const bool up = trial % 3 == 2;
    const std::size_t ic = ch(rng), oc = ch(rng);
    const std::size_t k = up ? 2 : static_cast<std::size_t>(ks(rng));
    const Shape s{1, ic, static_cast<std::size_t>(dim(rng)), static_cast<std::size_t>(dim(rng))};
    Tensor in = oracle::random_tensor<float>(s, rng);
    auto p = oracle::random_conv<float>(oc, ic, k, rng);
    const Shape os = up ? Shape{1, oc, 2 * s.h, 2 * s.w} : Shape{1, oc, s.h, s.w};
    Tensor r = oracle::random_tensor<float>(os, rng);
    auto g = up ? upconv2x2_backward(in, p, r) : conv2d_backward(in, p, r);

    auto ind = in.cast<double>();
    auto pd = p.cast<double>();
    auto rd = r.cast<double>();
    auto f = [&] {
      return lin_objective([&] { return up ? upconv2x2(ind, pd) : conv2d(ind, pd); }, rd);
    };
    double worst = 0.0;
    for (std::size_t i = 0; i < pd.kernel.size(); ++i)
      worst = std::max(worst, oracle::relative_error(
                                  g.kernel[i], oracle::central_difference(pd.kernel[i], 1e-3, f)));
    for (std::size_t i = 0; i < pd.bias.size(); ++i)
      worst = std::max(worst, oracle::relative_error(
                                  g.bias[i], oracle::central_difference(pd.bias[i], 1e-3, f)));
    for (std::size_t i = 0; i < ind.size(); ++i)
      worst = std::max(worst, oracle::relative_error(
                                  g.input[i], oracle::central_difference(ind[i], 1e-3, f)));
    EXPECT_LT(worst, 1e-3) << "trial " << trial << (up ? " upconv" : " conv");
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

// ---------------------------------------------------------------------------
// Optimizer

TEST(Adam, ZeroLearningRateKeepsParams) {
  std::vector<float> p = {1.0f, -2.0f, 3.0f};
  const auto before = p;
  std::vector<float> g = {0.5f, 0.1f, -4.0f};
  OptimState st;
  std::vector<std::span<float>> ps{p};
  std::vector<std::span<const float>> gs{g};
  for (int i = 0; i < 5; ++i) adam_step<float>(ps, gs, st, AdamOptions{0.0});
  EXPECT_EQ(p, before);
  EXPECT_EQ(st.step, 5u);
}

TEST(Adam, ZeroGradientKeepsParams) {
  std::vector<float> p = {1.0f, -2.0f};
  const auto before = p;
  std::vector<float> g = {0.0f, 0.0f};
  OptimState st;
  std::vector<std::span<float>> ps{p};
  std::vector<std::span<const float>> gs{g};
  adam_step<float>(ps, gs, st, AdamOptions{1e-2});
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  // Bias correction makes m_hat = g and v_hat = g^2 on step one.
  const double lr = 1e-2;
  std::vector<float> g = {0.3f, -2.0f, 1e-3f};
  std::vector<float> p(3, 0.0f);
  OptimState st;
  std::vector<std::span<float>> ps{p};
  std::vector<std::span<const float>> gs{g};
  adam_step<float>(ps, gs, st, AdamOptions{lr});
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(p[i], -lr * g[i] / (std::abs(g[i]) + 1e-8), 1e-7);
}

TEST(Adam, ShapeMismatchFails) {
  std::vector<float> p(3), g(2);
  OptimState st;
  std::vector<std::span<float>> ps{p};
  std::vector<std::span<const float>> gs{g};
  EXPECT_THROW(adam_step<float>(ps, gs, st, AdamOptions{}), Error);
}

TEST(Purity, RepeatedCallsAreBitIdentical) {
  std::mt19937_64 rng(31);
  Tensor in = oracle::random_tensor<float>({1, 2, 8, 8}, rng);
  auto p = oracle::random_conv<float>(3, 2, 3, rng);
  EXPECT_EQ(conv2d(in, p), conv2d(in, p));
  auto u = oracle::random_conv<float>(2, 2, 2, rng);
  EXPECT_EQ(upconv2x2(in, u), upconv2x2(in, u));
  EXPECT_EQ(maxpool2x2(in).output, maxpool2x2(in).output);
}

}  // namespace
}  // namespace cordseg
