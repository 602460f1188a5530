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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "cordseg/errors.hpp"
#include "cordseg/tensor.hpp"

namespace cordseg {

/// Encoder-decoder layout. Channel width at level k is base_channels * 2^k;
/// `tile` must be divisible by 2^depth.
struct UNetConfig {
  int depth = 2;
  int base_channels = 8;
  int in_channels = 1;
  int out_channels = 1;
  int tile = 64;

  void validate() const {
    require(depth >= 1 && depth <= 16, Errc::invalid_argument, "depth must be >= 1");
    require(base_channels >= 1, Errc::invalid_argument, "base_channels must be >= 1");
    require(in_channels >= 1 && out_channels >= 1, Errc::invalid_argument,
            "channel counts must be >= 1");
    require(tile >= 1 && tile % (1 << depth) == 0, Errc::invalid_argument,
            "tile side " + std::to_string(tile) + " is not divisible by 2^" +
                std::to_string(depth));
  }

  std::size_t channels(int level) const {
    return static_cast<std::size_t>(base_channels) << level;
  }

  friend bool operator==(const UNetConfig&, const UNetConfig&) = default;
};

/// Double-convs down (2d+2), double-convs up (2d), up-convs (d), 1x1 head.
constexpr int conv_layer_count(const UNetConfig& cfg) noexcept { return 5 * cfg.depth + 3; }

template <class T>
struct NamedConv {
  std::string name;
  BasicConvParams<T> params;

  friend bool operator==(const NamedConv&, const NamedConv&) = default;
};

template <class T>
struct BasicUNetWeights {
  std::vector<NamedConv<T>> layers;

  std::size_t size() const noexcept { return layers.size(); }

  template <class U>
  BasicUNetWeights<U> cast() const {
    BasicUNetWeights<U> out;
    for (const auto& l : layers) out.layers.push_back({l.name, l.params.template cast<U>()});
    return out;
  }

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.params.kernel.size() + l.params.bias.size();
    return n;
  }

  friend bool operator==(const BasicUNetWeights&, const BasicUNetWeights&) = default;
};

using UNetWeights = BasicUNetWeights<float>;

/// Per-layer parameter gradients, index-aligned with BasicUNetWeights::layers.
template <class T>
struct BasicUNetGrads {
  std::vector<BasicConvParams<T>> layers;
};

// ---------------------------------------------------------------------------
// Layer table

struct LayerSpec {
  std::string name;
  std::size_t out_ch, in_ch, k;
};

namespace detail {

inline std::size_t up_index(int depth, int step) { return 2 * (depth + 1) + 3 * step; }
inline std::size_t head_index(int depth) { return 5 * depth + 2; }

}  // namespace detail

/// Names and shapes of every convolution, in storage order: encoder levels
/// 0..d, then for each decoder level d-1..0 its up-conv and double-conv, then
/// the 1x1 head.
inline std::vector<LayerSpec> layer_table(const UNetConfig& cfg) {
  cfg.validate();
  std::vector<LayerSpec> t;
  std::size_t in = cfg.in_channels;
  for (int k = 0; k <= cfg.depth; ++k) {
    const std::size_t c = cfg.channels(k);
    const std::string p = "enc" + std::to_string(k);
    t.push_back({p + ".conv1", c, in, 3});
    t.push_back({p + ".conv2", c, c, 3});
    in = c;
  }
  for (int k = cfg.depth - 1; k >= 0; --k) {
    const std::size_t c = cfg.channels(k);
    const std::string p = "dec" + std::to_string(k);
    t.push_back({"up" + std::to_string(k), c, cfg.channels(k + 1), 2});
    t.push_back({p + ".conv1", c, 2 * c, 3});
    t.push_back({p + ".conv2", c, c, 3});
  }
  t.push_back({"head", static_cast<std::size_t>(cfg.out_channels), cfg.channels(0), 1});
  return t;
}

/// He-style initialization: zero-mean Gaussian kernels with variance
/// 2 / (in_ch * kh * kw), zero biases.
template <class T = float>
BasicUNetWeights<T> build(const UNetConfig& cfg, std::uint64_t seed) {
  BasicUNetWeights<T> w;
  std::mt19937_64 rng(seed);
  for (const auto& spec : layer_table(cfg)) {
    BasicConvParams<T> p(spec.out_ch, spec.in_ch, spec.k, spec.k);
    const double stddev = std::sqrt(2.0 / static_cast<double>(spec.in_ch * spec.k * spec.k));
    std::normal_distribution<double> dist(0.0, stddev);
    for (T& v : p.kernel.data()) v = static_cast<T>(dist(rng));
    w.layers.push_back({spec.name, std::move(p)});
  }
  return w;
}

/// Throws shape_table_mismatch unless `w` has exactly the layers `cfg` implies.
template <class T>
void check_weights(const BasicUNetWeights<T>& w, const UNetConfig& cfg) {
  const auto table = layer_table(cfg);
  require(w.layers.size() == table.size(), Errc::shape_table_mismatch,
          "expected " + std::to_string(table.size()) + " layers, got " +
              std::to_string(w.layers.size()));
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& l = w.layers[i];
    const auto& s = table[i];
    require(l.name == s.name && l.params.kernel.shape() == Shape{s.out_ch, s.in_ch, s.k, s.k} &&
                l.params.bias.size() == s.out_ch,
            Errc::shape_table_mismatch, "layer " + std::to_string(i) + " (" + l.name +
                                            ") does not match expected " + s.name);
  }
}

/// Recovers depth and base width from a weight set; `tile` is left for the
/// caller to choose.
template <class T>
UNetConfig infer_config(const BasicUNetWeights<T>& w, int tile) {
  require(!w.layers.empty() && (w.layers.size() - 3) % 5 == 0 && w.layers.size() >= 8,
          Errc::shape_table_mismatch,
          "layer count " + std::to_string(w.layers.size()) + " is not 5d+3");
  UNetConfig cfg;
  cfg.depth = static_cast<int>((w.layers.size() - 3) / 5);
  cfg.base_channels = static_cast<int>(w.layers.front().params.out_channels());
  cfg.in_channels = static_cast<int>(w.layers.front().params.in_channels());
  cfg.out_channels = static_cast<int>(w.layers.back().params.out_channels());
  cfg.tile = tile;
  check_weights(w, cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace detail {

template <class T>
struct ForwardCache {
  std::vector<BasicTensor<T>> layer_input;  // input to each conv / up-conv
  std::vector<BasicTensor<T>> pre_act;      // conv output before ReLU (empty for up-convs/head)
  std::vector<ArgmaxRecord> pools;          // one per encoder level < depth
  BasicTensor<T> prob;
};

template <class T>
BasicTensor<T> run_forward(const BasicUNetWeights<T>& w, const UNetConfig& cfg,
                           const BasicTensor<T>& tile, ForwardCache<T>* cache) {
  const int d = cfg.depth;
  if (cache) {
    cache->layer_input.assign(w.layers.size(), {});
    cache->pre_act.assign(w.layers.size(), {});
    cache->pools.clear();
  }
  auto conv_relu = [&](std::size_t idx, const BasicTensor<T>& x) {
    BasicTensor<T> z = conv2d(x, w.layers[idx].params, Padding::same);
    BasicTensor<T> a = relu(z);
    if (cache) {
      cache->layer_input[idx] = x;
      cache->pre_act[idx] = std::move(z);
    }
    return a;
  };

  std::vector<BasicTensor<T>> skips(d);
  BasicTensor<T> x = tile;
  for (int k = 0; k <= d; ++k) {
    x = conv_relu(2 * k, x);
    x = conv_relu(2 * k + 1, x);
    if (k < d) {
      skips[k] = x;
      auto pooled = maxpool2x2(x);
      x = std::move(pooled.output);
      if (cache) cache->pools.push_back(std::move(pooled.argmax));
    }
  }
  for (int step = 0; step < d; ++step) {
    const int k = d - 1 - step;
    const std::size_t up = up_index(d, step);
    BasicTensor<T> u = upconv2x2(x, w.layers[up].params);
    if (cache) cache->layer_input[up] = x;
    x = concat_channels(skips[k], u);
    x = conv_relu(up + 1, x);
    x = conv_relu(up + 2, x);
  }
  const std::size_t head = head_index(d);
  BasicTensor<T> logits = conv2d(x, w.layers[head].params, Padding::same);
  if (cache) cache->layer_input[head] = x;
  BasicTensor<T> prob = sigmoid(logits);
  if (cache) cache->prob = prob;
  return prob;
}

// Backprop of dL/d(prob) through the cached graph.
template <class T>
BasicUNetGrads<T> run_backward(const BasicUNetWeights<T>& w, const UNetConfig& cfg,
                               const ForwardCache<T>& cache, const BasicTensor<T>& grad_prob) {
  const int d = cfg.depth;
  BasicUNetGrads<T> grads;
  grads.layers.resize(w.layers.size());
  auto store = [&](std::size_t idx, BasicConvGrads<T>& g) {
    grads.layers[idx] = BasicConvParams<T>(std::move(g.kernel), std::move(g.bias));
  };
  auto conv_relu_back = [&](std::size_t idx, const BasicTensor<T>& g_out) {
    BasicTensor<T> gz = relu_backward(cache.pre_act[idx], g_out);
    auto g = conv2d_backward(cache.layer_input[idx], w.layers[idx].params, gz, Padding::same);
    store(idx, g);
    return std::move(g.input);
  };

  const std::size_t head = head_index(d);
  BasicTensor<T> g = sigmoid_backward(cache.prob, grad_prob);
  {
    auto hg = conv2d_backward(cache.layer_input[head], w.layers[head].params, g, Padding::same);
    store(head, hg);
    g = std::move(hg.input);
  }

  std::vector<BasicTensor<T>> skip_grads(d);
  for (int step = d - 1; step >= 0; --step) {
    const int k = d - 1 - step;
    const std::size_t up = up_index(d, step);
    g = conv_relu_back(up + 2, g);
    g = conv_relu_back(up + 1, g);
    const std::size_t skip_ch = cfg.channels(k);
    skip_grads[k] = slice_channels(g, 0, skip_ch);
    BasicTensor<T> gu = slice_channels(g, skip_ch, g.shape().c - skip_ch);
    auto ug = upconv2x2_backward(cache.layer_input[up], w.layers[up].params, gu);
    store(up, ug);
    g = std::move(ug.input);
  }
  for (int k = d; k >= 0; --k) {
    if (k < d) {
      g = maxpool2x2_backward(cache.pools[k], g);
      const auto& sg = skip_grads[k];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sg[i];
    }
    g = conv_relu_back(2 * k + 1, g);
    g = conv_relu_back(2 * k, g);
  }
  return grads;
}

template <class T>
void check_tile(const UNetConfig& cfg, const BasicTensor<T>& tile, const char* what) {
  const Shape expect{1, static_cast<std::size_t>(cfg.in_channels),
                     static_cast<std::size_t>(cfg.tile), static_cast<std::size_t>(cfg.tile)};
  require(tile.shape() == expect, Errc::shape_mismatch,
          std::string(what) + ": tile " + to_string(tile.shape()) + " expected " +
              to_string(expect));
}

}  // namespace detail

/// Per-pixel foreground probabilities for one tile (1 x in_ch x s x s).
template <class T>
BasicTensor<T> forward(const BasicUNetWeights<T>& w, const UNetConfig& cfg,
                       const BasicTensor<T>& tile) {
  cfg.validate();
  detail::check_tile(cfg, tile, "forward");
  require(w.layers.size() == static_cast<std::size_t>(conv_layer_count(cfg)),
          Errc::shape_table_mismatch, "forward: weight count does not match config");
  return detail::run_forward<T>(w, cfg, tile, nullptr);
}

template <class T>
struct BasicLossAndGrads {
  T loss{};
  BasicUNetGrads<T> grads;
};

template <class T>
BasicLossAndGrads<T> loss_and_grads(const BasicUNetWeights<T>& w, const UNetConfig& cfg,
                                    const BasicTensor<T>& tile, const BasicTensor<T>& target) {
  cfg.validate();
  detail::check_tile(cfg, tile, "loss_and_grads");
  require(target.shape() == Shape{1, static_cast<std::size_t>(cfg.out_channels), tile.shape().h,
                                  tile.shape().w},
          Errc::shape_mismatch, "loss_and_grads: target shape mismatch");
  detail::ForwardCache<T> cache;
  detail::run_forward<T>(w, cfg, tile, &cache);
  auto loss = bce_loss(cache.prob, target);
  return {loss.value, detail::run_backward<T>(w, cfg, cache, loss.grad)};
}

// ---------------------------------------------------------------------------
// Training

struct TrainSample {
  Tensor image;  // 1 x 1 x s x s, intensities scaled to [0, 1]
  Tensor mask;   // 1 x 1 x s x s, values in {0, 1}
};

struct TrainRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<double> validation_iou;

  friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

struct TrainOptions {
  int epochs = 30;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  /// Optional: called after every epoch; may fill validation_iou.
  std::function<void(TrainRecord&, const UNetWeights&)> on_epoch;
};

struct TrainResult {
  UNetWeights weights;
  std::vector<TrainRecord> records;
};

namespace detail {

inline std::vector<std::span<float>> param_spans(UNetWeights& w) {
  std::vector<std::span<float>> s;
  for (auto& l : w.layers) {
    s.push_back(l.params.kernel.data());
    s.push_back(l.params.bias);
  }
  return s;
}

inline std::vector<std::span<const float>> grad_spans(const BasicUNetGrads<float>& g) {
  std::vector<std::span<const float>> s;
  for (const auto& l : g.layers) {
    s.push_back(l.kernel.data());
    s.push_back(l.bias);
  }
  return s;
}

}  // namespace detail

/// Shuffled batch-1 adaptive-moment training. Shuffling is the only use of `seed`.
inline TrainResult train(UNetWeights weights, const UNetConfig& cfg,
                         std::span<const TrainSample> dataset, const TrainOptions& opt) {
  require(!dataset.empty(), Errc::empty_dataset, "train: dataset is empty");
  require(opt.epochs >= 0, Errc::invalid_argument, "train: epochs must be >= 0");
  cfg.validate();
  check_weights(weights, cfg);
  for (const auto& s : dataset) detail::check_tile(cfg, s.image, "train");

  TrainResult result;
  OptimState state;
  std::mt19937_64 rng(opt.seed);
  std::vector<std::size_t> order(dataset.size());
  const AdamOptions adam{opt.lr};
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      auto lg = loss_and_grads(weights, cfg, dataset[idx].image, dataset[idx].mask);
      total += lg.loss;
      auto params = detail::param_spans(weights);
      auto grads = detail::grad_spans(lg.grads);
      adam_step<float>(params, grads, state, adam);
    }
    TrainRecord rec{epoch, total / static_cast<double>(dataset.size()), std::nullopt};
    if (opt.on_epoch) opt.on_epoch(rec, weights);
    result.records.push_back(rec);
  }
  result.weights = std::move(weights);
  return result;
}

// ---------------------------------------------------------------------------
// Weight file
//
//   "CSEGW1\0\0" | u32 tensor count | per tensor: u16 name length, name,
//   u8 rank, rank x u32 dims, f32 payload | u32 CRC-32 of everything before.
// All integers and floats little-endian. Each convolution is stored as two
// tensors, "<layer>.weight" (rank 4) followed by "<layer>.bias" (rank 1).

inline constexpr char kWeightMagic[8] = {'C', 'S', 'E', 'G', 'W', '1', '\0', '\0'};

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint8_t u8() { return need(1), b_[pos_++]; }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(b_[pos_] | (b_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) fail(Errc::truncated, "weight file ends early at byte " +
                                                        std::to_string(pos_));
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

inline void write_tensor(ByteWriter& out, const std::string& name,
                         std::span<const std::uint32_t> dims, std::span<const float> data) {
  require(name.size() <= 0xFFFF, Errc::invalid_argument, "tensor name too long");
  out.u16(static_cast<std::uint16_t>(name.size()));
  out.bytes(name.data(), name.size());
  out.u8(static_cast<std::uint8_t>(dims.size()));
  for (auto d : dims) out.u32(d);
  for (float v : data) out.f32(v);
}

inline constexpr std::string_view kWeightSuffix = ".weight";
inline constexpr std::string_view kBiasSuffix = ".bias";

}  // namespace detail

inline std::vector<std::uint8_t> serialize_weights(const UNetWeights& w) {
  detail::ByteWriter out;
  out.bytes(kWeightMagic, sizeof kWeightMagic);
  out.u32(static_cast<std::uint32_t>(2 * w.layers.size()));
  for (const auto& l : w.layers) {
    const Shape& s = l.params.kernel.shape();
    const std::uint32_t kdims[4] = {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c),
                                    static_cast<std::uint32_t>(s.h), static_cast<std::uint32_t>(s.w)};
    detail::write_tensor(out, l.name + std::string(detail::kWeightSuffix), kdims,
                         l.params.kernel.data());
    const std::uint32_t bdims[1] = {static_cast<std::uint32_t>(l.params.bias.size())};
    detail::write_tensor(out, l.name + std::string(detail::kBiasSuffix), bdims, l.params.bias);
  }
  const std::uint32_t crc = crc32_of(out.buffer());
  out.u32(crc);
  return std::move(out.buffer());
}

inline UNetWeights parse_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kWeightMagic) {
    const bool prefix = std::memcmp(bytes.data(), kWeightMagic, bytes.size()) == 0;
    fail(prefix ? Errc::truncated : Errc::bad_magic, "file shorter than magic");
  }
  require(std::memcmp(bytes.data(), kWeightMagic, sizeof kWeightMagic) == 0, Errc::bad_magic,
          "expected CSEGW1 header");
  detail::ByteReader in(bytes);
  in.str(sizeof kWeightMagic);
  const std::uint32_t count = in.u32();
  require(count % 2 == 0, Errc::shape_table_mismatch, "odd tensor count");
  UNetWeights w;
  for (std::uint32_t i = 0; i < count; i += 2) {
    std::string names[2];
    std::vector<std::uint32_t> dims[2];
    std::vector<float> data[2];
    for (int j = 0; j < 2; ++j) {
      names[j] = in.str(in.u16());
      const std::uint8_t rank = in.u8();
      std::size_t total = 1;
      for (std::uint8_t r = 0; r < rank; ++r) {
        dims[j].push_back(in.u32());
        total *= dims[j].back();
      }
      if (total * 4 > in.remaining()) fail(Errc::truncated, "tensor " + names[j] + " payload");
      data[j].resize(total);
      for (auto& v : data[j]) v = in.f32();
    }
    const auto& wn = names[0];
    const auto& bn = names[1];
    const bool paired = dims[0].size() == 4 && dims[1].size() == 1 &&
                        wn.ends_with(detail::kWeightSuffix) && bn.ends_with(detail::kBiasSuffix) &&
                        wn.substr(0, wn.size() - detail::kWeightSuffix.size()) ==
                            bn.substr(0, bn.size() - detail::kBiasSuffix.size()) &&
                        dims[1][0] == dims[0][0];
    require(paired, Errc::shape_table_mismatch,
            "tensors " + wn + " / " + bn + " do not form a kernel/bias pair");
    const Shape ks{dims[0][0], dims[0][1], dims[0][2], dims[0][3]};
    require(ks.h >= 1 && ks.h <= 3 && ks.w >= 1 && ks.w <= 3, Errc::shape_table_mismatch,
            "kernel " + wn + " has unsupported spatial size");
    w.layers.push_back({wn.substr(0, wn.size() - detail::kWeightSuffix.size()),
                        ConvParams(Tensor(ks, std::move(data[0])), std::move(data[1]))});
  }
  const std::size_t body = in.pos();
  const std::uint32_t stored = in.u32();
  require(in.remaining() == 0, Errc::malformed, "trailing bytes after CRC");
  require(crc32_of(bytes.first(body)) == stored, Errc::crc_mismatch, "weight file CRC mismatch");
  return w;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), Errc::io, "cannot open " + path.string());
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), Errc::io, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(f), Errc::io, "short write to " + path.string());
}

inline void save_weights(const UNetWeights& w, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_weights(w));
}

inline UNetWeights load_weights(const std::filesystem::path& path) {
  return parse_weights(read_file_bytes(path));
}

/// CRC-32 trailer of the serialized form; identifies a model in reports.
inline std::uint32_t weights_fingerprint(const UNetWeights& w) {
  const auto bytes = serialize_weights(w);
  return crc32_of(std::span(bytes).first(bytes.size() - 4));
}

}  // namespace cordseg
