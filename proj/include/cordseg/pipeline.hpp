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
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cordseg/dataset_io.hpp"
#include "cordseg/image.hpp"
#include "cordseg/kmeans.hpp"
#include "cordseg/metrics.hpp"
#include "cordseg/postprocess.hpp"
#include "cordseg/tiling.hpp"
#include "cordseg/unet.hpp"

namespace cordseg {

struct PipelineOptions {
  int tile = 256;
  float cut = 0.5f;
  int close_iterations = 1;
  long min_area = 30;
  int threshold = kDefaultThreshold;
  Connectivity connectivity = Connectivity::eight;
  unsigned workers = 0;  // 0: one per hardware thread
};

// ---------------------------------------------------------------------------
// Segmenters

struct UNetModel {
  UNetWeights weights;
  UNetConfig config;  // tile field unused; the pipeline supplies it
  std::uint32_t crc = 0;
};

struct KMeansModel {
  KMeansOptions options;
};

/// Uses the ground-truth mask as the prediction; a harness sanity check.
struct TruthModel {};

class Segmenter {
 public:
  static Segmenter unet(UNetWeights w) {
    UNetModel m;
    m.config = infer_config(w, 1 << ((w.layers.size() - 3) / 5));
    m.crc = weights_fingerprint(w);
    m.weights = std::move(w);
    return Segmenter(std::move(m));
  }
  static Segmenter kmeans(KMeansOptions opt = {}) { return Segmenter(KMeansModel{opt}); }
  static Segmenter truth() { return Segmenter(TruthModel{}); }

  std::string_view name() const {
    switch (model_.index()) {
      case 0: return "unet";
      case 1: return "kmeans";
      default: return "truth";
    }
  }

  /// Weight-file CRC for U-Net models, 0 otherwise.
  std::uint32_t fingerprint() const {
    if (auto* m = std::get_if<UNetModel>(&model_)) return m->crc;
    return 0;
  }

  const UNetModel* unet_model() const { return std::get_if<UNetModel>(&model_); }

  /// Throws shape_table_mismatch if tiles of side `tile` cannot pass through the model.
  void check_tile(int tile) const {
    if (auto* m = unet_model()) {
      const int step = 1 << m->config.depth;
      require(tile % step == 0, Errc::shape_table_mismatch,
              "tile side " + std::to_string(tile) + " not divisible by 2^" +
                  std::to_string(m->config.depth) + " required by the weights");
    }
  }

  /// Tile side for an image that fits inside one `tile`: the smallest side the
  /// model accepts that still covers the image, so small inputs carry no more
  /// mirrored padding than necessary.
  int single_tile(int tile, int width, int height) const {
    const auto* m = unet_model();
    if (!m) return tile;
    const int step = 1 << m->config.depth;
    if (tile % step != 0) return tile;  // let segmentation report the mismatch
    const int need = std::max({width, height, 16});
    return std::min(tile, (need + step - 1) / step * step);
  }

  BinaryMask segment(const GrayImage& img, const PipelineOptions& opt, TileGrid& grid,
                     const BinaryMask* truth = nullptr) const {
    grid = TileGrid::make(img.width(), img.height(), opt.tile);
    if (auto* m = unet_model()) return segment_unet(*m, img, opt, grid);
    if (auto* k = std::get_if<KMeansModel>(&model_)) return kmeans_segment(img, k->options);
    require(truth != nullptr, Errc::invalid_argument, "truth segmenter needs a ground-truth mask");
    require(truth->same_dims(img), Errc::shape_mismatch, "truth mask dims differ from image");
    return *truth;
  }

 private:
  using Model = std::variant<UNetModel, KMeansModel, TruthModel>;
  explicit Segmenter(Model m) : model_(std::move(m)) {}

  static BinaryMask segment_unet(const UNetModel& m, const GrayImage& img,
                                 const PipelineOptions& opt, TileGrid& grid) {
    UNetConfig cfg = m.config;
    cfg.tile = opt.tile;
    require(opt.tile % (1 << cfg.depth) == 0, Errc::shape_table_mismatch,
            "tile side " + std::to_string(opt.tile) + " incompatible with model depth " +
                std::to_string(cfg.depth));
    TileSet<GrayImage> tiles = split(img, opt.tile);
    grid = tiles.grid;
    std::vector<ProbMap> probs(tiles.tiles.size());
    unsigned workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(tiles.tiles.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto work = [&] {
      for (std::size_t i = next++; i < tiles.tiles.size() && !failed; i = next++) {
        try {
          probs[i] = tensor_to_prob(forward(m.weights, cfg, image_to_tensor(tiles.tiles[i])));
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    };
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return binarize(stitch(grid, probs), opt.cut);
  }

  Model model_;
};

// ---------------------------------------------------------------------------
// Full-image pipeline: split -> segment -> stitch -> close -> label -> filter -> decide

struct PipelineResult {
  TileGrid grid;
  BinaryMask segmentation;  // binarized, before morphology
  BinaryMask closed;
  LabeledRegions regions;
  Decision decision;
};

/// Everything after segmentation; also used to re-derive counts from a saved mask.
inline PipelineResult postprocess_mask(BinaryMask segmentation, const PipelineOptions& opt) {
  PipelineResult r;
  r.closed = close(segmentation, opt.close_iterations);
  r.regions = filter_regions(connected_components(r.closed, opt.connectivity), opt.min_area);
  r.decision = decide(r.regions, opt.threshold);
  r.segmentation = std::move(segmentation);
  return r;
}

inline PipelineResult run_pipeline(const GrayImage& img, const Segmenter& seg,
                                   const PipelineOptions& opt, const BinaryMask* truth = nullptr) {
  PipelineOptions o = opt;
  if (img.width() <= opt.tile && img.height() <= opt.tile)
    o.tile = seg.single_tile(opt.tile, img.width(), img.height());
  TileGrid grid;
  BinaryMask m = seg.segment(img, o, grid, truth);
  PipelineResult r = postprocess_mask(std::move(m), o);
  r.grid = grid;
  return r;
}

/// Source image with every pixel of an included region set to 255.
inline GrayImage make_overlay(const GrayImage& img, const LabeledRegions& regions) {
  GrayImage out = img;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto l = regions.labels[i];
    if (l > 0 && regions.regions[l - 1].included) px[i] = 255;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Case reports

struct CaseReport {
  std::string id;
  int width = 0;
  int height = 0;
  int tile = 0;
  int columns = 0;
  int rows = 0;
  std::vector<Region> regions;
  int count = 0;
  int threshold = kDefaultThreshold;
  Verdict verdict = Verdict::negative;
  std::uint32_t model_crc = 0;
  std::string mask;

  friend bool operator==(const CaseReport&, const CaseReport&) = default;
};

inline CaseReport make_report(const std::string& id, const PipelineResult& r,
                              std::uint32_t model_crc, const std::string& mask_path) {
  CaseReport c;
  c.id = id;
  c.width = r.grid.width;
  c.height = r.grid.height;
  c.tile = r.grid.tile;
  c.columns = r.grid.columns;
  c.rows = r.grid.rows;
  c.regions = r.regions.regions;
  c.count = r.decision.cord_count;
  c.threshold = r.decision.threshold;
  c.verdict = r.decision.verdict;
  c.model_crc = model_crc;
  c.mask = mask_path;
  return c;
}

inline nlohmann::ordered_json region_to_json(const Region& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["area"] = r.area;
  j["bbox"] = {r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h};
  j["centroid"] = {r.cx, r.cy};
  j["included"] = r.included;
  return j;
}

inline nlohmann::ordered_json report_to_json(const CaseReport& c) {
  nlohmann::ordered_json j;
  j["id"] = c.id;
  j["width"] = c.width;
  j["height"] = c.height;
  j["tile"] = c.tile;
  j["grid"] = {c.columns, c.rows};
  auto regions = nlohmann::ordered_json::array();
  for (const auto& r : c.regions) regions.push_back(region_to_json(r));
  j["regions"] = std::move(regions);
  j["count"] = c.count;
  j["threshold"] = c.threshold;
  j["verdict"] = std::string(to_string(c.verdict));
  j["model_crc"] = c.model_crc;
  j["mask"] = c.mask;
  return j;
}

inline CaseReport report_from_json(const nlohmann::json& j) {
  try {
    CaseReport c;
    c.id = j.at("id").get<std::string>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.tile = j.at("tile").get<int>();
    const auto& g = j.at("grid");
    require(g.is_array() && g.size() == 2, Errc::malformed, "grid must be [cols, rows]");
    c.columns = g[0].get<int>();
    c.rows = g[1].get<int>();
    for (const auto& rj : j.at("regions")) {
      Region r;
      r.id = rj.at("id").get<int>();
      r.area = rj.at("area").get<long>();
      const auto& b = rj.at("bbox");
      require(b.is_array() && b.size() == 4, Errc::malformed, "bbox must be [x, y, w, h]");
      r.bbox = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
      const auto& ct = rj.at("centroid");
      require(ct.is_array() && ct.size() == 2, Errc::malformed, "centroid must be [x, y]");
      r.cx = ct[0].get<double>();
      r.cy = ct[1].get<double>();
      r.included = rj.at("included").get<bool>();
      c.regions.push_back(r);
    }
    c.count = j.at("count").get<int>();
    c.threshold = j.at("threshold").get<int>();
    c.verdict = parse_verdict(j.at("verdict").get<std::string>());
    c.model_crc = j.at("model_crc").get<std::uint32_t>();
    c.mask = j.at("mask").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed, std::string("case report: ") + e.what());
  }
}

/// File names used for one case inside a report directory.
struct CaseFiles {
  static std::string report(const std::string& id) { return id + ".report.json"; }
  static std::string mask(const std::string& id) { return id + ".mask.pgm"; }
  static std::string overlay(const std::string& id) { return id + ".overlay.pgm"; }
  static std::string image(const std::string& id) { return id + ".image.pgm"; }
  static std::string session(const std::string& id) { return id + ".session.json"; }
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), Errc::io, "cannot write " + path.string());
  f << text;
  require(static_cast<bool>(f), Errc::io, "short write to " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

/// Writes report JSON, binarized mask, overlay and a copy of the source image.
inline CaseReport write_case_outputs(const std::filesystem::path& dir, const std::string& id,
                                     const GrayImage& img, const PipelineResult& r,
                                     std::uint32_t model_crc) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec && std::filesystem::is_directory(dir), Errc::io, "cannot create " + dir.string());
  CaseReport rep = make_report(id, r, model_crc, CaseFiles::mask(id));
  save_pgm(mask_to_image(r.segmentation), dir / CaseFiles::mask(id));
  save_pgm(make_overlay(img, r.regions), dir / CaseFiles::overlay(id));
  save_pgm(img, dir / CaseFiles::image(id));
  write_text(dir / CaseFiles::report(id), report_to_json(rep).dump(2) + "\n");
  return rep;
}

// ---------------------------------------------------------------------------
// Evaluation over a manifest's test split

struct CaseEval {
  std::string id;
  std::optional<double> iou;
  std::optional<double> pixel_accuracy;
  bool both_empty = false;
  Decision decision;
  std::optional<Verdict> label;
  std::optional<int> true_count;
};

struct EvalReport {
  std::string segmenter;
  std::vector<CaseEval> cases;
  EvalSummary summary;
};

inline EvalReport evaluate(const DatasetManifest& m, const Segmenter& seg,
                           const PipelineOptions& opt) {
  EvalReport rep;
  rep.segmenter = std::string(seg.name());
  std::vector<double> ious;
  std::vector<Decision> decisions;
  std::vector<Verdict> labels;
  double pix_sum = 0.0;
  for (const auto& c : m.cases) {
    if (c.split != Split::test) continue;
    LoadedCase lc = load_case(m, c);
    // Sub-images smaller than the tile go through as a single tile.
    const PipelineResult r = run_pipeline(lc.image, seg, opt, lc.mask ? &*lc.mask : nullptr);
    CaseEval e;
    e.id = c.id;
    e.decision = r.decision;
    e.label = c.label;
    e.true_count = c.true_count;
    if (lc.mask) {
      const auto counts = overlap_counts(r.segmentation, *lc.mask);
      e.both_empty = counts.union_ == 0;
      e.iou = iou(r.segmentation, *lc.mask);
      e.pixel_accuracy = pixel_accuracy(r.segmentation, *lc.mask);
      ious.push_back(*e.iou);
      pix_sum += *e.pixel_accuracy;
    }
    if (c.label) {
      decisions.push_back(r.decision);
      labels.push_back(*c.label);
    }
    rep.cases.push_back(std::move(e));
  }
  require(!rep.cases.empty(), Errc::empty_dataset, "manifest has no test cases");
  if (!ious.empty()) {
    rep.summary = summarize(ious, decisions, labels);
    rep.summary.pixel_accuracy = pix_sum / static_cast<double>(ious.size());
  } else {
    require(!labels.empty(), Errc::empty_dataset, "test cases carry neither masks nor labels");
    rep.summary.case_accuracy = case_accuracy(std::span<const Decision>(decisions), labels);
  }
  for (const auto& e : rep.cases) rep.summary.both_empty += e.both_empty;
  return rep;
}

/// Train-split cases with masks as training tiles; images larger than `tile`
/// are cut into tiles the same way inference cuts them.
inline std::vector<TrainSample> training_samples(const DatasetManifest& m, int tile) {
  std::vector<TrainSample> out;
  for (const auto& c : m.cases) {
    if (c.split != Split::train || !c.mask) continue;
    LoadedCase lc = load_case(m, c);
    if (lc.image.width() == tile && lc.image.height() == tile) {
      out.push_back({image_to_tensor(lc.image), mask_to_tensor(*lc.mask)});
      continue;
    }
    const auto imgs = split(lc.image, tile);
    const auto masks = split(*lc.mask, tile);
    for (std::size_t i = 0; i < imgs.tiles.size(); ++i)
      out.push_back({image_to_tensor(imgs.tiles[i]), mask_to_tensor(masks.tiles[i])});
  }
  return out;
}

inline nlohmann::ordered_json eval_to_json(const EvalReport& rep) {
  nlohmann::ordered_json j;
  j["segmenter"] = rep.segmenter;
  auto cases = nlohmann::ordered_json::array();
  for (const auto& e : rep.cases) {
    nlohmann::ordered_json c;
    c["id"] = e.id;
    c["iou"] = e.iou ? nlohmann::ordered_json(*e.iou) : nlohmann::ordered_json(nullptr);
    c["pixel_accuracy"] = e.pixel_accuracy ? nlohmann::ordered_json(*e.pixel_accuracy)
                                           : nlohmann::ordered_json(nullptr);
    c["both_empty"] = e.both_empty;
    c["count"] = e.decision.cord_count;
    c["verdict"] = std::string(to_string(e.decision.verdict));
    c["label"] = e.label ? nlohmann::ordered_json(std::string(to_string(*e.label)))
                         : nlohmann::ordered_json(nullptr);
    c["true_count"] = e.true_count ? nlohmann::ordered_json(*e.true_count)
                                   : nlohmann::ordered_json(nullptr);
    cases.push_back(std::move(c));
  }
  j["cases"] = std::move(cases);
  const auto& s = rep.summary;
  nlohmann::ordered_json sj;
  sj["iou_mean"] = s.mean;
  sj["iou_std"] = s.stddev;
  sj["std_kind"] = "sample std over test images";
  sj["degenerate"] = s.degenerate;
  sj["both_empty"] = s.both_empty;
  sj["pixel_accuracy"] = s.pixel_accuracy ? nlohmann::ordered_json(*s.pixel_accuracy)
                                          : nlohmann::ordered_json(nullptr);
  sj["case_accuracy"] = s.case_accuracy ? nlohmann::ordered_json(*s.case_accuracy)
                                        : nlohmann::ordered_json(nullptr);
  j["summary"] = std::move(sj);
  return j;
}

}  // namespace cordseg
