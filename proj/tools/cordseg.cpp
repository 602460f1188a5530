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

// cordseg: synthesize data, train, run full-image inference, evaluate and
// serve case reports for review.
//
// Exit codes: 0 ok, 2 usage, 3 io, 4 empty split, 5 model mismatch, 6 port in use.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>

#include "cordseg/cordseg.hpp"
#include "cordseg/review_http.hpp"

namespace fs = std::filesystem;
using namespace cordseg;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kEmptySplit = 4,
  kModelMismatch = 5,
  kPortInUse = 6,
};

int exit_for(Errc code) {
  switch (code) {
    case Errc::empty_dataset: return kEmptySplit;
    case Errc::invalid_argument: return kUsage;
    case Errc::bad_magic:
    case Errc::crc_mismatch:
    case Errc::shape_table_mismatch: return kModelMismatch;
    default: return kIo;
  }
}

struct ModelError : Error {
  using Error::Error;
};

UNetWeights load_model(const fs::path& path) {
  try {
    return load_weights(path);
  } catch (const Error& e) {
    throw ModelError(e.code(), std::string("weights ") + path.string() + ": " + e.what());
  }
}

Segmenter unet_segmenter(const fs::path& path, int tile) {
  try {
    Segmenter s = Segmenter::unet(load_model(path));
    s.check_tile(tile);
    return s;
  } catch (const ModelError&) {
    throw;
  } catch (const Error& e) {
    throw ModelError(e.code(), e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), Errc::io, "cannot create directory " + dir.string());
  const fs::path probe = dir / ".cordseg_write_probe";
  write_text(probe, "");
  fs::remove(probe, ec);
}

void add_pipeline_flags(CLI::App* cmd, PipelineOptions& opt) {
  cmd->add_option("--tile", opt.tile, "Tile side in pixels")->capture_default_str();
  cmd->add_option("--cut", opt.cut, "Probability cut for binarization")->capture_default_str();
  cmd->add_option("--min-area", opt.min_area, "Minimum region area in pixels")->capture_default_str();
  cmd->add_option("--threshold", opt.threshold, "Positive iff cord count exceeds this")
      ->capture_default_str();
  cmd->add_option("--close", opt.close_iterations, "Closing iterations")->capture_default_str();
  cmd->add_option("--workers", opt.workers, "Tile inference threads (0: all cores)")
      ->capture_default_str();
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  fs::path out;
  int train = 120;
  int test = 30;
  std::uint64_t seed = 7;
  int size = 64;
  int max_cords = 4;
  int min_cords = 0;
  int scenes = 0;
  int scene_width = 768;
  int scene_height = 540;
  int scene_separation = 8;
  SynthSpec spec;
};

int cmd_synth(const SynthArgs& a) {
  ensure_dir(a.out);
  SynthSpec tmpl = a.spec;
  tmpl.width = tmpl.height = a.size;
  tmpl.n_cords = a.max_cords;
  SynthDataset ds = generate_dataset(tmpl, a.train, a.test, a.seed, a.min_cords);
  if (a.scenes > 0) {
    SynthSpec scene = a.spec;
    scene.width = a.scene_width;
    scene.height = a.scene_height;
    scene.min_separation = a.scene_separation;
    SynthDataset full = generate_scenes(scene, a.scenes, a.seed);
    for (auto& c : full.cases) ds.cases.push_back(std::move(c));
  }
  const auto m = write_dataset(ds, a.out);
  std::cout << "wrote " << m.cases.size() << " cases (" << m.count(Split::train) << " train, "
            << m.count(Split::test) << " test) to " << (a.out / "manifest.json").string() << "\n";
  return kOk;
}

struct TrainArgs {
  fs::path manifest;
  fs::path out;
  fs::path log;
  UNetConfig config;
  int epochs = 30;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& a) {
  a.config.validate();
  const DatasetManifest m = load_manifest(a.manifest);
  const auto samples = training_samples(m, a.config.tile);
  require(!samples.empty(), Errc::empty_dataset, "manifest has no train cases with masks");

  UNetWeights w = build(a.config, a.seed);
  const fs::path log_path = a.log.empty() ? fs::path(a.out.string() + ".log") : a.log;
  std::string log = "# epoch mean_loss\n";
  if (a.epochs > 0) {
    TrainOptions opt;
    opt.epochs = a.epochs;
    opt.lr = a.lr;
    opt.seed = a.seed ^ 0x5EEDull;
    opt.on_epoch = [](TrainRecord& r, const UNetWeights&) {
      std::cerr << "epoch " << r.epoch << " loss " << r.mean_loss << "\n";
    };
    TrainResult r = train(std::move(w), a.config, samples, opt);
    w = std::move(r.weights);
    for (const auto& rec : r.records) {
      char line[64];
      std::snprintf(line, sizeof line, "%d %.6f\n", rec.epoch, rec.mean_loss);
      log += line;
    }
  }
  save_weights(w, a.out);
  write_text(log_path, log);
  std::cout << "wrote " << a.out.string() << " (crc " << weights_fingerprint(w) << ")\n";
  return kOk;
}

struct InferArgs {
  fs::path image;
  fs::path weights;
  fs::path out;
  std::string id;
  PipelineOptions pipeline;
};

int cmd_infer(const InferArgs& a) {
  const GrayImage img = load_pgm(a.image);
  const Segmenter seg = unet_segmenter(a.weights, a.pipeline.tile);
  ensure_dir(a.out);
  const std::string id = a.id.empty() ? a.image.stem().string() : a.id;
  const PipelineResult r = run_pipeline(img, seg, a.pipeline);
  const CaseReport rep = write_case_outputs(a.out, id, img, r, seg.fingerprint());
  std::cout << id << ": " << rep.count << " cords, threshold " << rep.threshold << ", "
            << to_string(rep.verdict) << "\n";
  return kOk;
}

struct EvalArgs {
  fs::path manifest;
  fs::path weights;
  fs::path out;
  std::string segmenter = "unet";
  PipelineOptions pipeline;
};

int cmd_evaluate(const EvalArgs& a) {
  const DatasetManifest m = load_manifest(a.manifest);
  require(m.count(Split::test) > 0, Errc::empty_dataset, "manifest has no test cases");
  Segmenter seg = Segmenter::truth();
  if (a.segmenter == "unet") {
    require(!a.weights.empty(), Errc::invalid_argument, "--weights is required for --segmenter unet");
    seg = unet_segmenter(a.weights, a.pipeline.tile);
  } else if (a.segmenter == "kmeans") {
    seg = Segmenter::kmeans();
  }
  const EvalReport rep = evaluate(m, seg, a.pipeline);

  std::printf("%-14s %8s %6s %-9s %-9s\n", "case", "iou", "count", "verdict", "label");
  for (const auto& e : rep.cases) {
    std::printf("%-14s %8s %6d %-9s %-9s\n", e.id.c_str(),
                e.iou ? std::to_string(*e.iou).substr(0, 6).c_str() : "-", e.decision.cord_count,
                std::string(to_string(e.decision.verdict)).c_str(),
                e.label ? std::string(to_string(*e.label)).c_str() : "-");
  }
  const auto& s = rep.summary;
  if (!s.ious.empty()) {
    std::printf("%s IoU (%%): %.1f +/- %.1f over %zu images (sample std)%s\n", rep.segmenter.c_str(),
                100.0 * s.mean, 100.0 * s.stddev, s.ious.size(), s.degenerate ? " [degenerate]" : "");
  }
  if (s.case_accuracy) std::printf("case accuracy (%%): %.1f\n", 100.0 * *s.case_accuracy);
  if (!a.out.empty()) write_text(a.out, eval_to_json(rep).dump(2) + "\n");
  return kOk;
}

struct ServeArgs {
  fs::path reports;
  fs::path ui;
  std::string host = "127.0.0.1";
  int port = 8080;
};

int cmd_serve(const ServeArgs& a) {
  // Block termination signals in every thread; a dedicated thread waits for them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ReviewStore store(a.reports);
  httplib::Server server;
  // The library default also sets SO_REUSEPORT, which would let a second
  // server share a busy port instead of failing.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });
  mount_review_api(server, store, a.ui);

  int port = a.port;
  if (port == 0) {
    port = server.bind_to_any_port(a.host);
    if (port <= 0) {
      std::cerr << "cannot bind " << a.host << "\n";
      return kPortInUse;
    }
  } else if (!server.bind_to_port(a.host, port)) {
    std::cerr << "port " << port << " is in use\n";
    return kPortInUse;
  }
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  const bool ok = server.listen_after_bind();
  if (waiter.joinable()) {
    // listen can only return early on error; wake the waiter so it can exit.
    if (!ok) pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  std::cout << "shut down" << std::endl;
  return ok ? kOk : kIo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cord segmentation and counting pipeline"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic dataset and manifest");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--train", synth.train, "Training cases")->capture_default_str();
  s->add_option("--test", synth.test, "Test cases")->capture_default_str();
  s->add_option("--seed", synth.seed, "Dataset seed")->capture_default_str();
  s->add_option("--size", synth.size, "Side of each sub-image")->capture_default_str();
  s->add_option("--max-cords", synth.max_cords, "Most cords per sub-image")->capture_default_str();
  s->add_option("--min-cords", synth.min_cords, "Fewest cords per sub-image")->capture_default_str();
  s->add_option("--noise", synth.spec.noise_std, "Background noise std")->capture_default_str();
  s->add_option("--blur", synth.spec.blur_radius, "Box blur radius")->capture_default_str();
  s->add_option("--fg", synth.spec.fg_mean, "Cord mean intensity")->capture_default_str();
  s->add_option("--bg", synth.spec.bg_mean, "Background mean intensity")->capture_default_str();
  s->add_option("--illumination", synth.spec.illumination, "Background swell amplitude")
      ->capture_default_str();
  s->add_option("--separation", synth.spec.min_separation, "Minimum gap between cords")
      ->capture_default_str();
  s->add_option("--scenes", synth.scenes, "Labelled full-size test scenes")->capture_default_str();
  s->add_option("--scene-width", synth.scene_width)->capture_default_str();
  s->add_option("--scene-height", synth.scene_height)->capture_default_str();
  s->add_option("--scene-separation", synth.scene_separation)->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a U-Net on a manifest's train split");
  t->add_option("--manifest", tr.manifest, "Dataset manifest")->required();
  t->add_option("--out", tr.out, "Output weight file")->required();
  t->add_option("--log", tr.log, "Training log (default: <out>.log)");
  t->add_option("--depth", tr.config.depth, "Pooling stages")->capture_default_str();
  t->add_option("--base-channels", tr.config.base_channels, "Channels at the top level")
      ->capture_default_str();
  t->add_option("--tile", tr.config.tile, "Training tile side")->capture_default_str();
  t->add_option("--epochs", tr.epochs)->capture_default_str();
  t->add_option("--lr", tr.lr)->capture_default_str();
  t->add_option("--seed", tr.seed)->capture_default_str();

  InferArgs inf;
  auto* i = app.add_subcommand("infer", "Segment, count and decide on one full image");
  i->add_option("--image", inf.image, "Input PGM")->required();
  i->add_option("--weights", inf.weights, "Weight file")->required();
  i->add_option("--out", inf.out, "Report directory")->required();
  i->add_option("--id", inf.id, "Case id (default: image file stem)");
  add_pipeline_flags(i, inf.pipeline);

  EvalArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score a segmenter on a manifest's test split");
  e->add_option("--manifest", ev.manifest, "Dataset manifest")->required();
  e->add_option("--weights", ev.weights, "Weight file (unet segmenter)");
  e->add_option("--segmenter", ev.segmenter, "unet, kmeans or truth")
      ->check(CLI::IsMember({"unet", "kmeans", "truth"}))
      ->capture_default_str();
  e->add_option("--out", ev.out, "Write the evaluation JSON here");
  add_pipeline_flags(e, ev.pipeline);

  ServeArgs sv;
  auto* v = app.add_subcommand("serve", "Serve case reports over HTTP for review");
  v->add_option("--reports", sv.reports, "Report directory")->required();
  v->add_option("--port", sv.port, "TCP port (0: any free port)")->capture_default_str();
  v->add_option("--host", sv.host)->capture_default_str();
  v->add_option("--ui", sv.ui, "Static UI bundle served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*t) return cmd_train(tr);
    if (*i) return cmd_infer(inf);
    if (*e) return cmd_evaluate(ev);
    if (*v) return cmd_serve(sv);
  } catch (const ModelError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kModelMismatch;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_for(err.code());
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kIo;
  }
  return kUsage;
}
