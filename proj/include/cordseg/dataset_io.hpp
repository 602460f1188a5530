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

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cordseg/errors.hpp"
#include "cordseg/image.hpp"
#include "cordseg/postprocess.hpp"
#include "cordseg/synthdata.hpp"
#include "cordseg/unet.hpp"

namespace cordseg {

// ---------------------------------------------------------------------------
// Binary PGM (P5, maxval 255)

inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

inline GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  require(bytes.size() >= 2 && bytes[0] == 'P', Errc::unsupported_format, "not a PNM file");
  require(bytes[1] == '5', Errc::unsupported_format,
          std::string("only binary P5 is supported, got P") + static_cast<char>(bytes[1]));
  pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&](const char* what) {
    skip_space();
    require(pos < bytes.size() && std::isdigit(bytes[pos]), Errc::malformed,
            std::string("PGM header: expected ") + what);
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      require(v <= (1L << 30), Errc::malformed, std::string("PGM header: ") + what + " too large");
    }
    return v;
  };
  const long w = number("width");
  const long h = number("height");
  const long maxval = number("maxval");
  require(w > 0 && h > 0, Errc::malformed, "PGM dims must be positive");
  require(maxval == 255, Errc::unsupported_format,
          "maxval " + std::to_string(maxval) + " (only 255 is supported)");
  require(pos < bytes.size() && std::isspace(bytes[pos]), Errc::truncated, "PGM header ends early");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  require(bytes.size() - pos >= n, Errc::truncated,
          "PGM payload has " + std::to_string(bytes.size() - pos) + " bytes, need " +
              std::to_string(n));
  return GrayImage(static_cast<int>(w), static_cast<int>(h),
                   std::vector<std::uint8_t>(bytes.begin() + pos, bytes.begin() + pos + n));
}

inline GrayImage load_pgm(const std::filesystem::path& path) {
  return decode_pgm(read_file_bytes(path));
}

inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  write_file_bytes(path, encode_pgm(img));
}

inline GrayImage mask_to_image(const BinaryMask& m) {
  GrayImage img(m.width(), m.height());
  auto in = m.pixels();
  auto out = img.pixels();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] ? 255 : 0;
  return img;
}

inline BinaryMask image_to_mask(const GrayImage& img) {
  BinaryMask m(img.width(), img.height());
  auto in = img.pixels();
  auto out = m.pixels();
  for (std::size_t i = 0; i < in.size(); ++i) {
    require(in[i] == 0 || in[i] == 255, Errc::not_binary,
            "pixel " + std::to_string(i) + " has value " + std::to_string(in[i]));
    out[i] = in[i] ? 1 : 0;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestCase {
  std::string id;
  std::string image;               // path relative to the manifest directory
  std::optional<std::string> mask;
  Split split = Split::train;
  std::optional<Verdict> label;
  std::optional<int> true_count;

  friend bool operator==(const ManifestCase&, const ManifestCase&) = default;
};

struct DatasetManifest {
  std::filesystem::path root;  // directory relative paths are resolved against
  std::vector<ManifestCase> cases;

  std::size_t count(Split s) const {
    std::size_t n = 0;
    for (const auto& c : cases) n += c.split == s;
    return n;
  }
  std::filesystem::path resolve(const std::string& rel) const { return root / rel; }
};

inline nlohmann::ordered_json manifest_to_json(const DatasetManifest& m) {
  auto cases = nlohmann::ordered_json::array();
  for (const auto& c : m.cases) {
    nlohmann::ordered_json j;
    j["id"] = c.id;
    j["image"] = c.image;
    j["mask"] = c.mask ? nlohmann::ordered_json(*c.mask) : nlohmann::ordered_json(nullptr);
    j["split"] = std::string(to_string(c.split));
    j["label"] = c.label ? nlohmann::ordered_json(std::string(to_string(*c.label)))
                         : nlohmann::ordered_json(nullptr);
    j["true_count"] = c.true_count ? nlohmann::ordered_json(*c.true_count)
                                   : nlohmann::ordered_json(nullptr);
    cases.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["cases"] = std::move(cases);
  return doc;
}

/// Parses and validates a manifest document without touching the filesystem.
inline DatasetManifest manifest_from_json(const nlohmann::json& doc, std::filesystem::path root) {
  DatasetManifest m{std::move(root), {}};
  require(doc.is_object() && doc.contains("cases") && doc["cases"].is_array(), Errc::malformed,
          "manifest must be an object with a 'cases' array");
  std::set<std::string> seen;
  for (const auto& j : doc["cases"]) {
    try {
      ManifestCase c;
      c.id = j.at("id").get<std::string>();
      c.image = j.at("image").get<std::string>();
      if (j.contains("mask") && !j["mask"].is_null()) c.mask = j["mask"].get<std::string>();
      const auto split = j.at("split").get<std::string>();
      require(split == "train" || split == "test", Errc::malformed, "bad split '" + split + "'");
      c.split = split == "train" ? Split::train : Split::test;
      if (j.contains("label") && !j["label"].is_null())
        c.label = parse_verdict(j["label"].get<std::string>());
      if (j.contains("true_count") && !j["true_count"].is_null())
        c.true_count = j["true_count"].get<int>();
      require(seen.insert(c.id).second, Errc::duplicate_id, "case id '" + c.id + "' repeats");
      m.cases.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::malformed, std::string("manifest record: ") + e.what());
    }
  }
  return m;
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), Errc::io, "cannot write " + path.string());
  f << manifest_to_json(m).dump(2) << "\n";
  require(static_cast<bool>(f), Errc::io, "short write to " + path.string());
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), Errc::io, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed, path.string() + ": " + e.what());
  }
  DatasetManifest m = manifest_from_json(doc, path.parent_path());
  for (const auto& c : m.cases) {
    require(std::filesystem::exists(m.resolve(c.image)), Errc::missing_file,
            "case " + c.id + ": " + c.image);
    if (c.mask)
      require(std::filesystem::exists(m.resolve(*c.mask)), Errc::missing_file,
              "case " + c.id + ": " + *c.mask);
  }
  return m;
}

struct LoadedCase {
  GrayImage image;
  std::optional<BinaryMask> mask;
};

inline LoadedCase load_case(const DatasetManifest& m, const ManifestCase& c) {
  LoadedCase out{load_pgm(m.resolve(c.image)), std::nullopt};
  if (c.mask) {
    out.mask = image_to_mask(load_pgm(m.resolve(*c.mask)));
    require(out.mask->same_dims(out.image), Errc::shape_mismatch,
            "case " + c.id + ": mask and image dimensions differ");
  }
  return out;
}

/// Writes images, masks and manifest.json into `dir` and returns the manifest.
inline DatasetManifest write_dataset(const SynthDataset& ds, const std::filesystem::path& dir,
                                     const std::string& manifest_name = "manifest.json") {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec && std::filesystem::is_directory(dir), Errc::io, "cannot create " + dir.string());
  DatasetManifest m{dir, {}};
  for (const auto& c : ds.cases) {
    ManifestCase mc;
    mc.id = c.id;
    mc.image = c.id + ".pgm";
    mc.mask = c.id + "_mask.pgm";
    mc.split = c.split;
    mc.label = c.label;
    mc.true_count = c.data.true_count;
    save_pgm(c.data.image, dir / mc.image);
    save_pgm(mask_to_image(c.data.mask), dir / *mc.mask);
    m.cases.push_back(std::move(mc));
  }
  save_manifest(m, dir / manifest_name);
  return m;
}

}  // namespace cordseg
