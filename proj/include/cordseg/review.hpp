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
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cordseg/errors.hpp"
#include "cordseg/pipeline.hpp"
#include "cordseg/postprocess.hpp"

namespace cordseg {

/// Reviewer adjustments layered over an immutable CaseReport.
struct ReviewSession {
  std::string id;
  int threshold = kDefaultThreshold;
  std::map<int, bool> overrides;  // region id -> included
  std::string note;
  std::uint64_t revision = 0;

  friend bool operator==(const ReviewSession&, const ReviewSession&) = default;
};

struct CaseSummary {
  std::string id;
  int count = 0;
  Verdict verdict = Verdict::negative;
};

/// Report with session overrides applied and the decision recomputed from them.
struct CaseView {
  CaseReport report;
  ReviewSession session;
  std::vector<Region> regions;  // report regions with overrides applied
  Decision decision;
};

inline std::vector<Region> apply_overrides(const CaseReport& rep, const ReviewSession& s) {
  std::vector<Region> regions = rep.regions;
  for (Region& r : regions) {
    if (auto it = s.overrides.find(r.id); it != s.overrides.end()) r.included = it->second;
  }
  return regions;
}

inline nlohmann::ordered_json session_to_json(const ReviewSession& s, const Decision& d) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["threshold"] = s.threshold;
  auto ov = nlohmann::ordered_json::object();
  for (const auto& [rid, inc] : s.overrides) ov[std::to_string(rid)] = inc;
  j["overrides"] = std::move(ov);
  j["note"] = s.note;
  j["revision"] = s.revision;
  // Written for readers of the sidecar; always recomputed on load.
  j["count"] = d.cord_count;
  j["verdict"] = std::string(to_string(d.verdict));
  return j;
}

inline ReviewSession session_from_json(const nlohmann::json& j) {
  try {
    ReviewSession s;
    s.id = j.at("id").get<std::string>();
    s.threshold = j.at("threshold").get<int>();
    for (const auto& [k, v] : j.at("overrides").items()) s.overrides[std::stoi(k)] = v.get<bool>();
    s.note = j.value("note", std::string{});
    s.revision = j.value("revision", std::uint64_t{0});
    return s;
  } catch (const std::exception& e) {
    fail(Errc::malformed, std::string("review session: ") + e.what());
  }
}

/// Case reports in one directory plus their review sessions. Reads may run
/// concurrently; writes to one case are serialized and bump its revision.
class ReviewStore {
 public:
  explicit ReviewStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    require(std::filesystem::is_directory(dir_), Errc::io, "not a directory: " + dir_.string());
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::vector<std::string> case_ids() const {
    std::vector<std::string> ids;
    const std::string suffix = ".report.json";
    for (const auto& e : std::filesystem::directory_iterator(dir_)) {
      if (!e.is_regular_file()) continue;
      const std::string name = e.path().filename().string();
      if (name.size() > suffix.size() && name.ends_with(suffix))
        ids.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  /// Sorted by id.
  std::vector<CaseSummary> list_cases() const {
    std::vector<CaseSummary> out;
    for (const auto& id : case_ids()) {
      const CaseView v = get_case(id);
      out.push_back({id, v.decision.cord_count, v.decision.verdict});
    }
    return out;
  }

  CaseView get_case(const std::string& id) const {
    auto lock = lock_case(id);
    return view_locked(id);
  }

  Decision decision(const std::string& id) const { return get_case(id).decision; }

  Decision set_region_included(const std::string& id, int region_id, bool included) {
    return mutate(id, [&](const CaseReport& rep, ReviewSession& s) {
      const bool known = std::any_of(rep.regions.begin(), rep.regions.end(),
                                     [&](const Region& r) { return r.id == region_id; });
      require(known, Errc::not_found,
              "case " + id + " has no region " + std::to_string(region_id));
      s.overrides[region_id] = included;
    });
  }

  Decision set_threshold(const std::string& id, int threshold) {
    require(threshold >= 0, Errc::invalid_argument, "threshold must be >= 0");
    return mutate(id, [&](const CaseReport&, ReviewSession& s) { s.threshold = threshold; });
  }

  Decision set_note(const std::string& id, std::string note) {
    return mutate(id, [&](const CaseReport&, ReviewSession& s) { s.note = std::move(note); });
  }

  std::filesystem::path file(const std::string& id, std::string (*name)(const std::string&)) const {
    check_id(id);
    return dir_ / name(id);
  }

 private:
  static void check_id(const std::string& id) {
    const bool ok = !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    }) && id.find("..") == std::string::npos;
    require(ok, Errc::not_found, "invalid case id '" + id + "'");
  }

  std::unique_lock<std::mutex> lock_case(const std::string& id) const {
    check_id(id);
    std::shared_ptr<std::mutex> m;
    {
      std::lock_guard<std::mutex> g(table_mutex_);
      auto& slot = case_mutex_[id];
      if (!slot) slot = std::make_shared<std::mutex>();
      m = slot;
    }
    return std::unique_lock<std::mutex>(*m);
  }

  CaseReport load_report(const std::string& id) const {
    const auto path = dir_ / CaseFiles::report(id);
    require(std::filesystem::exists(path), Errc::not_found, "unknown case '" + id + "'");
    try {
      return report_from_json(nlohmann::json::parse(read_text(path)));
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::malformed, std::string("report ") + id + ": " + e.what());
    }
  }

  ReviewSession load_session(const std::string& id, const CaseReport& rep) const {
    const auto path = dir_ / CaseFiles::session(id);
    if (!std::filesystem::exists(path)) {
      ReviewSession s;
      s.id = id;
      s.threshold = rep.threshold;
      return s;
    }
    try {
      return session_from_json(nlohmann::json::parse(read_text(path)));
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::malformed, std::string("session ") + id + ": " + e.what());
    }
  }

  CaseView view_locked(const std::string& id) const {
    CaseView v;
    v.report = load_report(id);
    v.session = load_session(id, v.report);
    v.regions = apply_overrides(v.report, v.session);
    v.decision = decide(std::span<const Region>(v.regions), v.session.threshold);
    return v;
  }

  template <class F>
  Decision mutate(const std::string& id, F&& change) {
    auto lock = lock_case(id);
    CaseView v = view_locked(id);
    ReviewSession next = v.session;
    change(v.report, next);
    ++next.revision;
    const auto regions = apply_overrides(v.report, next);
    const Decision d = decide(std::span<const Region>(regions), next.threshold);
    const auto path = dir_ / CaseFiles::session(id);
    const auto tmp = dir_ / (CaseFiles::session(id) + ".tmp");
    write_text(tmp, session_to_json(next, d).dump(2) + "\n");
    std::filesystem::rename(tmp, path);
    return d;
  }

  std::filesystem::path dir_;
  mutable std::mutex table_mutex_;
  mutable std::map<std::string, std::shared_ptr<std::mutex>> case_mutex_;
};

}  // namespace cordseg
