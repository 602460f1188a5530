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

#include <filesystem>
#include <functional>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cordseg/review.hpp"

namespace cordseg {

inline nlohmann::ordered_json decision_to_json(const Decision& d, std::uint64_t revision) {
  nlohmann::ordered_json j;
  j["count"] = d.cord_count;
  j["threshold"] = d.threshold;
  j["verdict"] = std::string(to_string(d.verdict));
  j["revision"] = revision;
  return j;
}

inline nlohmann::ordered_json case_view_to_json(const CaseView& v) {
  nlohmann::ordered_json j;
  j["report"] = report_to_json(v.report);
  auto regions = nlohmann::ordered_json::array();
  for (const auto& r : v.regions) regions.push_back(region_to_json(r));
  j["regions"] = std::move(regions);
  j["session"] = session_to_json(v.session, v.decision);
  j["decision"] = decision_to_json(v.decision, v.session.revision);
  j["image"] = "/api/cases/" + v.report.id + "/image";
  j["mask"] = "/api/cases/" + v.report.id + "/mask";
  j["overlay"] = "/api/cases/" + v.report.id + "/overlay";
  return j;
}

namespace detail {

inline int http_status(Errc code) {
  switch (code) {
    case Errc::not_found: return 404;
    case Errc::invalid_argument:
    case Errc::malformed: return 400;
    default: return 500;
  }
}

inline void send_json(httplib::Response& res, const nlohmann::ordered_json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& msg) {
  nlohmann::ordered_json j;
  j["error"] = msg;
  send_json(res, j, status);
}

// Runs `body`, translating library and JSON errors into HTTP statuses.
inline void guarded(httplib::Response& res, const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    send_error(res, http_status(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

inline nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed, std::string("request body: ") + e.what());
  }
}

inline constexpr const char* kPlaceholderPage =
    "<!doctype html><html><head><title>cordseg review</title></head><body>"
    "<h1>cordseg review service</h1><p>No UI bundle installed. The JSON API is at "
    "<a href=\"/api/cases\">/api/cases</a>.</p></body></html>";

}  // namespace detail

/// Registers the review API on `server`. If `ui_dir` names an existing
/// directory it is served at `/`, otherwise `/` returns a placeholder page.
inline void mount_review_api(httplib::Server& server, ReviewStore& store,
                             const std::filesystem::path& ui_dir = {}) {
  using detail::guarded;
  using detail::send_json;

  server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, nlohmann::ordered_json{{"status", "ok"}});
  });

  server.Get("/api/cases", [&store](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& c : store.list_cases()) {
        arr.push_back({{"id", c.id}, {"count", c.count}, {"verdict", std::string(to_string(c.verdict))}});
      }
      send_json(res, arr);
    });
  });

  server.Get(R"(/api/cases/([^/]+))", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, case_view_to_json(store.get_case(req.matches[1]))); });
  });

  server.Get(R"(/api/cases/([^/]+)/decision)",
             [&store](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const CaseView v = store.get_case(req.matches[1]);
                 send_json(res, decision_to_json(v.decision, v.session.revision));
               });
             });

  auto serve_pgm = [&store](std::string (*name)(const std::string&)) {
    return [&store, name](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        store.get_case(id);  // 404 for unknown ids
        const auto path = store.file(id, name);
        require(std::filesystem::exists(path), Errc::not_found, "no " + path.filename().string());
        const auto bytes = read_file_bytes(path);
        res.set_content(std::string(bytes.begin(), bytes.end()), "image/x-portable-graymap");
      });
    };
  };
  server.Get(R"(/api/cases/([^/]+)/mask)", serve_pgm(&CaseFiles::mask));
  server.Get(R"(/api/cases/([^/]+)/image)", serve_pgm(&CaseFiles::image));
  server.Get(R"(/api/cases/([^/]+)/overlay)", serve_pgm(&CaseFiles::overlay));

  server.Patch(R"(/api/cases/([^/]+)/regions/(-?\d+))",
               [&store](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   const auto body = detail::parse_body(req);
                   require(body.is_object() && body.contains("included") &&
                               body["included"].is_boolean(),
                           Errc::malformed, "body must be {\"included\": bool}");
                   const std::string id = req.matches[1];
                   store.set_region_included(id, std::stoi(req.matches[2]),
                                             body["included"].get<bool>());
                   const CaseView v = store.get_case(id);
                   send_json(res, decision_to_json(v.decision, v.session.revision));
                 });
               });

  server.Put(R"(/api/cases/([^/]+)/threshold)",
             [&store](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const auto body = detail::parse_body(req);
                 require(body.is_object() && body.contains("threshold") &&
                             body["threshold"].is_number_integer(),
                         Errc::malformed, "body must be {\"threshold\": int}");
                 const std::string id = req.matches[1];
                 store.set_threshold(id, body["threshold"].get<int>());
                 const CaseView v = store.get_case(id);
                 send_json(res, decision_to_json(v.decision, v.session.revision));
               });
             });

  std::error_code ec;
  if (!ui_dir.empty() && std::filesystem::is_directory(ui_dir, ec)) {
    server.set_mount_point("/", ui_dir.string());
  } else {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(detail::kPlaceholderPage, "text/html");
    });
  }
}

}  // namespace cordseg
