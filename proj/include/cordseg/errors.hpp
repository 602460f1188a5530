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

#include <stdexcept>
#include <string>
#include <string_view>

namespace cordseg {

enum class Errc {
  invalid_argument,
  shape_mismatch,
  bad_magic,
  truncated,
  crc_mismatch,
  shape_table_mismatch,
  unsupported_format,
  not_binary,
  io,
  duplicate_id,
  missing_file,
  malformed,
  degenerate_input,
  placement,
  not_found,
  empty_dataset,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::shape_mismatch: return "shape mismatch";
    case Errc::bad_magic: return "bad magic";
    case Errc::truncated: return "truncated";
    case Errc::crc_mismatch: return "crc mismatch";
    case Errc::shape_table_mismatch: return "shape table mismatch";
    case Errc::unsupported_format: return "unsupported format";
    case Errc::not_binary: return "not binary";
    case Errc::io: return "io error";
    case Errc::duplicate_id: return "duplicate id";
    case Errc::missing_file: return "missing file";
    case Errc::malformed: return "malformed";
    case Errc::degenerate_input: return "degenerate input";
    case Errc::placement: return "placement";
    case Errc::not_found: return "not found";
    case Errc::empty_dataset: return "empty dataset";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI, the HTTP layer) can map it to a stable exit or status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace cordseg
