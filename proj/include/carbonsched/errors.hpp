// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace carbonsched {

enum class errc {
  parse_error,
  duplicate_region,
  shape_mismatch,
  unknown_region,
  negative_latency,
  missing_hour,
  negative_value,
  out_of_range,
  dimension_mismatch,
  invalid_param,
  instance_too_large,
  trace_exhausted,
  invalid_spec,
  io_error,
};

/// Stable machine-parsable name, e.g. "MissingHour".
const char* errc_name(errc code);

/// All library failures surface as Error; what() is "<Name>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code) {}

  errc code() const noexcept { return code_; }
  const char* name() const noexcept { return errc_name(code_); }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace carbonsched
