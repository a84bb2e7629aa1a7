// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "gps/error.hpp"

namespace gps {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::io:
      return "io";
    case Errc::parse:
      return "parse";
    case Errc::invalid_argument:
      return "invalid_argument";
    case Errc::capacity:
      return "capacity";
    case Errc::rejected:
      return "rejected";
    case Errc::unavailable:
      return "unavailable";
    case Errc::undefined_metric:
      return "undefined_metric";
    case Errc::internal:
      return "internal";
  }
  return "unknown";
}

} // namespace gps
