// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

// Small CSV helpers for the plan and curve files.

#pragma once

#include "gps/error.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gps {

/// Text that parses back to the same double: 15 significant digits when
/// that round-trips, 17 otherwise.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  double back = 0;
  std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
  if (back != v)
    std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Reads comma-separated lines, skipping an optional header line and blank
/// lines. Errors name the source and line.
class CsvReader {
public:
  CsvReader(std::istream& in, std::string source, std::string_view header)
      : in_(in), source_(std::move(source)), header_(header) {}

  std::optional<std::vector<std::string_view>> next(std::size_t expected) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!line_.empty() && line_.back() == '\r')
        line_.pop_back();
      if (line_.empty() || (line_no_ == 1 && line_ == header_))
        continue;
      std::vector<std::string_view> fields;
      std::string_view rest = line_;
      for (;;) {
        auto comma = rest.find(',');
        fields.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos)
          break;
        rest.remove_prefix(comma + 1);
      }
      if (fields.size() != expected)
        fail("expected " + std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
      return fields;
    }
    return std::nullopt;
  }

  template <class T>
  T integer(std::string_view text) const {
    T v{};
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
      fail("bad integer '" + std::string(text) + "'");
    return v;
  }

  double real(std::string_view text) const {
    double v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
      fail("bad number '" + std::string(text) + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::parse, source_ + " line " + std::to_string(line_no_) + ": " + what);
  }

private:
  std::istream& in_;
  std::string source_;
  std::string_view header_;
  std::string line_;
  std::size_t line_no_ = 0;
};

} // namespace gps
