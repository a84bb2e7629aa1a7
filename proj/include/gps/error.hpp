// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gps {

/// Failure categories. Values are stable: the C API and CLI exit codes use
/// them directly.
enum class Errc : int {
  io = 1,
  parse = 2,
  invalid_argument = 3,
  capacity = 4,
  rejected = 5,
  unavailable = 6,
  undefined_metric = 7,
  internal = 8,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

} // namespace gps
