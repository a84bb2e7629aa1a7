// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

// Loop implementations of the coverage metrics.

#pragma once

#include "gps/service.hpp"

#include <map>
#include <set>
#include <utility>
#include <vector>

namespace gps::testing {

using Pair = std::pair<std::uint32_t, Port>;

inline double loop_fraction(const std::set<Pair>& found, const std::set<Pair>& truth) {
  std::size_t hit = 0;
  for (const auto& t : truth)
    hit += found.count(t);
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

inline double loop_normalized(const std::set<Pair>& found, const std::set<Pair>& truth,
                              const std::vector<Port>& ports) {
  double sum = 0;
  for (auto p : ports) {
    std::size_t total = 0;
    std::size_t hit = 0;
    for (const auto& t : truth)
      if (t.second == p) {
        ++total;
        hit += found.count(t);
      }
    sum += static_cast<double>(hit) / static_cast<double>(total);
  }
  return sum / static_cast<double>(ports.size());
}

inline std::vector<Port> loop_port_order(const std::set<Pair>& truth) {
  std::map<Port, std::size_t> counts;
  for (const auto& t : truth)
    ++counts[t.second];
  std::vector<Port> out;
  while (!counts.empty()) {
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
      if (it->second > best->second)
        best = it;
    out.push_back(best->first);
    counts.erase(best);
  }
  return out;
}

} // namespace gps::testing
