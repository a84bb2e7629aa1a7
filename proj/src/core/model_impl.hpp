// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

// Key-level model internals shared by the model and the planner.

#pragma once

#include "gps/model.hpp"
#include "rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace gps {

inline constexpr std::uint8_t no_net_kind = 0xff;

/// Condition with the application value interned (0 = none) and the network
/// value in numeric form.
struct CondKey {
  std::uint32_t app = 0;
  std::uint32_t net = 0;
  Port port = 0;
  ConditionClass cls = ConditionClass::port_only;
  std::uint8_t net_kind = no_net_kind;

  friend bool operator==(const CondKey&, const CondKey&) = default;
};

struct CondKeyHash {
  std::size_t operator()(const CondKey& k) const noexcept {
    auto a = (static_cast<std::uint64_t>(k.app) << 32) | k.net;
    auto b = (static_cast<std::uint64_t>(k.port) << 16) |
             (static_cast<std::uint64_t>(k.cls) << 8) | k.net_kind;
    return static_cast<std::size_t>(hash_mix(a, b));
  }
};

/// Conditions derivable from one service on a host.
struct ServiceKeys {
  Port port = 0;
  std::vector<CondKey> keys;
};

struct KeyCandidate {
  CondKey key;
  CountPair counts;
};

struct CoOccurrenceModel::Impl {
  FeatureConfig features;
  std::uint32_t min_support = 2;
  std::string built_from;

  // Interned application values; id i refers to app_values[i - 1].
  std::vector<FeatureValue> app_values;
  std::vector<std::uint32_t> app_rank; // rank of id in (kind, value) order
  std::unordered_map<std::string, std::uint32_t> app_ids;

  std::vector<Row> rows;
  std::vector<CondKey> row_keys;
  std::vector<Target> targets;
  std::unordered_map<CondKey, std::uint32_t, CondKeyHash> row_index;

  static std::string intern_key(FeatureKind kind, std::string_view value) {
    std::string k;
    k.reserve(value.size() + 1);
    k += static_cast<char>(kind);
    k += value;
    return k;
  }

  std::uint32_t intern(const FeatureValue& v);
  std::uint32_t find_app(const FeatureValue& v) const;
  void rank_app_values();

  /// Keys of every service on one host. App values unknown to the model are
  /// skipped: they cannot have entries.
  std::vector<ServiceKeys> host_keys(std::span<const ServiceRecord> services) const;

  std::optional<CountPair> lookup(const CondKey& key, Port target) const;

  /// Best candidate for `target` among services not on `target`.
  std::optional<KeyCandidate> best_among(std::span<const ServiceKeys> host, Port target) const;

  /// Strict-weak "x ranks before y" used by every argmax.
  bool better(const KeyCandidate& x, const KeyCandidate& y) const;

  Condition materialize(const CondKey& key) const;
  std::optional<CondKey> key_of(const Condition& c) const;

  /// Canonical (port, class, app, net) ordering of keys.
  bool canonical_less(const CondKey& x, const CondKey& y) const;

  /// Installs rows in canonical order and rebuilds the index.
  void finalize(std::vector<std::tuple<CondKey, std::uint32_t, std::vector<Target>>> grouped);
};

/// Class preference in ties: port_app_net > port_app > port_net > port_only.
constexpr int class_preference(ConditionClass c) {
  switch (c) {
    case ConditionClass::port_app_net:
      return 3;
    case ConditionClass::port_app:
      return 2;
    case ConditionClass::port_net:
      return 1;
    case ConditionClass::port_only:
      return 0;
  }
  return 0;
}

} // namespace gps
