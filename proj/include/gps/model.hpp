// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gps/corpus.hpp"
#include "gps/features.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace gps {

/// Evidence shapes, in tie-break preference order (highest last).
enum class ConditionClass : std::uint8_t { port_only, port_app, port_net, port_app_net };

std::string_view name(ConditionClass cls);
std::optional<ConditionClass> condition_class_from_name(std::string_view name);

/// "Service on port_b is open", optionally qualified by an application value
/// of that service and/or a network value of its host.
struct Condition {
  ConditionClass cls = ConditionClass::port_only;
  Port port_b = 0;
  std::optional<FeatureValue> app;
  std::optional<FeatureValue> net;

  static Condition port_only(Port p) { return {ConditionClass::port_only, p, {}, {}}; }
  static Condition port_app(Port p, FeatureValue app) {
    return {ConditionClass::port_app, p, std::move(app), {}};
  }
  static Condition port_net(Port p, FeatureValue net) {
    return {ConditionClass::port_net, p, {}, std::move(net)};
  }
  static Condition port_app_net(Port p, FeatureValue app, FeatureValue net) {
    return {ConditionClass::port_app_net, p, std::move(app), std::move(net)};
  }

  /// Human-readable form, e.g. `(22, ssh_banner="X", subnet16=1.2.0.0/16)`.
  std::string to_string() const;

  friend auto operator<=>(const Condition&, const Condition&) = default;
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct ConditionHash {
  std::size_t operator()(const Condition& c) const noexcept;
};

/// Every condition derivable from one service given its host's network
/// features: one PortOnly, one PortApp per app value, one PortNet per net
/// value, and the full app x net product.
std::vector<Condition> derive_conditions(const ServiceRecord& service,
                                         std::span<const FeatureValue> app_values,
                                         std::span<const FeatureValue> net_values);

/// Which features feed the model.
struct FeatureConfig {
  FeatureKindSet app_kinds = FeatureKindSet::all_app();
  FeatureKindSet net_kinds = default_net_kinds;
  std::shared_ptr<const AsnTable> asn = std::make_shared<AsnTable>();

  std::vector<FeatureValue> app_values(const ServiceRecord& r) const {
    return extract_app_features(r, app_kinds);
  }
  std::vector<FeatureValue> net_values(IPv4Address ip) const {
    return extract_net_features(ip, net_kinds, *asn);
  }
  std::vector<Condition> conditions(const ServiceRecord& r) const {
    auto app = app_values(r);
    auto net = net_values(r.ip);
    return derive_conditions(r, app, net);
  }
};

struct ModelOptions {
  FeatureConfig features;
  std::uint32_t min_support = 2;
  unsigned partitions = 1;
};

/// Counts behind one conditional probability.
struct CountPair {
  std::uint32_t joint_hosts = 0;
  std::uint32_t cond_hosts = 0;

  double probability() const { return static_cast<double>(joint_hosts) / cond_hosts; }
  friend bool operator==(CountPair, CountPair) = default;
};

struct ScoredCondition {
  Condition condition;
  CountPair counts;

  double probability() const { return counts.probability(); }
};

/// Ranking used by every argmax: higher probability, then more cond_hosts,
/// then lower port_b, then class (port_app_net > port_app > port_net >
/// port_only), then the feature values themselves.
bool better_condition(const ScoredCondition& x, const ScoredCondition& y);

/// Conditional-probability tables P(target | condition) over a seed set.
/// Immutable once built; all lookups are const and thread-safe.
class CoOccurrenceModel {
public:
  struct Target {
    Port port = 0;
    std::uint32_t joint_hosts = 0;
    friend bool operator==(Target, Target) = default;
  };

  struct Row {
    Condition condition;
    std::uint32_t cond_hosts = 0;
    std::uint32_t target_begin = 0;
    std::uint32_t target_end = 0;
  };

  CoOccurrenceModel();
  CoOccurrenceModel(const CoOccurrenceModel&);
  CoOccurrenceModel(CoOccurrenceModel&&) noexcept;
  CoOccurrenceModel& operator=(const CoOccurrenceModel&);
  CoOccurrenceModel& operator=(CoOccurrenceModel&&) noexcept;
  ~CoOccurrenceModel();

  /// joint/cond for an existing entry; never 0.
  std::optional<double> probability(const Condition& cond, Port target) const;
  std::optional<CountPair> counts(const Condition& cond, Port target) const;

  /// Argmax over every condition derivable from `host_services` (skipping
  /// services on `target` itself) of P(target | condition).
  std::optional<ScoredCondition> best_condition_for(std::span<const ServiceRecord> host_services,
                                                    Port target) const;

  /// Rows in canonical order (port_b, class, app, net).
  std::span<const Row> rows() const;
  std::span<const Target> targets(const Row& row) const;
  std::size_t entry_count() const;
  bool empty() const { return rows().empty(); }

  const FeatureConfig& features() const;
  std::uint32_t min_support() const;
  const std::string& built_from() const;

  /// Structured-text dump: one JSON header line, then one JSON line per
  /// condition. Lossless round trip.
  void write(std::ostream& out) const;
  static CoOccurrenceModel read(std::istream& in, std::shared_ptr<const AsnTable> asn = nullptr);

  friend bool operator==(const CoOccurrenceModel& x, const CoOccurrenceModel& y);

  struct Impl;
  const Impl& impl() const { return *impl_; }

private:
  friend CoOccurrenceModel build_model(const Corpus&, const ModelOptions&);
  explicit CoOccurrenceModel(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Counts every ordered port pair (b, a) of every multi-service host for all
/// four condition classes derived from the service on b. cond_hosts counts
/// hosts exhibiting the condition, including single-service hosts.
/// Conditions with cond_hosts < min_support are dropped. The result does not
/// depend on `partitions`.
CoOccurrenceModel build_model(const Corpus& seed, const ModelOptions& options = {});

/// Share of seed services whose best predictor is conditioned on each
/// network kind, over services with a network-conditioned best predictor.
/// Sorted by descending share, then kind. Throws Error(Errc::unavailable)
/// when the model was built without network kinds.
std::vector<std::pair<FeatureKind, double>> rank_net_features(const CoOccurrenceModel& model,
                                                              const Corpus& seed);

} // namespace gps
