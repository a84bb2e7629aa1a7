// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gps/corpus.hpp"
#include "gps/model.hpp"
#include "gps/planner.hpp"
#include "gps/scansim.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <unordered_map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace gps {

/// The set of services a strategy is scored against.
class GroundTruth {
public:
  GroundTruth() = default;
  explicit GroundTruth(std::vector<ServiceKey> services);

  /// Test-side services restricted to `ports` (unless `restrict_ports` is
  /// false, in which case every test-side service counts).
  static GroundTruth from_split(const Corpus& corpus, const SeedSplit& split,
                                std::span<const Port> ports, bool restrict_ports = true);

  bool contains(ServiceKey key) const;
  std::size_t size() const { return services_.size(); }
  bool empty() const { return services_.empty(); }
  std::span<const ServiceKey> services() const { return services_; }

  /// Truth ips per port, ascending by port.
  const std::map<Port, std::uint64_t>& per_port() const { return per_port_; }
  std::vector<Port> ports() const;

private:
  std::vector<ServiceKey> services_; // ascending
  std::map<Port, std::uint64_t> per_port_;
};

/// |found ∩ truth| / |truth|. Throws Error(Errc::undefined_metric) on empty
/// truth.
double fraction_services(const std::unordered_set<ServiceKey>& found, const GroundTruth& truth);

/// Mean over `ports` of (found ips on p) / (truth ips on p). Throws
/// Error(Errc::undefined_metric) when `ports` is empty or a port has no
/// truth ip.
double normalized_services(const std::unordered_set<ServiceKey>& found, const GroundTruth& truth,
                           std::span<const Port> ports);

/// Same formula from per-port found counts (aligned with `truth.per_port()`).
double normalized_from_counts(std::span<const std::uint64_t> found_per_port,
                              const GroundTruth& truth);

/// found / probes. Throws Error(Errc::undefined_metric) when probes == 0.
double precision(std::uint64_t found, std::uint64_t probes);

/// Ports by descending truth count, ties by ascending port.
std::vector<Port> optimal_port_order(const GroundTruth& truth);

struct CoveragePoint {
  std::uint64_t probes = 0;
  double full_scan_units = 0;
  double fraction_services = 0;
  double normalized_services = 0;
  double precision = 0;
  std::string phase;

  friend bool operator==(const CoveragePoint&, const CoveragePoint&) = default;
};

using CoverageCurve = std::vector<CoveragePoint>;

/// Incremental Eq.1/Eq.2 bookkeeping fed by scan progress.
class CoverageTracker {
public:
  CoverageTracker(const GroundTruth& truth, std::uint64_t probes_per_full_scan,
                  std::uint64_t probe_offset = 0, std::uint64_t sample_every = 1);

  /// Walks the scan's steps, emitting a point at every `sample_every`
  /// probes boundary and at the end of the phase.
  void observe(const ScanResult& result, std::string_view phase);

  /// Emits a point for the current state at `probes_total` (already
  /// including the offset).
  void mark(std::uint64_t probes_total, std::string_view phase);

  void add_probes(std::uint64_t probes) { probes_ += probes; }

  std::uint64_t probes() const { return probes_; }
  std::uint64_t found() const { return found_total_; }
  double fraction() const;
  double normalized() const;
  const CoverageCurve& curve() const { return curve_; }
  const std::unordered_set<ServiceKey>& found_set() const { return found_; }

private:
  void add(ServiceKey key);
  void emit(std::string_view phase);

  const GroundTruth* truth_;
  std::uint64_t probes_per_full_scan_;
  std::uint64_t probes_;
  std::uint64_t every_;
  std::uint64_t next_sample_;
  std::unordered_set<ServiceKey> found_;
  std::vector<std::uint64_t> found_per_port_;
  std::unordered_map<Port, std::size_t> port_slot_;
  std::uint64_t found_total_ = 0;
  CoverageCurve curve_;
};

struct BaselineCurves {
  CoverageCurve oracle;     // one probe per truth service, rarest ports first
  CoverageCurve port_order; // full sweep per port in optimal order
};

BaselineCurves baseline_curves(const GroundTruth& truth, const Subnet& universe,
                               std::uint64_t sample_every = 1);

/// Best achievable (fraction, normalized) with exactly `probes` probes.
std::pair<double, double> oracle_value_at(const GroundTruth& truth, std::uint64_t probes);

/// Probes at which the curve first reaches `fraction` of services, linearly
/// interpolated between consecutive points; nullopt if never reached.
std::optional<double> probes_to_reach(const CoverageCurve& curve, double fraction,
                                      bool normalized = false);

struct FeatureReportRow {
  ConditionClass cls = ConditionClass::port_only;
  std::string kinds; // "+"-joined kind names, empty for port_only
  double normalized_share = 0;
  double service_share = 0;
  std::uint64_t services = 0;

  friend bool operator==(const FeatureReportRow&, const FeatureReportRow&) = default;
};

/// Attributes every prediction-found truth service to the class and kinds of
/// its winning condition. Shares are relative to all prediction-found truth
/// services (plain count and port-normalized weight). Sorted by descending
/// normalized share, then class and kinds.
std::vector<FeatureReportRow> feature_report(std::span<const Prediction> found_predictions,
                                             const GroundTruth& truth);

/// CSV with header
/// `probes,full_scan_units,fraction_services,normalized_services,precision,phase`.
void write_curve(std::ostream& out, const CoverageCurve& curve);
CoverageCurve read_curve(std::istream& in);

/// CSV `condition_class,kinds,normalized_share,service_share`.
void write_feature_report(std::ostream& out, std::span<const FeatureReportRow> rows);

} // namespace gps
