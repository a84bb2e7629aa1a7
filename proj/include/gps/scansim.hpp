// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gps/corpus.hpp"
#include "gps/planner.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace gps {

/// The seam between plans and packets. The simulator is the only shipped
/// implementation.
class ScanBackend {
public:
  virtual ~ScanBackend() = default;

  virtual Subnet universe() const = 0;

  /// One SYN-equivalent probe.
  virtual std::optional<ServiceRecord> probe(IPv4Address ip, Port port) const = 0;

  /// Every responsive service on `port` inside subnet ∩ universe.
  virtual std::vector<ServiceRecord> sweep(const Subnet& subnet, Port port) const = 0;

  /// Probes `ip` on every port in `ports` (empty span: all 65536 ports).
  /// Default loops over probe().
  virtual std::vector<ServiceRecord> probe_host(IPv4Address ip, std::span<const Port> ports) const;
};

/// Answers probes from a ground-truth corpus. Holds a reference; the corpus
/// must outlive the backend.
class SimulatedBackend final : public ScanBackend {
public:
  explicit SimulatedBackend(const Corpus& corpus) : corpus_(&corpus) {}

  Subnet universe() const override { return corpus_->universe(); }
  std::optional<ServiceRecord> probe(IPv4Address ip, Port port) const override;
  std::vector<ServiceRecord> sweep(const Subnet& subnet, Port port) const override;
  std::vector<ServiceRecord> probe_host(IPv4Address ip, std::span<const Port> ports) const override;

private:
  const Corpus* corpus_;
};

enum class Phase : std::uint8_t { seed, priors, predictions };

std::string_view name(Phase phase);

struct PhaseCounts {
  std::uint64_t probes = 0;
  std::uint64_t responses = 0;

  friend bool operator==(PhaseCounts, PhaseCounts) = default;
};

/// Probe accounting per phase. Counts only increase.
class BandwidthLedger {
public:
  explicit BandwidthLedger(std::uint64_t probes_per_full_scan = std::uint64_t{1} << 32)
      : probes_per_full_scan_(probes_per_full_scan) {}

  void record(Phase phase, std::uint64_t probes, std::uint64_t responses);

  const PhaseCounts& counts(Phase phase) const { return counts_[static_cast<int>(phase)]; }
  std::uint64_t total_probes() const;
  std::uint64_t total_responses() const;
  std::uint64_t probes_per_full_scan() const { return probes_per_full_scan_; }

  /// Probes expressed in 100%-scan units of the universe.
  double full_scan_units(std::uint64_t probes) const {
    return static_cast<double>(probes) / static_cast<double>(probes_per_full_scan_);
  }

  friend bool operator==(const BandwidthLedger&, const BandwidthLedger&) = default;

private:
  std::uint64_t probes_per_full_scan_;
  std::array<PhaseCounts, 3> counts_{};
};

/// Unlimited when empty.
using ProbeBudget = std::optional<std::uint64_t>;

struct ScanResult {
  /// Progress after each plan step (priors entry or single probe): the
  /// cumulative probe count and the end index into `found`.
  struct Step {
    std::uint64_t probes = 0;
    std::uint32_t found_end = 0;
  };

  Phase phase = Phase::seed;
  std::vector<ServiceRecord> found;
  PhaseCounts delta;
  std::vector<Step> steps;
  /// Plan items executed (priors entries, predictions, sampled addresses).
  std::size_t items_scanned = 0;
};

/// Samples universe addresses with seed_sampled() and probes each on every
/// port in `ports` (empty: all 65536). Probes = |sample| x |ports|.
ScanResult run_seed_scan(const ScanBackend& backend, const Subnet& universe,
                         double sample_fraction, std::span<const Port> ports,
                         std::uint64_t rng_seed, BandwidthLedger& ledger);

/// Sweeps entries in list order; an entry costs |subnet ∩ universe| probes
/// and is skipped, ending the scan, once it would exceed the budget.
ScanResult run_priors_scan(const ScanBackend& backend, std::span<const PriorsEntry> priors,
                           ProbeBudget budget, BandwidthLedger& ledger);

/// One probe per prediction in order until the budget is spent.
ScanResult run_prediction_scan(const ScanBackend& backend, std::span<const Prediction> predictions,
                               ProbeBudget budget, BandwidthLedger& ledger);

} // namespace gps
