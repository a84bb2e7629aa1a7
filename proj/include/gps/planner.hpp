// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gps/corpus.hpp"
#include "gps/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gps {

inline constexpr double default_probability_floor = 1e-5;

/// One (port, subnet) sweep of the priors scan.
struct PriorsEntry {
  Port port = 0;
  Subnet subnet;
  std::uint64_t coverage = 0; // seed services this sweep helps predict

  friend bool operator==(const PriorsEntry&, const PriorsEntry&) = default;
};

/// Plans the sweeps that find each host's first, most predictive service.
///
/// A single-service seed host contributes its own (port, subnet). On a
/// multi-service host each service a contributes (b, subnet) for the host
/// port b whose best condition maximizes P(a); a service no other host port
/// predicts contributes itself. Tuples are grouped, coverage is the number of
/// seed services mapped to the tuple, and the list is sorted by descending
/// coverage then ascending (port, subnet).
std::vector<PriorsEntry> build_priors_list(const Corpus& seed, const CoOccurrenceModel& model,
                                           int step_prefix);

struct PredictiveFeatureEntry {
  Condition condition;
  Port target_port = 0;
  double probability = 0;

  friend bool operator==(const PredictiveFeatureEntry&, const PredictiveFeatureEntry&) = default;
};

/// The "most predictive feature values": for every seed service, the argmax
/// condition from the rest of its host, kept when probability >= floor.
/// Unique by (condition, target), ordered by (condition, target).
std::vector<PredictiveFeatureEntry> build_predictive_features(const Corpus& seed,
                                                              const CoOccurrenceModel& model,
                                                              double floor = default_probability_floor);

struct Prediction {
  IPv4Address ip;
  Port port = 0;
  double probability = 0;
  Condition via;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// For each prior service, every derivable condition found in `predictive`
/// emits (ip, target). Known services are skipped; duplicates keep the
/// highest probability (first-seen condition on ties). Sorted by descending
/// probability, then (ip, port).
std::vector<Prediction> build_prediction_list(std::span<const ServiceRecord> prior_results,
                                              std::span<const PredictiveFeatureEntry> predictive,
                                              const std::unordered_set<ServiceKey>& already_known,
                                              const FeatureConfig& features);

/// `port,subnet,coverage` lines.
void write_priors_list(std::ostream& out, std::span<const PriorsEntry> entries);
std::vector<PriorsEntry> read_priors_list(std::istream& in);

/// `ip,port,probability` lines. Probabilities are printed with up to 17
/// significant digits so the round trip is exact.
void write_prediction_list(std::ostream& out, std::span<const Prediction> predictions);
std::vector<Prediction> read_prediction_list(std::istream& in);

} // namespace gps
