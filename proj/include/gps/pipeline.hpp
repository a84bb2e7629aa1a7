// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gps/corpus.hpp"
#include "gps/eval.hpp"
#include "gps/model.hpp"
#include "gps/planner.hpp"
#include "gps/scansim.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gps {

/// Resolved run parameters. Paths are absolute or relative to the process
/// working directory once resolved from a config file.
struct PipelineConfig {
  std::string corpus_path;         // newline-delimited JSON records
  std::string synthetic_spec_path; // alternative: generate the corpus
  std::optional<Subnet> universe;  // required with corpus_path
  std::string asn_table_path;

  double seed_fraction = 0.05;
  int step_prefix = 16;
  double probability_floor = default_probability_floor;
  std::uint32_t min_support = 2;
  std::size_t min_ips = 2;
  FeatureKindSet app_kinds = FeatureKindSet::all_app();
  FeatureKindSet net_kinds = default_net_kinds;
  std::vector<Port> seed_ports; // empty: all 65536 ports
  ProbeBudget priors_budget;
  ProbeBudget prediction_budget;
  std::uint64_t rng_seed = 1;
  unsigned partitions = 1;

  bool filter_enabled = true;
  PseudoFilterOptions filter;

  bool restrict_truth = true;
  std::uint64_t curve_every = 1;
  std::string output_dir = "gps-out";

  std::vector<double> sweep_seed_fractions;
  std::vector<int> sweep_step_prefixes;

  /// Throws Error(Errc::invalid_argument) naming the offending key.
  void validate() const;
};

/// A config file plus flag overrides. Keys are dotted paths into the JSON
/// document ("seed_fraction", "budgets.predictions", "filter.enabled").
class ConfigDocument {
public:
  ConfigDocument();
  ConfigDocument(const ConfigDocument&);
  ConfigDocument& operator=(const ConfigDocument&);
  ~ConfigDocument();

  static ConfigDocument load(const std::string& path);
  static ConfigDocument parse(const std::string& text, const std::string& base_dir = ".");

  /// Sets a key from its textual value; JSON literals (numbers, booleans,
  /// null, arrays) are parsed, anything else is stored as a string.
  void set(const std::string& key, const std::string& value);

  PipelineConfig resolve() const;
  std::string dump() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// The simulated Internet a run scans: the (optionally pseudo-filtered)
/// corpus and its ASN table.
struct PipelineInputs {
  Corpus raw;
  Corpus truth;
  std::shared_ptr<const AsnTable> asn;
  std::size_t pseudo_removed = 0;
};

PipelineInputs load_inputs(const PipelineConfig& config);
PipelineInputs make_inputs(Corpus raw, std::shared_ptr<const AsnTable> asn,
                           const PipelineConfig& config);

struct RunResult {
  SeedSplit split;
  std::vector<Port> eligible;
  ScanResult seed_scan;
  Corpus seed; // seed scan restricted to eligible ports
  CoOccurrenceModel model;
  std::vector<PriorsEntry> priors;
  ScanResult priors_scan;
  std::vector<PredictiveFeatureEntry> predictive;
  std::vector<Prediction> predictions;
  ScanResult prediction_scan;
  BandwidthLedger ledger;
  GroundTruth truth;
  CoverageCurve curve;           // priors + predictions
  CoverageCurve curve_with_seed; // same, offset by the seed scan
  BaselineCurves baselines;
  std::vector<FeatureReportRow> feature_report;
};

/// Seed scan -> model -> priors plan and scan -> prediction plan and scan ->
/// evaluation. Errors are rethrown with the failing phase in the message.
RunResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config);

/// Writes every artifact into `dir` (created if needed).
void write_artifacts(const RunResult& result, const PipelineInputs& inputs,
                     const PipelineConfig& config, const std::string& dir);

/// Loads inputs, runs, and writes artifacts. On failure a FAILED marker
/// naming the phase is left in the directory and the error is rethrown.
RunResult run_to_directory(const PipelineConfig& config, const std::string& dir);

/// Re-executes the scans of a finished run from its plan files against the
/// simulated Internet and recomputes the GPS curve.
CoverageCurve replay_curve(const PipelineInputs& inputs, const PipelineConfig& config,
                           const std::string& run_dir);

struct SweepCell {
  double seed_fraction = 0;
  int step_prefix = 0;
  std::string label;
  std::optional<std::string> error;
  CoverageCurve curve;
  BandwidthLedger ledger;
};

/// Runs the pipeline for every (seed_fraction, step_prefix) cell. A failing
/// cell records its error; the others proceed.
std::vector<SweepCell> run_sweep(const PipelineInputs& inputs, const PipelineConfig& config);
void write_sweep(const std::vector<SweepCell>& cells, const std::string& dir);

/// Plain-text summary of a run directory.
std::string render_report(const std::string& run_dir);

/// Plain-text network-feature ranking for the configured corpus, built with
/// the full /16../23 + ASN candidate set.
std::string render_net_feature_ranking(const PipelineConfig& config);

} // namespace gps
