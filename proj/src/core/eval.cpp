// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "gps/eval.hpp"

#include "gps/error.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace gps {

GroundTruth::GroundTruth(std::vector<ServiceKey> services) : services_(std::move(services)) {
  std::sort(services_.begin(), services_.end());
  services_.erase(std::unique(services_.begin(), services_.end()), services_.end());
  for (auto k : services_)
    ++per_port_[key_port(k)];
}

GroundTruth GroundTruth::from_split(const Corpus& corpus, const SeedSplit& split,
                                    std::span<const Port> ports, bool restrict_ports) {
  std::vector<bool> allowed(65536, !restrict_ports);
  for (auto p : ports)
    allowed[p] = true;
  std::vector<ServiceKey> keys;
  for (const auto& host : corpus.hosts()) {
    if (!split.is_test(host.ip))
      continue;
    for (const auto& r : corpus.host_services(host))
      if (allowed[r.port])
        keys.push_back(service_key(r));
  }
  return GroundTruth(std::move(keys));
}

bool GroundTruth::contains(ServiceKey key) const {
  return std::binary_search(services_.begin(), services_.end(), key);
}

std::vector<Port> GroundTruth::ports() const {
  std::vector<Port> out;
  out.reserve(per_port_.size());
  for (const auto& [p, n] : per_port_)
    out.push_back(p);
  return out;
}

double fraction_services(const std::unordered_set<ServiceKey>& found, const GroundTruth& truth) {
  if (truth.empty())
    throw Error(Errc::undefined_metric, "fraction of services over an empty ground truth");
  std::uint64_t hits = 0;
  for (auto k : found)
    hits += truth.contains(k);
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double normalized_services(const std::unordered_set<ServiceKey>& found, const GroundTruth& truth,
                           std::span<const Port> ports) {
  if (ports.empty())
    throw Error(Errc::undefined_metric, "normalized services over an empty port set");
  std::vector<Port> sorted(ports.begin(), ports.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::map<Port, std::uint64_t> hits;
  for (auto k : found)
    if (truth.contains(k))
      ++hits[key_port(k)];
  double sum = 0;
  for (auto p : sorted) {
    auto it = truth.per_port().find(p);
    if (it == truth.per_port().end())
      throw Error(Errc::undefined_metric, "port " + std::to_string(p) + " has no ground-truth service");
    auto h = hits.find(p);
    sum += static_cast<double>(h == hits.end() ? 0 : h->second) / static_cast<double>(it->second);
  }
  return sum / static_cast<double>(sorted.size());
}

double normalized_from_counts(std::span<const std::uint64_t> found_per_port, const GroundTruth& truth) {
  const auto& per_port = truth.per_port();
  if (per_port.empty())
    throw Error(Errc::undefined_metric, "normalized services over an empty port set");
  if (found_per_port.size() != per_port.size())
    throw Error(Errc::invalid_argument, "per-port counts do not match the ground truth ports");
  double sum = 0;
  std::size_t i = 0;
  for (const auto& [p, n] : per_port)
    sum += static_cast<double>(found_per_port[i++]) / static_cast<double>(n);
  return sum / static_cast<double>(per_port.size());
}

double precision(std::uint64_t found, std::uint64_t probes) {
  if (probes == 0)
    throw Error(Errc::undefined_metric, "precision with zero probes");
  return static_cast<double>(found) / static_cast<double>(probes);
}

std::vector<Port> optimal_port_order(const GroundTruth& truth) {
  std::vector<std::pair<Port, std::uint64_t>> counts(truth.per_port().begin(), truth.per_port().end());
  std::stable_sort(counts.begin(), counts.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  std::vector<Port> out;
  out.reserve(counts.size());
  for (const auto& [p, n] : counts)
    out.push_back(p);
  return out;
}

// -- CoverageTracker ----------------------------------------------------------

CoverageTracker::CoverageTracker(const GroundTruth& truth, std::uint64_t probes_per_full_scan,
                                 std::uint64_t probe_offset, std::uint64_t sample_every)
    : truth_(&truth),
      probes_per_full_scan_(probes_per_full_scan),
      probes_(probe_offset),
      every_(std::max<std::uint64_t>(sample_every, 1)) {
  if (truth.empty())
    throw Error(Errc::undefined_metric, "coverage over an empty ground truth");
  if (probes_per_full_scan == 0)
    throw Error(Errc::invalid_argument, "probes_per_full_scan must be positive");
  next_sample_ = (probes_ / every_ + 1) * every_;
  std::size_t slot = 0;
  for (const auto& [p, n] : truth.per_port())
    port_slot_[p] = slot++;
  found_per_port_.assign(slot, 0);
}

void CoverageTracker::add(ServiceKey key) {
  if (!truth_->contains(key) || !found_.insert(key).second)
    return;
  ++found_total_;
  ++found_per_port_[port_slot_.at(key_port(key))];
}

double CoverageTracker::fraction() const {
  return static_cast<double>(found_total_) / static_cast<double>(truth_->size());
}

double CoverageTracker::normalized() const {
  return normalized_from_counts(found_per_port_, *truth_);
}

void CoverageTracker::emit(std::string_view phase) {
  if (!curve_.empty() && curve_.back().probes == probes_) {
    curve_.pop_back();
  }
  CoveragePoint pt;
  pt.probes = probes_;
  pt.full_scan_units = static_cast<double>(probes_) / static_cast<double>(probes_per_full_scan_);
  pt.fraction_services = fraction();
  pt.normalized_services = normalized();
  pt.precision = probes_ == 0 ? 0.0 : static_cast<double>(found_total_) / static_cast<double>(probes_);
  pt.phase = std::string(phase);
  curve_.push_back(std::move(pt));
  next_sample_ = (probes_ / every_ + 1) * every_;
}

void CoverageTracker::observe(const ScanResult& result, std::string_view phase) {
  const auto base = probes_;
  std::size_t next = 0;
  for (const auto& step : result.steps) {
    for (; next < step.found_end; ++next)
      add(service_key(result.found[next]));
    probes_ = base + step.probes;
    if (probes_ >= next_sample_)
      emit(phase);
  }
  for (; next < result.found.size(); ++next)
    add(service_key(result.found[next]));
  probes_ = base + result.delta.probes;
  if (curve_.empty() || curve_.back().probes != probes_ || curve_.back().phase != phase)
    emit(phase);
}

void CoverageTracker::mark(std::uint64_t probes_total, std::string_view phase) {
  probes_ = probes_total;
  emit(phase);
}

// -- baselines -----------------------------------------------------------------

namespace {

std::vector<std::pair<Port, std::uint64_t>> rarest_first(const GroundTruth& truth) {
  std::vector<std::pair<Port, std::uint64_t>> counts(truth.per_port().begin(), truth.per_port().end());
  std::stable_sort(counts.begin(), counts.end(),
                   [](const auto& x, const auto& y) { return x.second < y.second; });
  return counts;
}

CoveragePoint make_point(std::uint64_t probes, std::uint64_t found, double normalized,
                         std::uint64_t total, double full_scan, std::string_view phase) {
  CoveragePoint pt;
  pt.probes = probes;
  pt.full_scan_units = static_cast<double>(probes) / full_scan;
  pt.fraction_services = static_cast<double>(found) / static_cast<double>(total);
  pt.normalized_services = normalized;
  pt.precision = probes == 0 ? 0.0 : static_cast<double>(found) / static_cast<double>(probes);
  pt.phase = std::string(phase);
  return pt;
}

} // namespace

BaselineCurves baseline_curves(const GroundTruth& truth, const Subnet& universe,
                               std::uint64_t sample_every) {
  if (truth.empty())
    throw Error(Errc::undefined_metric, "baselines over an empty ground truth");
  const auto every = std::max<std::uint64_t>(sample_every, 1);
  const auto ports = static_cast<double>(truth.per_port().size());
  const auto total = truth.size();
  const auto full = static_cast<double>(universe.size());
  BaselineCurves out;

  std::uint64_t found = 0;
  double norm = 0;
  for (const auto& [p, n] : rarest_first(truth)) {
    for (std::uint64_t i = 1; i <= n; ++i) {
      ++found;
      double v = norm + static_cast<double>(i) / static_cast<double>(n) / ports;
      if (found % every == 0 || i == n)
        out.oracle.push_back(make_point(found, found, i == n ? norm + 1.0 / ports : v, total, full, "oracle"));
    }
    norm += 1.0 / ports;
  }

  std::uint64_t probes = 0;
  found = 0;
  norm = 0;
  for (auto p : optimal_port_order(truth)) {
    probes += universe.size();
    found += truth.per_port().at(p);
    norm += 1.0 / ports;
    out.port_order.push_back(make_point(probes, found, norm, total, full, "port_order"));
  }
  return out;
}

std::pair<double, double> oracle_value_at(const GroundTruth& truth, std::uint64_t probes) {
  if (truth.empty())
    throw Error(Errc::undefined_metric, "oracle over an empty ground truth");
  const auto ports = static_cast<double>(truth.per_port().size());
  const auto found = std::min<std::uint64_t>(probes, truth.size());
  double norm = 0;
  std::uint64_t left = found;
  for (const auto& [p, n] : rarest_first(truth)) {
    if (left == 0)
      break;
    auto take = std::min(left, n);
    norm += take == n ? 1.0 / ports : static_cast<double>(take) / static_cast<double>(n) / ports;
    left -= take;
  }
  return {static_cast<double>(found) / static_cast<double>(truth.size()), norm};
}

std::optional<double> probes_to_reach(const CoverageCurve& curve, double fraction, bool normalized) {
  double prev_probes = 0;
  double prev_value = 0;
  for (const auto& pt : curve) {
    double v = normalized ? pt.normalized_services : pt.fraction_services;
    auto p = static_cast<double>(pt.probes);
    if (v >= fraction) {
      if (v == prev_value || fraction <= prev_value)
        return fraction <= prev_value ? prev_probes : p;
      return prev_probes + (fraction - prev_value) / (v - prev_value) * (p - prev_probes);
    }
    prev_probes = p;
    prev_value = v;
  }
  return std::nullopt;
}

// -- feature report --------------------------------------------------------------

std::vector<FeatureReportRow> feature_report(std::span<const Prediction> found_predictions,
                                             const GroundTruth& truth) {
  std::map<std::pair<ConditionClass, std::string>, std::pair<std::uint64_t, double>> groups;
  std::unordered_set<ServiceKey> seen;
  std::uint64_t total = 0;
  double total_norm = 0;
  for (const auto& p : found_predictions) {
    auto key = service_key(p.ip, p.port);
    if (!truth.contains(key) || !seen.insert(key).second)
      continue;
    std::string kinds;
    if (p.via.app)
      kinds = std::string(name(p.via.app->kind));
    if (p.via.net)
      kinds += (kinds.empty() ? "" : "+") + std::string(name(p.via.net->kind));
    double w = 1.0 / static_cast<double>(truth.per_port().at(p.port));
    auto& g = groups[{p.via.cls, kinds}];
    ++g.first;
    g.second += w;
    ++total;
    total_norm += w;
  }
  std::vector<FeatureReportRow> out;
  for (const auto& [k, v] : groups) {
    FeatureReportRow row;
    row.cls = k.first;
    row.kinds = k.second;
    row.services = v.first;
    row.service_share = static_cast<double>(v.first) / static_cast<double>(total);
    row.normalized_share = v.second / total_norm;
    out.push_back(std::move(row));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.normalized_share > y.normalized_share;
  });
  return out;
}

// -- CSV ---------------------------------------------------------------------------

void write_curve(std::ostream& out, const CoverageCurve& curve) {
  out << "probes,full_scan_units,fraction_services,normalized_services,precision,phase\n";
  for (const auto& pt : curve)
    out << pt.probes << ',' << format_real(pt.full_scan_units) << ',' << format_real(pt.fraction_services)
        << ',' << format_real(pt.normalized_services) << ',' << format_real(pt.precision) << ','
        << pt.phase << '\n';
}

CoverageCurve read_curve(std::istream& in) {
  CoverageCurve out;
  CsvReader reader(in, "curve",
                   "probes,full_scan_units,fraction_services,normalized_services,precision,phase");
  while (auto f = reader.next(6)) {
    CoveragePoint pt;
    pt.probes = reader.integer<std::uint64_t>((*f)[0]);
    pt.full_scan_units = reader.real((*f)[1]);
    pt.fraction_services = reader.real((*f)[2]);
    pt.normalized_services = reader.real((*f)[3]);
    pt.precision = reader.real((*f)[4]);
    pt.phase = std::string((*f)[5]);
    out.push_back(std::move(pt));
  }
  return out;
}

void write_feature_report(std::ostream& out, std::span<const FeatureReportRow> rows) {
  out << "condition_class,kinds,normalized_share,service_share\n";
  for (const auto& r : rows)
    out << name(r.cls) << ',' << r.kinds << ',' << format_real(r.normalized_share) << ','
        << format_real(r.service_share) << '\n';
}

} // namespace gps
