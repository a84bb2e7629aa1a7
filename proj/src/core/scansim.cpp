// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "gps/scansim.hpp"

#include "gps/error.hpp"

namespace gps {

std::vector<ServiceRecord> ScanBackend::probe_host(IPv4Address ip, std::span<const Port> ports) const {
  std::vector<ServiceRecord> out;
  auto try_port = [&](Port p) {
    if (auto r = probe(ip, p))
      out.push_back(std::move(*r));
  };
  if (ports.empty()) {
    for (std::uint32_t p = 0; p <= 0xffff; ++p)
      try_port(static_cast<Port>(p));
  } else {
    for (auto p : ports)
      try_port(p);
  }
  return out;
}

std::optional<ServiceRecord> SimulatedBackend::probe(IPv4Address ip, Port port) const {
  if (const auto* r = corpus_->find(ip, port))
    return *r;
  return std::nullopt;
}

std::vector<ServiceRecord> SimulatedBackend::sweep(const Subnet& subnet, Port port) const {
  std::vector<ServiceRecord> out;
  for (const auto* r : corpus_->lookup(port, subnet))
    out.push_back(*r);
  return out;
}

std::vector<ServiceRecord> SimulatedBackend::probe_host(IPv4Address ip, std::span<const Port> ports) const {
  auto services = corpus_->host(ip);
  if (ports.empty())
    return {services.begin(), services.end()};
  std::vector<ServiceRecord> out;
  for (auto p : ports)
    if (const auto* r = corpus_->find(ip, p))
      out.push_back(*r);
  return out;
}

std::string_view name(Phase phase) {
  switch (phase) {
    case Phase::seed:
      return "seed";
    case Phase::priors:
      return "priors";
    case Phase::predictions:
      return "predictions";
  }
  return "unknown";
}

void BandwidthLedger::record(Phase phase, std::uint64_t probes, std::uint64_t responses) {
  if (responses > probes)
    throw Error(Errc::internal, "more responses than probes");
  auto& c = counts_[static_cast<int>(phase)];
  c.probes += probes;
  c.responses += responses;
}

std::uint64_t BandwidthLedger::total_probes() const {
  std::uint64_t n = 0;
  for (const auto& c : counts_)
    n += c.probes;
  return n;
}

std::uint64_t BandwidthLedger::total_responses() const {
  std::uint64_t n = 0;
  for (const auto& c : counts_)
    n += c.responses;
  return n;
}

namespace {

std::uint64_t sweep_cost(const Subnet& universe, const Subnet& subnet) {
  if (universe.contains(subnet))
    return subnet.size();
  if (subnet.contains(universe))
    return universe.size();
  return 0;
}

void close(ScanResult& result, BandwidthLedger& ledger) {
  result.delta.responses = result.found.size();
  ledger.record(result.phase, result.delta.probes, result.delta.responses);
}

} // namespace

ScanResult run_seed_scan(const ScanBackend& backend, const Subnet& universe, double sample_fraction,
                         std::span<const Port> ports, std::uint64_t rng_seed, BandwidthLedger& ledger) {
  if (!(sample_fraction > 0 && sample_fraction <= 1))
    throw Error(Errc::invalid_argument, "sample fraction must be in (0, 1]");
  ScanResult result;
  result.phase = Phase::seed;
  const std::uint64_t per_host = ports.empty() ? 65536 : ports.size();
  const std::uint64_t first = universe.base().value;
  const std::uint64_t last = universe.last().value;
  for (auto a = first; a <= last; ++a) {
    IPv4Address ip{static_cast<std::uint32_t>(a)};
    if (!seed_sampled(ip, sample_fraction, rng_seed))
      continue;
    ++result.items_scanned;
    result.delta.probes += per_host;
    auto found = backend.probe_host(ip, ports);
    if (found.empty())
      continue;
    for (auto& r : found)
      result.found.push_back(std::move(r));
    result.steps.push_back({result.delta.probes, static_cast<std::uint32_t>(result.found.size())});
  }
  if (result.steps.empty() || result.steps.back().probes != result.delta.probes)
    result.steps.push_back({result.delta.probes, static_cast<std::uint32_t>(result.found.size())});
  close(result, ledger);
  return result;
}

ScanResult run_priors_scan(const ScanBackend& backend, std::span<const PriorsEntry> priors,
                           ProbeBudget budget, BandwidthLedger& ledger) {
  ScanResult result;
  result.phase = Phase::priors;
  const auto universe = backend.universe();
  for (const auto& e : priors) {
    auto cost = sweep_cost(universe, e.subnet);
    if (budget && result.delta.probes + cost > *budget)
      break;
    result.delta.probes += cost;
    ++result.items_scanned;
    for (auto& r : backend.sweep(e.subnet, e.port))
      result.found.push_back(std::move(r));
    result.steps.push_back({result.delta.probes, static_cast<std::uint32_t>(result.found.size())});
  }
  close(result, ledger);
  return result;
}

ScanResult run_prediction_scan(const ScanBackend& backend, std::span<const Prediction> predictions,
                               ProbeBudget budget, BandwidthLedger& ledger) {
  ScanResult result;
  result.phase = Phase::predictions;
  for (const auto& p : predictions) {
    if (budget && result.delta.probes + 1 > *budget)
      break;
    ++result.delta.probes;
    ++result.items_scanned;
    if (auto r = backend.probe(p.ip, p.port))
      result.found.push_back(std::move(*r));
    result.steps.push_back({result.delta.probes, static_cast<std::uint32_t>(result.found.size())});
  }
  close(result, ledger);
  return result;
}

} // namespace gps
