// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "gps/planner.hpp"

#include "gps/error.hpp"
#include "model_impl.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace gps {

std::vector<PriorsEntry> build_priors_list(const Corpus& seed, const CoOccurrenceModel& model,
                                           int step_prefix) {
  if (step_prefix < 0 || step_prefix > 32)
    throw Error(Errc::invalid_argument, "step_prefix must be in [0, 32]");
  const auto& impl = model.impl();
  std::map<std::pair<Port, std::uint32_t>, std::uint64_t> coverage;
  for (const auto& host : seed.hosts()) {
    auto services = seed.host_services(host);
    auto base = Subnet(host.ip, step_prefix).base().value;
    if (services.size() == 1) {
      ++coverage[{services.front().port, base}];
      continue;
    }
    auto keys = impl.host_keys(services);
    for (const auto& a : services) {
      auto best = impl.best_among(keys, a.port);
      ++coverage[{best ? best->key.port : a.port, base}];
    }
  }
  std::vector<PriorsEntry> out;
  out.reserve(coverage.size());
  for (const auto& [k, n] : coverage)
    out.push_back({k.first, Subnet(IPv4Address{k.second}, step_prefix), n});
  // coverage is keyed by (port, subnet), so a stable sort keeps that order on ties.
  std::stable_sort(out.begin(), out.end(),
                   [](const PriorsEntry& x, const PriorsEntry& y) { return x.coverage > y.coverage; });
  return out;
}

std::vector<PredictiveFeatureEntry> build_predictive_features(const Corpus& seed,
                                                              const CoOccurrenceModel& model,
                                                              double floor) {
  if (!(floor > 0))
    throw Error(Errc::invalid_argument, "probability floor must be > 0");
  const auto& impl = model.impl();
  struct Pick {
    CondKey key;
    Port target;
    CountPair counts;
  };
  std::vector<Pick> picks;
  for (const auto& host : seed.hosts()) {
    auto services = seed.host_services(host);
    if (services.size() < 2)
      continue;
    auto keys = impl.host_keys(services);
    for (const auto& a : services) {
      auto best = impl.best_among(keys, a.port);
      if (best && best->counts.probability() >= floor)
        picks.push_back({best->key, a.port, best->counts});
    }
  }
  std::vector<PredictiveFeatureEntry> out;
  out.reserve(picks.size());
  for (const auto& p : picks)
    out.push_back({impl.materialize(p.key), p.target, p.counts.probability()});
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.condition != y.condition)
      return x.condition < y.condition;
    return x.target_port < y.target_port;
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const auto& x, const auto& y) {
                          return x.condition == y.condition && x.target_port == y.target_port;
                        }),
            out.end());
  return out;
}

std::vector<Prediction> build_prediction_list(std::span<const ServiceRecord> prior_results,
                                              std::span<const PredictiveFeatureEntry> predictive,
                                              const std::unordered_set<ServiceKey>& already_known,
                                              const FeatureConfig& features) {
  std::unordered_map<Condition, std::vector<std::size_t>, ConditionHash> index;
  for (std::size_t i = 0; i < predictive.size(); ++i)
    index[predictive[i].condition].push_back(i);

  struct Best {
    double probability;
    std::size_t entry;
  };
  std::unordered_map<ServiceKey, Best> best;
  for (const auto& r : prior_results) {
    for (const auto& c : features.conditions(r)) {
      auto it = index.find(c);
      if (it == index.end())
        continue;
      for (auto i : it->second) {
        const auto& e = predictive[i];
        if (e.target_port == r.port)
          continue;
        auto key = service_key(r.ip, e.target_port);
        if (already_known.contains(key))
          continue;
        auto [slot, inserted] = best.try_emplace(key, Best{e.probability, i});
        if (!inserted && e.probability > slot->second.probability)
          slot->second = {e.probability, i};
      }
    }
  }
  std::vector<Prediction> out;
  out.reserve(best.size());
  for (const auto& [key, b] : best)
    out.push_back({key_ip(key), key_port(key), b.probability, predictive[b.entry].condition});
  std::sort(out.begin(), out.end(), [](const Prediction& x, const Prediction& y) {
    if (x.probability != y.probability)
      return x.probability > y.probability;
    if (x.ip != y.ip)
      return x.ip < y.ip;
    return x.port < y.port;
  });
  return out;
}

void write_priors_list(std::ostream& out, std::span<const PriorsEntry> entries) {
  out << "port,subnet,coverage\n";
  for (const auto& e : entries)
    out << e.port << ',' << e.subnet.to_string() << ',' << e.coverage << '\n';
}

std::vector<PriorsEntry> read_priors_list(std::istream& in) {
  std::vector<PriorsEntry> out;
  CsvReader reader(in, "priors list", "port,subnet,coverage");
  while (auto fields = reader.next(3)) {
    PriorsEntry e;
    e.port = reader.integer<Port>((*fields)[0]);
    auto subnet = Subnet::try_parse((*fields)[1]);
    if (!subnet)
      reader.fail("bad subnet '" + std::string((*fields)[1]) + "'");
    e.subnet = *subnet;
    e.coverage = reader.integer<std::uint64_t>((*fields)[2]);
    out.push_back(e);
  }
  return out;
}

void write_prediction_list(std::ostream& out, std::span<const Prediction> predictions) {
  out << "ip,port,probability\n";
  for (const auto& p : predictions)
    out << p.ip.to_string() << ',' << p.port << ',' << format_real(p.probability) << '\n';
}

std::vector<Prediction> read_prediction_list(std::istream& in) {
  std::vector<Prediction> out;
  CsvReader reader(in, "prediction list", "ip,port,probability");
  while (auto fields = reader.next(3)) {
    Prediction p;
    auto ip = IPv4Address::try_parse((*fields)[0]);
    if (!ip)
      reader.fail("bad address '" + std::string((*fields)[0]) + "'");
    p.ip = *ip;
    p.port = reader.integer<Port>((*fields)[1]);
    p.probability = reader.real((*fields)[2]);
    out.push_back(p);
  }
  return out;
}

} // namespace gps
