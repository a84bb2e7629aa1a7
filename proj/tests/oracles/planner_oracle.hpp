// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force priors and prediction lists over an oracle model.

#pragma once

#include "model_oracle.hpp"

#include "gps/planner.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <unordered_set>
#include <vector>

namespace gps::testing {

inline int class_rank(ConditionClass c) {
  switch (c) {
    case ConditionClass::port_app_net:
      return 0;
    case ConditionClass::port_app:
      return 1;
    case ConditionClass::port_net:
      return 2;
    case ConditionClass::port_only:
      return 3;
  }
  return 4;
}

/// Ordering key for a network feature value: kind, then numeric value.
inline std::tuple<int, std::uint32_t> net_order(const FeatureValue& v) {
  if (v.kind == FeatureKind::asn)
    return {static_cast<int>(v.kind), static_cast<std::uint32_t>(std::stoul(v.value))};
  return {static_cast<int>(v.kind), Subnet::parse(v.value).base().value};
}

struct Candidate {
  Condition condition;
  CountPair counts;
};

/// True when x ranks strictly before y.
inline bool oracle_better(const Candidate& x, const Candidate& y) {
  // Compare joint/cond as exact fractions.
  long double px = static_cast<long double>(x.counts.joint_hosts) * y.counts.cond_hosts;
  long double py = static_cast<long double>(y.counts.joint_hosts) * x.counts.cond_hosts;
  if (px != py)
    return px > py;
  if (x.counts.cond_hosts != y.counts.cond_hosts)
    return x.counts.cond_hosts > y.counts.cond_hosts;
  if (x.condition.port_b != y.condition.port_b)
    return x.condition.port_b < y.condition.port_b;
  if (x.condition.cls != y.condition.cls)
    return class_rank(x.condition.cls) < class_rank(y.condition.cls);
  if (x.condition.app != y.condition.app) {
    if (!x.condition.app || !y.condition.app)
      return !x.condition.app;
    return std::tie(x.condition.app->kind, x.condition.app->value) <
           std::tie(y.condition.app->kind, y.condition.app->value);
  }
  if (x.condition.net && y.condition.net)
    return net_order(*x.condition.net) < net_order(*y.condition.net);
  return false;
}

struct OracleContext {
  FeatureKindSet app;
  FeatureKindSet net;
  const AsnTable* asn;
  const OracleModel* model;
};

/// Best condition on the host (from services other than `target`) for
/// predicting `target`.
inline std::optional<Candidate> oracle_argmax(const OracleContext& ctx, std::span<const ServiceRecord> host,
                                              Port target) {
  std::optional<Candidate> best;
  for (const auto& s : host) {
    if (s.port == target)
      continue;
    for (auto& c : oracle_conditions(s, ctx.app, ctx.net, *ctx.asn)) {
      auto it = ctx.model->find({c, target});
      if (it == ctx.model->end())
        continue;
      Candidate cand{c, it->second};
      if (!best || oracle_better(cand, *best))
        best = cand;
    }
  }
  return best;
}

inline std::vector<PriorsEntry> oracle_priors(const OracleContext& ctx, const Corpus& seed, int step) {
  std::map<std::pair<Port, Subnet>, std::uint64_t> groups;
  for (const auto& h : seed.hosts()) {
    auto services = seed.host_services(h);
    Subnet where(h.ip, step);
    for (const auto& a : services) {
      Port b = a.port;
      if (services.size() > 1)
        if (auto best = oracle_argmax(ctx, services, a.port))
          b = best->condition.port_b;
      ++groups[{b, where}];
    }
  }
  std::vector<PriorsEntry> out;
  for (const auto& [k, n] : groups)
    out.push_back({k.first, k.second, n});
  std::sort(out.begin(), out.end(), [](const PriorsEntry& x, const PriorsEntry& y) {
    if (x.coverage != y.coverage)
      return x.coverage > y.coverage;
    return std::tie(x.port, x.subnet) < std::tie(y.port, y.subnet);
  });
  return out;
}

inline std::vector<PredictiveFeatureEntry> oracle_predictive(const OracleContext& ctx, const Corpus& seed,
                                                             double floor) {
  std::map<std::pair<Condition, Port>, double> entries;
  for (const auto& h : seed.hosts()) {
    auto services = seed.host_services(h);
    for (const auto& a : services) {
      auto best = oracle_argmax(ctx, services, a.port);
      if (!best)
        continue;
      double p = static_cast<double>(best->counts.joint_hosts) / best->counts.cond_hosts;
      if (p < floor)
        continue;
      entries[{best->condition, a.port}] = p;
    }
  }
  std::vector<PredictiveFeatureEntry> out;
  for (const auto& [k, p] : entries)
    out.push_back({k.first, k.second, p});
  return out;
}

struct PlainPrediction {
  IPv4Address ip;
  Port port;
  double probability;
  friend bool operator==(const PlainPrediction&, const PlainPrediction&) = default;
};

inline std::vector<PlainPrediction> oracle_predictions(const OracleContext& ctx,
                                                       std::span<const ServiceRecord> prior_results,
                                                       std::span<const PredictiveFeatureEntry> predictive,
                                                       const std::unordered_set<ServiceKey>& known) {
  std::map<std::pair<IPv4Address, Port>, double> best;
  for (const auto& r : prior_results)
    for (const auto& e : predictive) {
      if (e.target_port == r.port || known.contains(service_key(r.ip, e.target_port)))
        continue;
      if (!exhibits(r, e.condition, ctx.app, ctx.net, *ctx.asn))
        continue;
      auto [it, fresh] = best.try_emplace({r.ip, e.target_port}, e.probability);
      if (!fresh)
        it->second = std::max(it->second, e.probability);
    }
  std::vector<PlainPrediction> out;
  for (const auto& [k, p] : best)
    out.push_back({k.first, k.second, p});
  std::stable_sort(out.begin(), out.end(),
                   [](const PlainPrediction& x, const PlainPrediction& y) { return x.probability > y.probability; });
  return out;
}

inline std::vector<PlainPrediction> plain(std::span<const Prediction> predictions) {
  std::vector<PlainPrediction> out;
  for (const auto& p : predictions)
    out.push_back({p.ip, p.port, p.probability});
  return out;
}

} // namespace gps::testing
