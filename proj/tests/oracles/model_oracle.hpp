// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

// Direct counting of conditional probabilities, one condition at a time.

#pragma once

#include "gps/corpus.hpp"
#include "gps/features.hpp"
#include "gps/model.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gps::testing {

/// Longest matching prefix by scanning every entry.
inline std::optional<std::uint32_t> linear_asn(const AsnTable& table, IPv4Address ip) {
  std::optional<std::uint32_t> best;
  int best_len = -1;
  for (const auto& e : table.entries())
    if (e.prefix.contains(ip) && e.prefix.prefix_len() > best_len) {
      best = e.asn;
      best_len = e.prefix.prefix_len();
    }
  return best;
}

inline std::vector<FeatureValue> oracle_app_values(const ServiceRecord& r, FeatureKindSet kinds) {
  std::vector<FeatureValue> out;
  if (kinds.contains(FeatureKind::protocol))
    out.push_back({FeatureKind::protocol, r.protocol});
  for (const auto& [k, v] : r.app_features)
    if (kinds.contains(k))
      out.push_back({k, v});
  return out;
}

inline std::vector<FeatureValue> oracle_net_values(IPv4Address ip, FeatureKindSet kinds, const AsnTable& asn) {
  std::vector<FeatureValue> out;
  for (int len = 16; len <= 23; ++len)
    if (kinds.contains(subnet_kind(len)))
      out.push_back({subnet_kind(len), Subnet(ip, len).to_string()});
  if (kinds.contains(FeatureKind::asn))
    if (auto a = linear_asn(asn, ip))
      out.push_back({FeatureKind::asn, std::to_string(*a)});
  return out;
}

/// Whether service `r` exhibits condition `c`, decided by inspecting the
/// record rather than enumerating its conditions.
inline bool exhibits(const ServiceRecord& r, const Condition& c, FeatureKindSet app, FeatureKindSet net,
                     const AsnTable& asn) {
  if (r.port != c.port_b)
    return false;
  if (c.app) {
    auto values = oracle_app_values(r, app);
    if (std::find(values.begin(), values.end(), *c.app) == values.end())
      return false;
  }
  if (c.net) {
    auto values = oracle_net_values(r.ip, net, asn);
    if (std::find(values.begin(), values.end(), *c.net) == values.end())
      return false;
  }
  return true;
}

inline std::vector<Condition> oracle_conditions(const ServiceRecord& r, FeatureKindSet app, FeatureKindSet net,
                                                const AsnTable& asn) {
  std::vector<Condition> out{Condition::port_only(r.port)};
  auto apps = oracle_app_values(r, app);
  auto nets = oracle_net_values(r.ip, net, asn);
  for (const auto& a : apps)
    out.push_back(Condition::port_app(r.port, a));
  for (const auto& n : nets)
    out.push_back(Condition::port_net(r.port, n));
  for (const auto& a : apps)
    for (const auto& n : nets)
      out.push_back(Condition::port_app_net(r.port, a, n));
  return out;
}

using OracleModel = std::map<std::pair<Condition, Port>, CountPair>;

/// Counts, for every condition and port, the hosts exhibiting the condition
/// and the hosts that also serve the port. Each host contributes its
/// condition set once.
inline OracleModel oracle_model(const Corpus& corpus, FeatureKindSet app, FeatureKindSet net, const AsnTable& asn,
                                std::uint32_t min_support) {
  std::map<Condition, std::uint32_t> cond;
  std::map<std::pair<Condition, Port>, std::uint32_t> joint;
  for (const auto& h : corpus.hosts()) {
    auto services = corpus.host_services(h);
    std::set<Condition> here;
    for (const auto& s : services)
      for (auto& c : oracle_conditions(s, app, net, asn))
        here.insert(std::move(c));
    for (const auto& c : here) {
      ++cond[c];
      for (const auto& s : services)
        if (s.port != c.port_b)
          ++joint[{c, s.port}];
    }
  }
  OracleModel out;
  for (const auto& [k, n] : joint) {
    auto support = cond.at(k.first);
    if (support >= min_support)
      out[k] = {n, support};
  }
  return out;
}

} // namespace gps::testing
