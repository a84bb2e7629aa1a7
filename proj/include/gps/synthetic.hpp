// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gps/corpus.hpp"
#include "gps/features.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gps {

/// A population of identically manufactured devices.
struct DeviceTemplate {
  std::string id;
  std::vector<Port> port_set;             // always open
  std::map<Port, double> optional_ports;  // port -> open probability in (0, 1]
  std::map<Port, std::string> protocols;  // overrides the well-known default
  std::map<FeatureKind, std::string> shared_features;
  std::vector<std::pair<Subnet, double>> subnet_clustering; // empty: whole universe
  std::uint64_t population = 0;
};

struct SyntheticSpec {
  Subnet universe;
  std::vector<DeviceTemplate> templates;
  std::uint64_t pseudo_host_count = 0;
  std::uint32_t pseudo_ports_per_host = 1500;
  std::uint64_t noise_host_count = 0;
  std::uint32_t noise_max_ports = 3;
  std::vector<AsnTable::Entry> asn_blocks;
  std::uint64_t rng_seed = 0;
};

/// Where a generated host came from.
struct HostOrigin {
  enum class Kind : std::uint8_t { template_host, pseudo, noise };
  Kind kind = Kind::noise;
  std::uint32_t template_index = 0;
};

struct SyntheticCorpus {
  Corpus corpus;
  std::unordered_map<IPv4Address, HostOrigin> origins;
  AsnTable asn;

  const HostOrigin* origin(IPv4Address ip) const {
    auto it = origins.find(ip);
    return it == origins.end() ? nullptr : &it->second;
  }
};

/// Deterministic for a fixed rng_seed. Template hosts carry the template's
/// shared features (where valid for the port's protocol) plus a per-port
/// identity banner; pseudo hosts answer identical content, modulo a dynamic
/// Date header, on a contiguous port range; noise hosts open uniform random
/// ports with unique content.
///
/// Throws Error(Errc::capacity) when hosts do not fit the universe or a
/// clustering subnet, Error(Errc::invalid_argument) on spec violations.
SyntheticCorpus generate(const SyntheticSpec& spec);

SyntheticSpec parse_synthetic_spec(std::istream& in);
SyntheticSpec load_synthetic_spec(const std::string& path);

/// Default protocol for a port ("ssh" on 22, "http" on 80, ... else "http").
std::string default_protocol(Port port);

} // namespace gps
