// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gps/feature_kind.hpp"
#include "gps/ipv4.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace gps {

using Port = std::uint16_t;

/// One responsive (ip, port) with its protocol and application-layer
/// feature values.
struct ServiceRecord {
  IPv4Address ip;
  Port port = 0;
  std::string protocol;
  std::map<FeatureKind, std::string> app_features;

  friend bool operator==(const ServiceRecord&, const ServiceRecord&) = default;
};

/// Packed (ip, port) identity of a service.
using ServiceKey = std::uint64_t;

constexpr ServiceKey service_key(IPv4Address ip, Port port) {
  return (static_cast<std::uint64_t>(ip.value) << 16) | port;
}

constexpr ServiceKey service_key(const ServiceRecord& r) {
  return service_key(r.ip, r.port);
}

constexpr IPv4Address key_ip(ServiceKey k) {
  return IPv4Address{static_cast<std::uint32_t>(k >> 16)};
}

constexpr Port key_port(ServiceKey k) {
  return static_cast<Port>(k & 0xffff);
}

} // namespace gps
