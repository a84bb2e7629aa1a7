// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gps/feature_kind.hpp"
#include "gps/ipv4.hpp"
#include "gps/service.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace gps {

/// A concrete feature value. Network kinds encode subnet text
/// ("1.2.0.0/16") or a decimal ASN ("1181").
struct FeatureValue {
  FeatureKind kind = FeatureKind::protocol;
  std::string value;

  friend auto operator<=>(const FeatureValue&, const FeatureValue&) = default;
  friend bool operator==(const FeatureValue&, const FeatureValue&) = default;
};

/// Static prefix -> ASN mapping with longest-prefix-match lookup.
///
/// Entries are kept in one hash table per prefix length; lookup probes from
/// /32 down to /0 and stops at the first hit, so cost is bounded by the
/// number of distinct prefix lengths present.
class AsnTable {
public:
  struct Entry {
    Subnet prefix;
    std::uint32_t asn = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  AsnTable() = default;

  /// Inserts or replaces the mapping for `prefix`.
  void add(Subnet prefix, std::uint32_t asn);

  std::optional<std::uint32_t> lookup(IPv4Address ip) const;

  /// Entries sorted by (base, prefix_len).
  std::vector<Entry> entries() const;

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  /// Reads newline-delimited `prefix/len,asn`. Blank lines and lines
  /// starting with '#' are skipped. Throws Error(Errc::parse) naming the line.
  static AsnTable parse(std::istream& in, std::string_view source = "<asn>");
  static AsnTable load(const std::string& path);
  void write(std::ostream& out) const;

private:
  std::array<std::unordered_map<std::uint32_t, std::uint32_t>, 33> levels_;
  std::uint64_t present_lengths_ = 0;
  std::size_t count_ = 0;
};

/// Protocol feature plus every populated application-layer entry, in enum
/// order.
std::vector<FeatureValue> extract_app_features(const ServiceRecord& record);

/// As extract_app_features, restricted to `kinds` (Protocol included only if
/// present in `kinds`).
std::vector<FeatureValue> extract_app_features(const ServiceRecord& record, FeatureKindSet kinds);

/// Network features of `ip` for each requested kind, in enum order. The ASN
/// entry is omitted when the table has no match.
std::vector<FeatureValue> extract_net_features(IPv4Address ip, FeatureKindSet net_kinds,
                                               const AsnTable& asn);

/// Numeric form of a network feature: the masked subnet base for subnet
/// kinds, the ASN for FeatureKind::asn.
struct NetFeature {
  FeatureKind kind = FeatureKind::asn;
  std::uint32_t value = 0;

  friend auto operator<=>(const NetFeature&, const NetFeature&) = default;
};

std::vector<NetFeature> extract_net_values(IPv4Address ip, FeatureKindSet net_kinds,
                                           const AsnTable& asn);

FeatureValue to_feature_value(NetFeature net);
NetFeature parse_net_feature(const FeatureValue& value);

} // namespace gps
