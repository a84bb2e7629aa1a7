// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string_view>
#include <vector>

namespace gps {

/// Every feature used as conditioning evidence. Application-layer kinds come
/// first (Protocol plus the per-protocol banner/certificate fields), followed
/// by the network-layer kinds: the ASN and the /16../23 subnetworks.
enum class FeatureKind : std::uint8_t {
  protocol,
  tls_cert_hash,
  tls_cert_org,
  tls_subject_name,
  http_title,
  http_body_hash,
  http_server,
  http_header,
  ssh_host_key,
  ssh_banner,
  vnc_desktop_name,
  smtp_banner,
  ftp_banner,
  imap_banner,
  pop3_banner,
  cwmp_header,
  cwmp_body_hash,
  telnet_banner,
  pptp_vendor,
  mysql_version,
  memcached_version,
  mssql_version,
  ipmi_banner,
  asn,
  subnet16,
  subnet17,
  subnet18,
  subnet19,
  subnet20,
  subnet21,
  subnet22,
  subnet23,
};

inline constexpr std::size_t feature_kind_count = 32;

constexpr bool is_network_kind(FeatureKind k) {
  return k >= FeatureKind::asn;
}

constexpr bool is_app_kind(FeatureKind k) {
  return !is_network_kind(k);
}

constexpr bool is_subnet_kind(FeatureKind k) {
  return k >= FeatureKind::subnet16;
}

/// Prefix length of a subnet kind; 0 for every other kind.
constexpr int subnet_prefix(FeatureKind k) {
  return is_subnet_kind(k) ? 16 + (static_cast<int>(k) - static_cast<int>(FeatureKind::subnet16))
                           : 0;
}

/// The subnet kind for /16../23. Throws Error(Errc::invalid_argument) otherwise.
FeatureKind subnet_kind(int prefix_len);

/// Stable snake_case name used in every file format ("ssh_banner", "subnet16").
std::string_view name(FeatureKind k);
std::optional<FeatureKind> kind_from_name(std::string_view name);

/// True when an application-layer kind may appear on a service speaking
/// `protocol`. TLS certificate fields are valid on any protocol. Protocol and
/// network kinds never appear in a record's feature map.
bool valid_for_protocol(FeatureKind k, std::string_view protocol);

/// Small value-type set of FeatureKind; iteration follows enum order.
class FeatureKindSet {
public:
  constexpr FeatureKindSet() = default;
  constexpr FeatureKindSet(std::initializer_list<FeatureKind> kinds) {
    for (auto k : kinds)
      insert(k);
  }

  static constexpr FeatureKindSet all_app() {
    FeatureKindSet s;
    s.bits_ = (std::uint32_t{1} << static_cast<int>(FeatureKind::asn)) - 1;
    return s;
  }

  static constexpr FeatureKindSet all_network() {
    FeatureKindSet s;
    s.bits_ = ~((std::uint32_t{1} << static_cast<int>(FeatureKind::asn)) - 1);
    return s;
  }

  constexpr void insert(FeatureKind k) { bits_ |= bit(k); }
  constexpr void erase(FeatureKind k) { bits_ &= ~bit(k); }
  constexpr bool contains(FeatureKind k) const { return (bits_ & bit(k)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr std::uint32_t bits() const { return bits_; }

  constexpr FeatureKindSet operator&(FeatureKindSet o) const {
    FeatureKindSet s;
    s.bits_ = bits_ & o.bits_;
    return s;
  }

  std::vector<FeatureKind> to_vector() const {
    std::vector<FeatureKind> out;
    for (std::size_t i = 0; i < feature_kind_count; ++i)
      if (bits_ & (std::uint32_t{1} << i))
        out.push_back(static_cast<FeatureKind>(i));
    return out;
  }

  friend constexpr bool operator==(FeatureKindSet, FeatureKindSet) = default;

private:
  static constexpr std::uint32_t bit(FeatureKind k) {
    return std::uint32_t{1} << static_cast<int>(k);
  }

  std::uint32_t bits_ = 0;
};

/// Default network evidence: the IP's ASN and its /16.
inline constexpr FeatureKindSet default_net_kinds{FeatureKind::asn, FeatureKind::subnet16};

/// The full candidate set used when ranking network features.
inline constexpr FeatureKindSet all_net_candidates = FeatureKindSet::all_network();

} // namespace gps
