// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "gps/features.hpp"

#include "gps/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace gps {

namespace {

constexpr std::array<std::string_view, feature_kind_count> kind_names = {
  "protocol",       "tls_cert_hash",   "tls_cert_org",      "tls_subject_name",
  "http_title",     "http_body_hash",  "http_server",       "http_header",
  "ssh_host_key",   "ssh_banner",      "vnc_desktop_name",  "smtp_banner",
  "ftp_banner",     "imap_banner",     "pop3_banner",       "cwmp_header",
  "cwmp_body_hash", "telnet_banner",   "pptp_vendor",       "mysql_version",
  "memcached_version", "mssql_version", "ipmi_banner",      "asn",
  "subnet16",       "subnet17",        "subnet18",          "subnet19",
  "subnet20",       "subnet21",        "subnet22",          "subnet23",
};

bool protocol_in(std::string_view protocol, std::initializer_list<std::string_view> family) {
  return std::find(family.begin(), family.end(), protocol) != family.end();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

} // namespace

FeatureKind subnet_kind(int prefix_len) {
  if (prefix_len < 16 || prefix_len > 23)
    throw Error(Errc::invalid_argument,
                "network subnet features cover /16../23, got /" + std::to_string(prefix_len));
  return static_cast<FeatureKind>(static_cast<int>(FeatureKind::subnet16) + prefix_len - 16);
}

std::string_view name(FeatureKind k) {
  return kind_names[static_cast<std::size_t>(k)];
}

std::optional<FeatureKind> kind_from_name(std::string_view n) {
  for (std::size_t i = 0; i < kind_names.size(); ++i)
    if (kind_names[i] == n)
      return static_cast<FeatureKind>(i);
  return std::nullopt;
}

bool valid_for_protocol(FeatureKind k, std::string_view protocol) {
  using K = FeatureKind;
  switch (k) {
    case K::tls_cert_hash:
    case K::tls_cert_org:
    case K::tls_subject_name:
      return true;
    case K::http_title:
    case K::http_body_hash:
    case K::http_server:
    case K::http_header:
      return protocol_in(protocol, {"http", "https"});
    case K::ssh_host_key:
    case K::ssh_banner:
      return protocol == "ssh";
    case K::vnc_desktop_name:
      return protocol == "vnc";
    case K::smtp_banner:
      return protocol_in(protocol, {"smtp", "smtps"});
    case K::ftp_banner:
      return protocol_in(protocol, {"ftp", "ftps"});
    case K::imap_banner:
      return protocol_in(protocol, {"imap", "imaps"});
    case K::pop3_banner:
      return protocol_in(protocol, {"pop3", "pop3s"});
    case K::cwmp_header:
    case K::cwmp_body_hash:
      return protocol == "cwmp";
    case K::telnet_banner:
      return protocol == "telnet";
    case K::pptp_vendor:
      return protocol == "pptp";
    case K::mysql_version:
      return protocol == "mysql";
    case K::memcached_version:
      return protocol == "memcached";
    case K::mssql_version:
      return protocol == "mssql";
    case K::ipmi_banner:
      return protocol == "ipmi";
    default:
      return false;
  }
}

void AsnTable::add(Subnet prefix, std::uint32_t asn) {
  auto& level = levels_[static_cast<std::size_t>(prefix.prefix_len())];
  auto [it, inserted] = level.insert_or_assign(prefix.base().value, asn);
  if (inserted)
    ++count_;
  present_lengths_ |= std::uint64_t{1} << prefix.prefix_len();
}

std::optional<std::uint32_t> AsnTable::lookup(IPv4Address ip) const {
  for (int len = 32; len >= 0; --len) {
    if (!(present_lengths_ & (std::uint64_t{1} << len)))
      continue;
    const auto& level = levels_[static_cast<std::size_t>(len)];
    if (auto it = level.find(ip.value & Subnet::mask_for(len)); it != level.end())
      return it->second;
  }
  return std::nullopt;
}

std::vector<AsnTable::Entry> AsnTable::entries() const {
  std::vector<Entry> out;
  out.reserve(count_);
  for (int len = 0; len <= 32; ++len)
    for (auto [base, asn] : levels_[static_cast<std::size_t>(len)])
      out.push_back({Subnet{IPv4Address{base}, len}, asn});
  std::sort(out.begin(), out.end(),
            [](const Entry& x, const Entry& y) { return x.prefix < y.prefix; });
  return out;
}

AsnTable AsnTable::parse(std::istream& in, std::string_view source) {
  AsnTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (text.empty() || text.front() == '#')
      continue;
    auto fail = [&](const std::string& why) {
      return Error(Errc::parse, std::string(source) + ":" + std::to_string(line_no) + ": " + why);
    };
    auto comma = text.find(',');
    if (comma == std::string_view::npos)
      throw fail("expected 'prefix/len,asn'");
    auto prefix = Subnet::try_parse(trim(text.substr(0, comma)));
    if (!prefix)
      throw fail("invalid prefix '" + std::string(text.substr(0, comma)) + "'");
    auto asn_text = trim(text.substr(comma + 1));
    if (asn_text.size() > 2 && (asn_text[0] == 'A' || asn_text[0] == 'a'))
      asn_text.remove_prefix(2);
    std::uint32_t asn = 0;
    auto [ptr, ec] = std::from_chars(asn_text.data(), asn_text.data() + asn_text.size(), asn);
    if (ec != std::errc{} || ptr != asn_text.data() + asn_text.size() || asn_text.empty())
      throw fail("invalid ASN '" + std::string(asn_text) + "'");
    table.add(*prefix, asn);
  }
  return table;
}

AsnTable AsnTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::io, "file not found: " + path);
  return parse(in, path);
}

void AsnTable::write(std::ostream& out) const {
  for (const auto& e : entries())
    out << e.prefix.to_string() << ',' << e.asn << '\n';
}

std::vector<FeatureValue> extract_app_features(const ServiceRecord& record) {
  return extract_app_features(record, FeatureKindSet::all_app());
}

std::vector<FeatureValue> extract_app_features(const ServiceRecord& record, FeatureKindSet kinds) {
  std::vector<FeatureValue> out;
  out.reserve(record.app_features.size() + 1);
  if (kinds.contains(FeatureKind::protocol) && !record.protocol.empty())
    out.push_back({FeatureKind::protocol, record.protocol});
  // std::map iterates in enum order.
  for (const auto& [kind, value] : record.app_features)
    if (kinds.contains(kind) && is_app_kind(kind) && !value.empty())
      out.push_back({kind, value});
  return out;
}

std::vector<NetFeature> extract_net_values(IPv4Address ip, FeatureKindSet net_kinds,
                                           const AsnTable& asn) {
  std::vector<NetFeature> out;
  for (auto kind : net_kinds.to_vector()) {
    if (kind == FeatureKind::asn) {
      if (auto a = asn.lookup(ip))
        out.push_back({kind, *a});
    } else if (is_subnet_kind(kind)) {
      out.push_back({kind, ip.value & Subnet::mask_for(subnet_prefix(kind))});
    }
  }
  return out;
}

std::vector<FeatureValue> extract_net_features(IPv4Address ip, FeatureKindSet net_kinds,
                                               const AsnTable& asn) {
  std::vector<FeatureValue> out;
  for (auto nf : extract_net_values(ip, net_kinds, asn))
    out.push_back(to_feature_value(nf));
  return out;
}

FeatureValue to_feature_value(NetFeature net) {
  if (net.kind == FeatureKind::asn)
    return {net.kind, std::to_string(net.value)};
  return {net.kind, Subnet{IPv4Address{net.value}, subnet_prefix(net.kind)}.to_string()};
}

NetFeature parse_net_feature(const FeatureValue& value) {
  if (value.kind == FeatureKind::asn) {
    std::uint32_t asn = 0;
    auto [ptr, ec] = std::from_chars(value.value.data(), value.value.data() + value.value.size(), asn);
    if (ec != std::errc{} || ptr != value.value.data() + value.value.size())
      throw Error(Errc::parse, "invalid ASN value '" + value.value + "'");
    return {value.kind, asn};
  }
  if (!is_subnet_kind(value.kind))
    throw Error(Errc::invalid_argument,
                "'" + std::string(name(value.kind)) + "' is not a network feature");
  auto subnet = Subnet::parse(value.value);
  if (subnet.prefix_len() != subnet_prefix(value.kind))
    throw Error(Errc::parse, "subnet '" + value.value + "' does not match kind " +
                               std::string(name(value.kind)));
  return {value.kind, subnet.base().value};
}

} // namespace gps
