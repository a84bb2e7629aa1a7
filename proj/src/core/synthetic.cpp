// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "gps/synthetic.hpp"

#include "gps/error.hpp"
#include "rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <unordered_set>

namespace gps {

std::string default_protocol(Port port) {
  switch (port) {
    case 21: return "ftp";
    case 22: return "ssh";
    case 23: return "telnet";
    case 25: return "smtp";
    case 80: return "http";
    case 110: return "pop3";
    case 143: return "imap";
    case 443: return "https";
    case 465: return "smtps";
    case 587: return "smtp";
    case 623: return "ipmi";
    case 990: return "ftps";
    case 993: return "imaps";
    case 995: return "pop3s";
    case 1433: return "mssql";
    case 1723: return "pptp";
    case 2222: return "ssh";
    case 2323: return "telnet";
    case 3306: return "mysql";
    case 5900: return "vnc";
    case 7547: return "cwmp";
    case 8080: return "http";
    case 8443: return "https";
    case 11211: return "memcached";
    default: return "http";
  }
}

namespace {

/// Kinds that identify a (device type, port): the first one not already
/// set by shared features is filled.
std::vector<FeatureKind> identity_kinds(const std::string& protocol) {
  using K = FeatureKind;
  if (protocol == "http" || protocol == "https")
    return {K::http_body_hash, K::http_title, K::http_header};
  if (protocol == "ssh") return {K::ssh_banner};
  if (protocol == "telnet") return {K::telnet_banner};
  if (protocol == "ftp" || protocol == "ftps") return {K::ftp_banner};
  if (protocol == "smtp" || protocol == "smtps") return {K::smtp_banner};
  if (protocol == "imap" || protocol == "imaps") return {K::imap_banner};
  if (protocol == "pop3" || protocol == "pop3s") return {K::pop3_banner};
  if (protocol == "vnc") return {K::vnc_desktop_name};
  if (protocol == "cwmp") return {K::cwmp_header, K::cwmp_body_hash};
  if (protocol == "mysql") return {K::mysql_version};
  if (protocol == "memcached") return {K::memcached_version};
  if (protocol == "mssql") return {K::mssql_version};
  if (protocol == "ipmi") return {K::ipmi_banner};
  if (protocol == "pptp") return {K::pptp_vendor};
  return {K::tls_subject_name};
}

std::string hex_token(Rng& rng, int digits = 16) {
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(digits), '0');
  auto bits = rng.next();
  for (int i = 0; i < digits; ++i) {
    if (i == 16)
      bits = rng.next();
    out[static_cast<std::size_t>(i)] = hex[bits & 0xf];
    bits >>= 4;
  }
  return out;
}

Subnet clip_to_universe(const Subnet& s, const Subnet& universe) {
  if (universe.contains(s))
    return s;
  if (s.contains(universe))
    return universe;
  throw Error(Errc::invalid_argument,
              "cluster subnet " + s.to_string() + " lies outside universe " + universe.to_string());
}

class AddressAllocator {
public:
  explicit AddressAllocator(Rng& rng) : rng_(rng) {}

  IPv4Address take(const Subnet& within) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      IPv4Address ip{within.base().value + static_cast<std::uint32_t>(rng_.below(within.size()))};
      if (used_.insert(ip.value).second)
        return ip;
    }
    // Dense region: walk from a random offset to the next free address.
    auto start = rng_.below(within.size());
    for (std::uint64_t i = 0; i < within.size(); ++i) {
      IPv4Address ip{within.base().value + static_cast<std::uint32_t>((start + i) % within.size())};
      if (used_.insert(ip.value).second)
        return ip;
    }
    throw Error(Errc::capacity, "no free address left in " + within.to_string());
  }

private:
  Rng& rng_;
  std::unordered_set<std::uint32_t> used_;
};

void validate_spec(const SyntheticSpec& spec) {
  std::uint64_t total = spec.pseudo_host_count + spec.noise_host_count;
  for (const auto& t : spec.templates) {
    if (t.port_set.empty())
      throw Error(Errc::invalid_argument, "template '" + t.id + "' has an empty port_set");
    for (auto [port, p] : t.optional_ports)
      if (!(p > 0 && p <= 1))
        throw Error(Errc::invalid_argument,
                    "template '" + t.id + "': optional port probability outside (0, 1]");
    for (const auto& [s, w] : t.subnet_clustering)
      if (!(w > 0))
        throw Error(Errc::invalid_argument, "template '" + t.id + "': cluster weight must be > 0");
    total += t.population;
  }
  if (total > spec.universe.size())
    throw Error(Errc::capacity, std::to_string(total) + " hosts do not fit universe " +
                                  spec.universe.to_string());
  if (spec.pseudo_host_count > 0 && (spec.pseudo_ports_per_host < 1 || spec.pseudo_ports_per_host > 65535))
    throw Error(Errc::invalid_argument, "pseudo_ports_per_host must lie in [1, 65535]");
  if (spec.noise_max_ports < 1)
    throw Error(Errc::invalid_argument, "noise_max_ports must be >= 1");
}

} // namespace

SyntheticCorpus generate(const SyntheticSpec& spec) {
  validate_spec(spec);
  Rng rng(spec.rng_seed);
  AddressAllocator alloc(rng);
  SyntheticCorpus out;
  std::vector<ServiceRecord> records;

  for (std::uint32_t ti = 0; ti < spec.templates.size(); ++ti) {
    const auto& t = spec.templates[ti];
    std::vector<Subnet> clusters;
    std::vector<double> cumulative;
    double total_weight = 0;
    for (const auto& [s, w] : t.subnet_clustering) {
      clusters.push_back(clip_to_universe(s, spec.universe));
      total_weight += w;
      cumulative.push_back(total_weight);
    }
    auto ports = t.port_set;
    std::sort(ports.begin(), ports.end());
    ports.erase(std::unique(ports.begin(), ports.end()), ports.end());

    for (std::uint64_t h = 0; h < t.population; ++h) {
      Subnet where = spec.universe;
      if (!clusters.empty()) {
        auto pick = rng.uniform01() * total_weight;
        auto idx = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
        where = clusters[std::min(idx, clusters.size() - 1)];
      }
      auto ip = alloc.take(where);
      out.origins[ip] = {HostOrigin::Kind::template_host, ti};

      auto open = ports;
      for (auto [port, p] : t.optional_ports)
        if (rng.uniform01() < p)
          open.push_back(port);
      std::sort(open.begin(), open.end());
      open.erase(std::unique(open.begin(), open.end()), open.end());

      for (auto port : open) {
        ServiceRecord r;
        r.ip = ip;
        r.port = port;
        auto proto = t.protocols.find(port);
        r.protocol = proto != t.protocols.end() ? proto->second : default_protocol(port);
        for (const auto& [kind, value] : t.shared_features)
          if (valid_for_protocol(kind, r.protocol))
            r.app_features[kind] = value;
        for (auto kind : identity_kinds(r.protocol)) {
          if (!r.app_features.contains(kind)) {
            r.app_features[kind] = t.id + "/" + std::to_string(port);
            break;
          }
        }
        if (r.protocol == "ssh" && !r.app_features.contains(FeatureKind::ssh_host_key))
          r.app_features[FeatureKind::ssh_host_key] = hex_token(rng, 32);
        if (r.protocol == "https" && !r.app_features.contains(FeatureKind::tls_cert_hash))
          r.app_features[FeatureKind::tls_cert_hash] = hex_token(rng, 32);
        records.push_back(std::move(r));
      }
    }
  }

  static constexpr const char* days[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
  for (std::uint64_t h = 0; h < spec.pseudo_host_count; ++h) {
    auto ip = alloc.take(spec.universe);
    out.origins[ip] = {HostOrigin::Kind::pseudo, 0};
    auto span = spec.pseudo_ports_per_host;
    auto first = static_cast<std::uint32_t>(1 + rng.below(65536 - span));
    auto body = "pseudo-" + hex_token(rng);
    for (std::uint32_t i = 0; i < span; ++i) {
      ServiceRecord r;
      r.ip = ip;
      r.port = static_cast<Port>(first + i);
      r.protocol = "http";
      char date[64];
      std::snprintf(date, sizeof date, "%s, %02u Jul 2021 %02u:%02u:%02u GMT",
                    days[rng.below(7)], static_cast<unsigned>(1 + rng.below(28)),
                    static_cast<unsigned>(rng.below(24)), static_cast<unsigned>(rng.below(60)),
                    static_cast<unsigned>(rng.below(60)));
      r.app_features[FeatureKind::http_body_hash] = body;
      r.app_features[FeatureKind::http_header] =
        std::string("HTTP/1.1 404 Not Found|Date: ") + date + "|Server: wildcard";
      records.push_back(std::move(r));
    }
  }

  for (std::uint64_t h = 0; h < spec.noise_host_count; ++h) {
    auto ip = alloc.take(spec.universe);
    out.origins[ip] = {HostOrigin::Kind::noise, 0};
    auto n = 1 + rng.below(spec.noise_max_ports);
    std::vector<Port> ports;
    while (ports.size() < n) {
      auto p = static_cast<Port>(1 + rng.below(65535));
      if (std::find(ports.begin(), ports.end(), p) == ports.end())
        ports.push_back(p);
    }
    for (auto port : ports) {
      ServiceRecord r;
      r.ip = ip;
      r.port = port;
      r.protocol = default_protocol(port);
      r.app_features[identity_kinds(r.protocol).front()] = "noise-" + hex_token(rng);
      records.push_back(std::move(r));
    }
  }

  for (const auto& e : spec.asn_blocks)
    out.asn.add(e.prefix, e.asn);
  out.corpus = Corpus{spec.universe, std::move(records)};
  return out;
}

namespace {

Port json_port(const nlohmann::json& j) {
  std::int64_t v = 0;
  if (j.is_number_integer())
    v = j.get<std::int64_t>();
  else if (j.is_string()) {
    auto text = j.get<std::string>();
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
      throw Error(Errc::parse, "bad port '" + text + "'");
  }
  else
    throw Error(Errc::parse, "port must be an integer");
  if (v < 0 || v > 65535)
    throw Error(Errc::parse, "port " + std::to_string(v) + " outside [0, 65535]");
  return static_cast<Port>(v);
}

FeatureKind json_kind(const std::string& key) {
  auto kind = kind_from_name(key);
  if (!kind || !is_app_kind(*kind) || *kind == FeatureKind::protocol)
    throw Error(Errc::parse, "unknown application feature '" + key + "'");
  return *kind;
}

} // namespace

SyntheticSpec parse_synthetic_spec(std::istream& in) {
  SyntheticSpec spec;
  try {
    auto j = nlohmann::json::parse(in);
    spec.universe = Subnet::parse(j.at("universe").get<std::string>());
    spec.rng_seed = j.value("rng_seed", std::uint64_t{0});
    spec.pseudo_host_count = j.value("pseudo_host_count", std::uint64_t{0});
    spec.pseudo_ports_per_host = j.value("pseudo_ports_per_host", 1500u);
    spec.noise_host_count = j.value("noise_host_count", std::uint64_t{0});
    spec.noise_max_ports = j.value("noise_max_ports", 3u);
    for (const auto& b : j.value("asn_blocks", nlohmann::json::array()))
      spec.asn_blocks.push_back({Subnet::parse(b.at("prefix").get<std::string>()),
                                 b.at("asn").get<std::uint32_t>()});
    for (const auto& jt : j.value("templates", nlohmann::json::array())) {
      DeviceTemplate t;
      t.id = jt.at("id").get<std::string>();
      for (const auto& p : jt.at("port_set"))
        t.port_set.push_back(json_port(p));
      const auto optional = jt.value("optional_ports", nlohmann::json::object());
      for (const auto& [k, v] : optional.items())
        t.optional_ports[json_port(nlohmann::json(k))] = v.get<double>();
      const auto protocols = jt.value("protocols", nlohmann::json::object());
      for (const auto& [k, v] : protocols.items())
        t.protocols[json_port(nlohmann::json(k))] = v.get<std::string>();
      const auto shared = jt.value("shared_features", nlohmann::json::object());
      for (const auto& [k, v] : shared.items())
        t.shared_features[json_kind(k)] = v.get<std::string>();
      for (const auto& c : jt.value("subnet_clustering", nlohmann::json::array()))
        t.subnet_clustering.emplace_back(Subnet::parse(c.at("subnet").get<std::string>()),
                                         c.value("weight", 1.0));
      t.population = jt.at("population").get<std::uint64_t>();
      spec.templates.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("synthetic spec: ") + e.what());
  }
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::io, "file not found: " + path);
  return parse_synthetic_spec(in);
}

} // namespace gps
