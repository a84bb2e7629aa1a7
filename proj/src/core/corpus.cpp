// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "gps/corpus.hpp"

#include "gps/error.hpp"
#include "rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>
#include <unordered_map>

namespace gps {

namespace {

void validate_record(const ServiceRecord& r) {
  if (r.protocol.empty())
    throw Error(Errc::invalid_argument,
                "service " + r.ip.to_string() + ":" + std::to_string(r.port) + " has no protocol");
  for (const auto& [kind, value] : r.app_features) {
    if (kind == FeatureKind::protocol || !is_app_kind(kind) || !valid_for_protocol(kind, r.protocol))
      throw Error(Errc::invalid_argument, "feature '" + std::string(name(kind)) +
                                            "' is not valid for protocol '" + r.protocol + "'");
  }
}

} // namespace

Corpus::Corpus(Subnet universe, std::vector<ServiceRecord> records) : universe_(universe) {
  std::vector<std::string> offenders;
  std::size_t offender_count = 0;
  for (const auto& r : records) {
    if (!universe_.contains(r.ip)) {
      if (offenders.size() < 10)
        offenders.push_back(r.ip.to_string());
      ++offender_count;
    }
    validate_record(r);
  }
  if (offender_count > 0) {
    std::string msg = std::to_string(offender_count) + " record(s) outside universe " +
                      universe_.to_string() + ":";
    for (const auto& o : offenders)
      msg += " " + o;
    if (offender_count > offenders.size())
      msg += " ...";
    throw Error(Errc::rejected, msg);
  }
  // Stable sort keeps input order within equal keys; the last one wins.
  std::stable_sort(records.begin(), records.end(), [](const auto& x, const auto& y) {
    return service_key(x) < service_key(y);
  });
  records_.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i + 1 < records.size() && service_key(records[i]) == service_key(records[i + 1]))
      continue;
    records_.push_back(std::move(records[i]));
  }
  for (std::uint32_t i = 0; i < records_.size(); ++i) {
    if (hosts_.empty() || hosts_.back().ip != records_[i].ip)
      hosts_.push_back({records_[i].ip, i, i});
    hosts_.back().end = i + 1;
    by_port_[records_[i].port].push_back(i);
  }
}

std::span<const ServiceRecord> Corpus::host(IPv4Address ip) const {
  auto it = std::lower_bound(hosts_.begin(), hosts_.end(), ip,
                             [](const Host& h, IPv4Address v) { return h.ip < v; });
  if (it == hosts_.end() || it->ip != ip)
    return {};
  return host_services(*it);
}

const ServiceRecord* Corpus::find(IPv4Address ip, Port port) const {
  for (const auto& r : host(ip))
    if (r.port == port)
      return &r;
  return nullptr;
}

bool Corpus::contains(IPv4Address ip, Port port) const {
  return find(ip, port) != nullptr;
}

std::vector<const ServiceRecord*> Corpus::lookup(Port port, const Subnet& subnet) const {
  std::vector<const ServiceRecord*> out;
  auto it = by_port_.find(port);
  if (it == by_port_.end())
    return out;
  const auto& idx = it->second;
  auto lo = std::lower_bound(idx.begin(), idx.end(), subnet.base(), [&](std::uint32_t i, IPv4Address v) {
    return records_[i].ip < v;
  });
  auto hi = std::upper_bound(lo, idx.end(), subnet.last(), [&](IPv4Address v, std::uint32_t i) {
    return v < records_[i].ip;
  });
  out.reserve(static_cast<std::size_t>(hi - lo));
  for (auto p = lo; p != hi; ++p)
    out.push_back(&records_[*p]);
  return out;
}

std::size_t Corpus::count(Port port, const Subnet& subnet) const {
  return lookup(port, subnet).size();
}

std::vector<Port> Corpus::ports() const {
  std::vector<Port> out;
  out.reserve(by_port_.size());
  for (const auto& [port, idx] : by_port_)
    out.push_back(port);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Corpus::port_population(Port port) const {
  auto it = by_port_.find(port);
  return it == by_port_.end() ? 0 : it->second.size();
}

Corpus Corpus::filter(const std::function<bool(const ServiceRecord&)>& keep) const {
  std::vector<ServiceRecord> kept;
  for (const auto& r : records_)
    if (keep(r))
      kept.push_back(r);
  return Corpus{universe_, std::move(kept)};
}

// -- file format -------------------------------------------------------------

namespace {

ServiceRecord parse_record(const nlohmann::json& j) {
  if (!j.is_object())
    throw Error(Errc::parse, "record is not an object");
  ServiceRecord r;
  const auto& ip = j.at("ip");
  if (!ip.is_string())
    throw Error(Errc::parse, "'ip' must be a string");
  r.ip = IPv4Address::parse(ip.get<std::string>());
  const auto& port = j.at("port");
  if (!port.is_number_integer() || port.get<std::int64_t>() < 0 || port.get<std::int64_t>() > 65535)
    throw Error(Errc::parse, "'port' must be an integer in [0, 65535]");
  r.port = static_cast<Port>(port.get<std::int64_t>());
  const auto& protocol = j.at("protocol");
  if (!protocol.is_string() || protocol.get<std::string>().empty())
    throw Error(Errc::parse, "'protocol' must be a non-empty string");
  r.protocol = protocol.get<std::string>();
  if (auto f = j.find("features"); f != j.end() && !f->is_null()) {
    if (!f->is_object())
      throw Error(Errc::parse, "'features' must be an object");
    for (const auto& [key, value] : f->items()) {
      auto kind = kind_from_name(key);
      if (!kind || !is_app_kind(*kind) || *kind == FeatureKind::protocol)
        throw Error(Errc::parse, "unknown feature '" + key + "'");
      if (!value.is_string())
        throw Error(Errc::parse, "feature '" + key + "' must be a string");
      if (!valid_for_protocol(*kind, r.protocol))
        throw Error(Errc::parse, "feature '" + key + "' is not valid for protocol '" + r.protocol + "'");
      auto text = value.get<std::string>();
      if (!text.empty())
        r.app_features.emplace(*kind, std::move(text));
    }
  }
  return r;
}

} // namespace

Corpus read_corpus(std::istream& in, Subnet universe, std::string_view source) {
  std::vector<ServiceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      records.push_back(parse_record(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse, std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::parse, std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return Corpus{universe, std::move(records)};
}

Corpus load_corpus(const std::string& path, Subnet universe) {
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::io, "file not found: " + path);
  return read_corpus(in, universe, path);
}

void write_record(std::ostream& out, const ServiceRecord& r) {
  nlohmann::ordered_json j;
  j["ip"] = r.ip.to_string();
  j["port"] = r.port;
  j["protocol"] = r.protocol;
  auto features = nlohmann::ordered_json::object();
  for (const auto& [kind, value] : r.app_features)
    features[std::string(name(kind))] = value;
  j["features"] = std::move(features);
  out << j.dump() << '\n';
}

void write_records(std::ostream& out, std::span<const ServiceRecord> records) {
  for (const auto& r : records)
    write_record(out, r);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  write_records(out, corpus.services());
}

void save_records(const std::string& path, std::span<const ServiceRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(Errc::io, "cannot write " + path);
  write_records(out, records);
  if (!out)
    throw Error(Errc::io, "write failed: " + path);
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  save_records(path, corpus.services());
}

// -- pseudo-service filter ---------------------------------------------------

std::vector<DynamicField> default_dynamic_fields() {
  return {
    {"http_date", R"((^|[\r\n;|]\s*)[Dd]ate:[^\r\n;|]*)"},
    {"http_cookie", R"((^|[\r\n;|]\s*)[Ss]et-[Cc]ookie:[^\r\n|]*)"},
    {"tls_random", R"([Rr]andom[=:]\s*[0-9A-Fa-f]+)"},
  };
}

Corpus filter_pseudo_services(const Corpus& corpus, const PseudoFilterOptions& options) {
  if (options.max_services_per_host < 1)
    throw Error(Errc::invalid_argument, "max_services_per_host must be >= 1");
  std::vector<std::regex> patterns;
  patterns.reserve(options.dynamic_fields.size());
  for (const auto& f : options.dynamic_fields) {
    try {
      patterns.emplace_back(f.pattern, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error(Errc::invalid_argument, "dynamic field '" + f.name + "': " + e.what());
    }
  }
  auto stripped_content = [&](const ServiceRecord& r) {
    std::string key = r.protocol;
    key += '\x1f';
    for (const auto& [kind, value] : r.app_features) {
      std::string v = value;
      for (const auto& re : patterns)
        v = std::regex_replace(v, re, "$1");
      key += name(kind);
      key += '=';
      key += v;
      key += '\x1e';
    }
    return key;
  };

  std::vector<ServiceRecord> kept;
  kept.reserve(corpus.size());
  for (const auto& host : corpus.hosts()) {
    auto services = corpus.host_services(host);
    if (services.size() > options.max_services_per_host)
      continue;
    std::unordered_map<std::string, std::size_t> group_size;
    std::vector<std::string> keys;
    keys.reserve(services.size());
    for (const auto& s : services) {
      keys.push_back(stripped_content(s));
      ++group_size[keys.back()];
    }
    std::unordered_map<std::string, bool> emitted;
    // Services are port-ordered, so the first member of a group is its
    // lowest port.
    for (std::size_t i = 0; i < services.size(); ++i) {
      if (group_size[keys[i]] == 1) {
        kept.push_back(services[i]);
      } else if (options.keep_representative && !emitted[keys[i]]) {
        emitted[keys[i]] = true;
        kept.push_back(services[i]);
      }
    }
  }
  return Corpus{corpus.universe(), std::move(kept)};
}

// -- split -------------------------------------------------------------------

bool seed_sampled(IPv4Address ip, double fraction, std::uint64_t rng_seed) {
  return unit_interval(hash_mix(rng_seed, ip.value)) < fraction;
}

bool SeedSplit::is_seed(IPv4Address ip) const {
  return std::binary_search(seed_ips.begin(), seed_ips.end(), ip);
}

bool SeedSplit::is_test(IPv4Address ip) const {
  return std::binary_search(test_ips.begin(), test_ips.end(), ip);
}

SeedSplit split(const Corpus& corpus, double seed_fraction, std::uint64_t rng_seed) {
  if (!(seed_fraction > 0 && seed_fraction < 1))
    throw Error(Errc::invalid_argument, "seed_fraction must lie in (0, 1)");
  SeedSplit s;
  s.seed_fraction = seed_fraction;
  s.rng_seed = rng_seed;
  for (const auto& h : corpus.hosts())
    (seed_sampled(h.ip, seed_fraction, rng_seed) ? s.seed_ips : s.test_ips).push_back(h.ip);
  return s;
}

std::vector<Port> eligible_ports(const SeedSplit& split, const Corpus& corpus, std::size_t min_ips,
                                 SplitSide side) {
  if (min_ips < 1)
    throw Error(Errc::invalid_argument, "min_ips must be >= 1");
  std::unordered_map<Port, std::size_t> counts;
  const auto& ips = side == SplitSide::seed ? split.seed_ips : split.test_ips;
  for (auto ip : ips)
    for (const auto& r : corpus.host(ip))
      ++counts[r.port];
  std::vector<Port> out;
  for (auto [port, n] : counts)
    if (n > min_ips)
      out.push_back(port);
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace gps
