// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gps/feature_kind.hpp"
#include "gps/ipv4.hpp"
#include "gps/service.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace gps {

/// Immutable ground-truth universe of services.
///
/// Records are stored sorted by (ip, port). Two indexes are kept: a host
/// table (ip -> contiguous record range) and a per-port list of record
/// indexes sorted by ip, which answers (port, subnet) queries at any prefix
/// length with two binary searches.
class Corpus {
public:
  struct Host {
    IPv4Address ip;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
  };

  Corpus() = default;

  /// Builds a corpus from records in input order. Duplicate (ip, port)
  /// records collapse to the last occurrence. Throws Error(Errc::rejected)
  /// listing offenders when any ip falls outside `universe`, and
  /// Error(Errc::invalid_argument) when a record violates the
  /// protocol/feature invariant.
  Corpus(Subnet universe, std::vector<ServiceRecord> records);

  const Subnet& universe() const { return universe_; }
  std::span<const ServiceRecord> services() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::span<const Host> hosts() const { return hosts_; }
  std::size_t host_count() const { return hosts_.size(); }
  std::span<const ServiceRecord> host_services(const Host& h) const {
    return std::span<const ServiceRecord>(records_).subspan(h.begin, h.end - h.begin);
  }

  /// Services of `ip`; empty when the ip is not responsive.
  std::span<const ServiceRecord> host(IPv4Address ip) const;

  bool contains(IPv4Address ip, Port port) const;
  const ServiceRecord* find(IPv4Address ip, Port port) const;

  /// Records on `port` whose ip lies in `subnet`, ordered by ip.
  std::vector<const ServiceRecord*> lookup(Port port, const Subnet& subnet) const;
  std::size_t count(Port port, const Subnet& subnet) const;

  /// Distinct ports, ascending.
  std::vector<Port> ports() const;

  /// Number of responsive ips on `port`.
  std::size_t port_population(Port port) const;

  /// New corpus with the records satisfying `keep`.
  Corpus filter(const std::function<bool(const ServiceRecord&)>& keep) const;

  friend bool operator==(const Corpus& x, const Corpus& y) {
    return x.universe_ == y.universe_ && x.records_ == y.records_;
  }

private:
  Subnet universe_{};
  std::vector<ServiceRecord> records_;
  std::vector<Host> hosts_;
  std::unordered_map<Port, std::vector<std::uint32_t>> by_port_;
};

/// Parses newline-delimited JSON records (`ip`, `port`, `protocol`,
/// `features`). Throws Error(Errc::parse) naming the first malformed line.
Corpus read_corpus(std::istream& in, Subnet universe, std::string_view source = "<corpus>");
Corpus load_corpus(const std::string& path, Subnet universe);

void write_record(std::ostream& out, const ServiceRecord& record);
void write_records(std::ostream& out, std::span<const ServiceRecord> records);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::string& path, const Corpus& corpus);
void save_records(const std::string& path, std::span<const ServiceRecord> records);

/// A content pattern removed from every feature value before pseudo-service
/// comparison (ECMAScript regex).
struct DynamicField {
  std::string name;
  std::string pattern;
};

/// HTTP Date header, HTTP cookies, TLS random bytes.
std::vector<DynamicField> default_dynamic_fields();

struct PseudoFilterOptions {
  std::vector<DynamicField> dynamic_fields = default_dynamic_fields();
  /// Hosts serving more than this many services are dropped entirely.
  std::size_t max_services_per_host = 10;
  /// When false, every member of a group of identical services is removed
  /// instead of keeping the lowest port.
  bool keep_representative = true;
};

/// Three-pass wildcard-responder filter: strip dynamic fields, collapse
/// identical services per host, drop hosts serving too many services.
/// The host-size threshold is applied to the host's responsive service count
/// before collapsing.
Corpus filter_pseudo_services(const Corpus& corpus, const PseudoFilterOptions& options = {});

/// Deterministic per-address coin: true with probability `fraction`. Shared
/// by the IP-wise split and the seed scan so both pick the same addresses.
bool seed_sampled(IPv4Address ip, double fraction, std::uint64_t rng_seed);

struct SeedSplit {
  std::vector<IPv4Address> seed_ips; // ascending
  std::vector<IPv4Address> test_ips; // ascending
  double seed_fraction = 0;
  std::uint64_t rng_seed = 0;

  bool is_seed(IPv4Address ip) const;
  bool is_test(IPv4Address ip) const;
};

/// IP-wise assignment of every responsive address. Throws
/// Error(Errc::invalid_argument) unless 0 < seed_fraction < 1.
SeedSplit split(const Corpus& corpus, double seed_fraction, std::uint64_t rng_seed);

enum class SplitSide { seed, test };

/// Ports whose responsive-ip count on `side` strictly exceeds `min_ips`,
/// ascending.
std::vector<Port> eligible_ports(const SeedSplit& split, const Corpus& corpus,
                                 std::size_t min_ips = 2, SplitSide side = SplitSide::seed);

} // namespace gps
