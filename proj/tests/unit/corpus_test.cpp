// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "helpers.hpp"

#include "gps/error.hpp"
#include "random_corpus.hpp"

#include <map>
#include <set>
#include <sstream>

using namespace gps;
using namespace gps::testing;

namespace {

const std::string three_lines =
  R"({"ip":"1.1.1.1","port":22,"protocol":"ssh","features":{"ssh_banner":"SSH-2.0-dropbear"}})"
  "\n"
  R"({"ip":"1.1.1.1","port":80,"protocol":"http","features":{"http_title":"home"}})"
  "\n"
  R"({"ip":"2.2.2.2","port":80,"protocol":"http","features":{}})"
  "\n";

} // namespace

TEST_CASE("three valid lines give three services") {
  std::istringstream in(three_lines);
  auto c = read_corpus(in, Subnet::parse("0.0.0.0/0"));
  CHECK(c.size() == 3);
  CHECK(c.host_count() == 2);
  CHECK(c.contains(IPv4Address::parse("1.1.1.1"), 22));
  CHECK_FALSE(c.contains(IPv4Address::parse("2.2.2.2"), 22));
  CHECK(c.find(IPv4Address::parse("1.1.1.1"), 22)->app_features.at(FeatureKind::ssh_banner) == "SSH-2.0-dropbear");
}

TEST_CASE("an invalid address is a parse error naming the line") {
  std::istringstream in(three_lines + R"({"ip":"300.1.1.1","port":80,"protocol":"http","features":{}})" "\n");
  try {
    read_corpus(in, Subnet::parse("0.0.0.0/0"), "bad.jsonl");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse);
    CHECK(std::string(e.what()).find(":4") != std::string::npos);
  }
}

TEST_CASE("records outside the universe are rejected and the last duplicate wins") {
  std::istringstream out_of_universe(three_lines);
  CHECK_THROWS_AS(read_corpus(out_of_universe, Subnet::parse("1.0.0.0/8")), Error);
  std::istringstream dup(three_lines + R"({"ip":"2.2.2.2","port":80,"protocol":"http","features":{"http_title":"new"}})" "\n");
  auto c = read_corpus(dup, Subnet::parse("0.0.0.0/0"));
  CHECK(c.size() == 3);
  CHECK(c.find(IPv4Address::parse("2.2.2.2"), 80)->app_features.at(FeatureKind::http_title) == "new");
}

TEST_CASE("missing corpus file reports file not found") {
  try {
    load_corpus("/nonexistent/corpus.jsonl", Subnet::parse("0.0.0.0/0"));
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
    CHECK(std::string(e.what()).find("file not found") != std::string::npos);
  }
}

TEST_CASE("corpus text round-trips") {
  RandomCorpusParams p;
  p.hosts = 300;
  auto c = random_corpus(p);
  std::ostringstream out;
  write_corpus(out, c);
  std::istringstream in(out.str());
  auto back = read_corpus(in, c.universe());
  CHECK(back == c);
  std::ostringstream again;
  write_corpus(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("host and port indexes agree with linear scans") {
  RandomCorpusParams p;
  p.hosts = 400;
  p.seed = 7;
  auto c = random_corpus(p);
  std::map<std::uint32_t, std::vector<Port>> by_ip;
  for (const auto& r : c.services())
    by_ip[r.ip.value].push_back(r.port);
  CHECK(c.host_count() == by_ip.size());
  for (const auto& [ip, ports] : by_ip) {
    auto h = c.host(IPv4Address{ip});
    REQUIRE(h.size() == ports.size());
    for (std::size_t i = 0; i < ports.size(); ++i)
      CHECK(h[i].port == ports[i]);
  }
  auto subnet = Subnet(c.services()[0].ip, 16);
  for (auto port : p.ports) {
    std::size_t n = 0;
    std::size_t all = 0;
    for (const auto& r : c.services()) {
      n += r.port == port && subnet.contains(r.ip);
      all += r.port == port;
    }
    CHECK(c.count(port, subnet) == n);
    CHECK(c.port_population(port) == all);
  }
}

TEST_CASE("split is per address, deterministic and near its fraction") {
  std::vector<ServiceRecord> records;
  for (std::uint32_t i = 0; i < 1000; ++i) {
    ServiceRecord r;
    r.ip = IPv4Address{0x0a000000u + i * 7};
    r.port = 80;
    r.protocol = "http";
    records.push_back(r);
  }
  for (Port p : {22, 23, 443, 8080}) {
    ServiceRecord r;
    r.ip = IPv4Address{0x0a000000u};
    r.port = p;
    r.protocol = "http";
    records.push_back(r);
  }
  Corpus c(Subnet::parse("10.0.0.0/8"), records);
  auto s = split(c, 0.5, 42);
  CHECK(s.seed_ips.size() >= 400);
  CHECK(s.seed_ips.size() <= 600);
  CHECK(s.seed_ips.size() + s.test_ips.size() == 1000);
  std::set<IPv4Address> seen(s.seed_ips.begin(), s.seed_ips.end());
  for (auto ip : s.test_ips)
    CHECK(seen.insert(ip).second);
  for (auto ip : s.seed_ips) {
    CHECK(s.is_seed(ip));
    CHECK_FALSE(s.is_test(ip));
    CHECK(seed_sampled(ip, 0.5, 42));
  }
  auto again = split(c, 0.5, 42);
  CHECK(again.seed_ips == s.seed_ips);
  CHECK(split(c, 0.5, 43).seed_ips != s.seed_ips);
  CHECK_THROWS_AS(split(c, 0.0, 42), Error);
  CHECK_THROWS_AS(split(c, 1.0, 42), Error);
}

TEST_CASE("eligible ports need strictly more than min_ips responsive addresses") {
  Corpus c(Subnet::parse("0.0.0.0/0"),
           {rec("1.0.0.1", 80), rec("1.0.0.2", 80), rec("1.0.0.3", 80), rec("1.0.0.1", 22, "ssh"),
            rec("1.0.0.2", 22, "ssh")});
  SeedSplit s;
  for (const auto& h : c.hosts())
    s.seed_ips.push_back(h.ip);
  CHECK(eligible_ports(s, c, 2) == std::vector<Port>{80});
  CHECK(eligible_ports(s, c, 1) == std::vector<Port>{22, 80});
  CHECK(eligible_ports(s, c, 2, SplitSide::test).empty());
}

TEST_CASE("eligible ports match a group-by count") {
  RandomCorpusParams p;
  p.hosts = 300;
  p.seed = 3;
  p.ports = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  auto c = random_corpus(p);
  auto s = split(c, 0.3, 9);
  for (std::size_t min_ips : {1, 2, 5, 10}) {
    std::map<Port, std::size_t> counts;
    for (const auto& r : c.services())
      if (s.is_seed(r.ip))
        ++counts[r.port];
    std::vector<Port> expect;
    for (auto [port, n] : counts)
      if (n > min_ips)
        expect.push_back(port);
    CHECK(eligible_ports(s, c, min_ips) == expect);
  }
}

TEST_CASE("pseudo hosts lose every service and small hosts are untouched") {
  std::vector<ServiceRecord> records{rec("1.0.0.1", 22, "ssh", {{FeatureKind::ssh_banner, "a"}}),
                                     rec("1.0.0.1", 80, "http", {{FeatureKind::http_title, "b"}})};
  for (Port p = 2000; p < 3500; ++p)
    records.push_back(rec("1.0.0.2", p, "http",
                          {{FeatureKind::http_body_hash, "same"},
                           {FeatureKind::http_header, "HTTP/1.1 404|Date: Mon, " + std::to_string(p) + "|Server: x"}}));
  Corpus c(Subnet::parse("0.0.0.0/0"), records);
  auto f = filter_pseudo_services(c);
  CHECK(f.size() == 2);
  CHECK(f.contains(IPv4Address::parse("1.0.0.1"), 22));
  CHECK(f.contains(IPv4Address::parse("1.0.0.1"), 80));
}

TEST_CASE("identical stripped services on a small host collapse to the lowest port") {
  Corpus c(Subnet::parse("0.0.0.0/0"),
           {rec("1.0.0.1", 8080, "http", {{FeatureKind::http_header, "Date: Mon|Server: a"}}),
            rec("1.0.0.1", 8081, "http", {{FeatureKind::http_header, "Date: Tue|Server: a"}}),
            rec("1.0.0.1", 22, "ssh", {{FeatureKind::ssh_banner, "x"}})});
  auto kept = filter_pseudo_services(c);
  CHECK(kept.size() == 2);
  CHECK(kept.contains(IPv4Address::parse("1.0.0.1"), 8080));
  PseudoFilterOptions drop;
  drop.keep_representative = false;
  auto dropped = filter_pseudo_services(c, drop);
  CHECK(dropped.size() == 1);
  CHECK(dropped.contains(IPv4Address::parse("1.0.0.1"), 22));
  PseudoFilterOptions no_fields;
  no_fields.dynamic_fields.clear();
  CHECK(filter_pseudo_services(c, no_fields).size() == 3);
}
