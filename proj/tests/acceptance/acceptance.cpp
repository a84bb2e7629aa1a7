// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   gps_acceptance               run every criterion
//   gps_acceptance -k 4 -k 7     run selected criteria

#include "gps/error.hpp"
#include "gps/eval.hpp"
#include "gps/pipeline.hpp"
#include "gps/planner.hpp"
#include "gps/synthetic.hpp"

#include "metric_oracle.hpp"
#include "model_oracle.hpp"
#include "planner_oracle.hpp"
#include "random_corpus.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

using namespace gps;
using namespace gps::testing;
namespace fs = std::filesystem;

#ifndef GPS_SOURCE_DIR
#error "GPS_SOURCE_DIR must name the source tree"
#endif

namespace {

// Pinned thresholds.
constexpr int c1_corpora = 24;
constexpr std::size_t c1_max_services = 1000;
constexpr double c1_seconds = 10.0;
constexpr int c2_seeds = 24;
constexpr std::size_t c2_max_hosts = 200;
constexpr double c3_min_discovered = 0.95;
constexpr double c3_min_precision = 0.95;
constexpr double c4_max_ratio = 0.1;
constexpr double c4_target = 0.9;
// Probes the reference run needs to reach the target, measured once and
// checked against the replay oracle.
constexpr double c4_pinned_probes = 10702517.173524151;
constexpr double c4_pinned_rel_tol = 1e-9;
constexpr double c5_min_precision = 0.99;
constexpr int c6_instances = 20;
constexpr std::size_t c6_max_services = 10000;
constexpr std::size_t c8_min_services = 1000000;
constexpr double c8_seconds = 300.0;
constexpr double c8_min_speedup = 2.0;
constexpr unsigned c8_partitions = 4;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path reference_dir() {
  return fs::path(GPS_SOURCE_DIR) / "data" / "reference";
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("gps-acceptance-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_directories(const fs::path& a, const fs::path& b, std::string& why) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++n;
    auto other = b / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
      why = e.path().filename().string();
      return false;
    }
  }
  std::size_t m = std::distance(fs::directory_iterator(b), fs::directory_iterator{});
  if (n != m || n == 0) {
    why = "file count";
    return false;
  }
  return true;
}

OracleModel entries_of(const CoOccurrenceModel& m) {
  OracleModel out;
  for (const auto& row : m.rows())
    for (const auto& t : m.targets(row))
      out[{row.condition, t.port}] = {t.joint_hosts, row.cond_hosts};
  return out;
}

Corpus bounded_corpus(RandomCorpusParams p, std::size_t max_services) {
  while (true) {
    auto c = random_corpus(p);
    if (c.size() <= max_services)
      return c;
    p.hosts = p.hosts * 9 / 10;
  }
}

// -- 1 ------------------------------------------------------------------------

Outcome probability_oracle() {
  std::mt19937_64 rng(1001);
  const FeatureKindSet net_choices[] = {
    default_net_kinds,
    FeatureKindSet{},
    FeatureKindSet{FeatureKind::subnet16, FeatureKind::subnet20, FeatureKind::subnet23},
    all_net_candidates,
  };
  double build_seconds = 0;
  std::size_t entries = 0;
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < c1_corpora; ++i) {
    RandomCorpusParams p;
    p.seed = rng();
    p.hosts = 250 + rng() % 150;
    p.max_ports_per_host = 2 + rng() % 4;
    p.values_per_kind = 1 + static_cast<int>(rng() % 4);
    p.host_subnets = static_cast<int>(rng() % 6);
    auto corpus = bounded_corpus(p, c1_max_services);
    auto asn = std::make_shared<AsnTable>(random_asn(p.universe, p.seed, 8));
    ModelOptions options;
    options.features.net_kinds = net_choices[i % 4];
    options.features.asn = asn;
    if (i % 3 == 1)
      options.features.app_kinds = FeatureKindSet{FeatureKind::protocol, FeatureKind::http_title};
    options.min_support = 1 + static_cast<std::uint32_t>(rng() % 3);
    options.partitions = 1 + static_cast<unsigned>(rng() % 4);
    auto tb = std::chrono::steady_clock::now();
    auto model = build_model(corpus, options);
    build_seconds += seconds_since(tb);
    auto got = entries_of(model);
    auto want = oracle_model(corpus, options.features.app_kinds, options.features.net_kinds, *asn,
                             options.min_support);
    if (got != want)
      return {false, fmt("corpus %d (%zu services): %zu entries vs oracle %zu", i, corpus.size(), got.size(),
                         want.size())};
    entries += got.size();
  }
  double total = seconds_since(t0);
  return {total < c1_seconds, fmt("%d corpora, %zu entries exact; %.2f s total (builds %.2f s), limit %.0f s",
                                  c1_corpora, entries, total, build_seconds, c1_seconds)};
}

// -- 2 ------------------------------------------------------------------------

Outcome planner_oracle() {
  std::mt19937_64 rng(2002);
  std::size_t priors_total = 0;
  std::size_t predictive_total = 0;
  std::size_t predictions_total = 0;
  const double floors[] = {default_probability_floor, 0.3, 0.75};
  for (int i = 0; i < c2_seeds; ++i) {
    RandomCorpusParams p;
    p.seed = rng();
    p.hosts = c2_max_hosts;
    p.values_per_kind = 1 + static_cast<int>(rng() % 3);
    p.host_subnets = 1 + static_cast<int>(rng() % 5);
    auto corpus = random_corpus(p);
    auto s = split(corpus, 0.5, p.seed);
    auto seed = corpus.filter([&](const ServiceRecord& r) { return s.is_seed(r.ip); });
    auto test = corpus.filter([&](const ServiceRecord& r) { return s.is_test(r.ip); });
    auto asn = std::make_shared<AsnTable>(random_asn(p.universe, p.seed));
    ModelOptions options;
    options.features.asn = asn;
    options.features.net_kinds = i % 2 ? default_net_kinds : FeatureKindSet{FeatureKind::subnet20, FeatureKind::asn};
    options.min_support = 1 + static_cast<std::uint32_t>(i % 2);
    auto model = build_model(seed, options);
    auto oracle = oracle_model(seed, options.features.app_kinds, options.features.net_kinds, *asn,
                               options.min_support);
    OracleContext ctx{options.features.app_kinds, options.features.net_kinds, asn.get(), &oracle};

    for (int step : {0, 12, 16, 20, 24, 32}) {
      auto got = build_priors_list(seed, model, step);
      if (got != oracle_priors(ctx, seed, step))
        return {false, fmt("seed %d: priors list differs at step /%d", i, step)};
      priors_total += got.size();
    }
    for (double floor : floors) {
      auto predictive = build_predictive_features(seed, model, floor);
      if (predictive != oracle_predictive(ctx, seed, floor))
        return {false, fmt("seed %d: predictive features differ at floor %g", i, floor)};
      predictive_total += predictive.size();
      std::vector<ServiceRecord> priors_results;
      std::unordered_set<ServiceKey> known;
      for (const auto& h : test.hosts()) {
        auto services = test.host_services(h);
        priors_results.push_back(services[rng() % services.size()]);
        known.insert(service_key(priors_results.back()));
      }
      auto got = build_prediction_list(priors_results, predictive, known, options.features);
      if (plain(got) != oracle_predictions(ctx, priors_results, predictive, known))
        return {false, fmt("seed %d: prediction list differs at floor %g", i, floor)};
      predictions_total += got.size();
    }
  }

  // Floor boundary: 1 of 120,001 port-80 hosts also serves 81.
  std::vector<ServiceRecord> records;
  for (std::uint32_t i = 0; i < 120001; ++i) {
    ServiceRecord r;
    r.ip = IPv4Address{0x0a000000u + i};
    r.port = 80;
    r.protocol = "http";
    records.push_back(r);
  }
  records.push_back(records.front());
  records.back().port = 81;
  Corpus floor_seed(Subnet::parse("10.0.0.0/8"), records);
  ModelOptions no_net;
  no_net.features.net_kinds = {};
  no_net.min_support = 1;
  auto floor_model = build_model(floor_seed, no_net);
  for (const auto& e : build_predictive_features(floor_seed, floor_model, default_probability_floor))
    if (e.target_port == 81)
      return {false, "a probability of 1/120001 passed the 1e-5 floor"};

  return {true, fmt("%d seeds x 6 steps x 3 floors exact (%zu priors, %zu predictive, %zu predictions); "
                    "1/120001 excluded by the floor",
                    c2_seeds, priors_total, predictive_total, predictions_total)};
}

// -- 3 ------------------------------------------------------------------------

Outcome two_example_learnability() {
  SyntheticSpec spec;
  spec.universe = Subnet::parse("10.0.0.0/12");
  spec.rng_seed = 303;
  spec.noise_host_count = 3000;
  spec.noise_max_ports = 3;
  DeviceTemplate target;
  target.id = "probe-target";
  target.port_set = {2323, 8291, 8728, 10443};
  target.protocols = {{2323, "telnet"}, {8291, "http"}, {8728, "http"}, {10443, "https"}};
  target.shared_features = {{FeatureKind::telnet_banner, "MikroTik v6.48"}};
  target.subnet_clustering = {{Subnet::parse("10.3.0.0/16"), 1.0}};
  target.population = 40;
  spec.templates.push_back(target);
  for (int i = 0; i < 6; ++i) {
    DeviceTemplate other;
    other.id = "background-" + std::to_string(i);
    other.port_set = {22, static_cast<Port>(80 + i), static_cast<Port>(9000 + i)};
    other.shared_features = {{FeatureKind::ssh_banner, "bg-" + std::to_string(i)}};
    other.subnet_clustering = {{Subnet(IPv4Address{0x0a000000u + (static_cast<std::uint32_t>(i + 4) << 16)}, 16), 1.0}};
    other.population = 400;
    spec.templates.push_back(other);
  }
  auto g = generate(spec);

  std::vector<IPv4Address> members;
  for (const auto& [ip, origin] : g.origins)
    if (origin.kind == HostOrigin::Kind::template_host && origin.template_index == 0)
      members.push_back(ip);

  PipelineConfig config;
  config.corpus_path = "<generated>";
  config.universe = spec.universe;
  config.seed_fraction = 0.05;
  config.min_ips = 1;
  config.seed_ports = {};
  // The first rng_seed that puts exactly two template hosts in the seed.
  std::uint64_t chosen = 0;
  for (std::uint64_t s = 1; s < 10000 && chosen == 0; ++s) {
    std::size_t n = 0;
    for (auto ip : members)
      n += seed_sampled(ip, config.seed_fraction, s);
    if (n == 2)
      chosen = s;
  }
  if (chosen == 0)
    return {false, "no rng_seed places exactly two template hosts in the seed"};
  config.rng_seed = chosen;

  auto inputs = make_inputs(g.corpus, std::make_shared<AsnTable>(g.asn), config);
  auto r = run_pipeline(inputs, config);

  std::size_t seed_members = 0;
  std::unordered_set<ServiceKey> test_services;
  std::unordered_set<std::uint32_t> test_members;
  for (auto ip : members) {
    if (r.split.is_seed(ip)) {
      ++seed_members;
      continue;
    }
    test_members.insert(ip.value);
    for (const auto& s : inputs.truth.host(ip))
      test_services.insert(service_key(s));
  }
  std::size_t discovered = 0;
  for (const auto* scan : {&r.priors_scan, &r.prediction_scan})
    for (const auto& f : scan->found)
      discovered += test_services.contains(service_key(f));
  std::size_t probes = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < r.prediction_scan.items_scanned; ++i) {
    const auto& p = r.predictions[i];
    if (!test_members.contains(p.ip.value))
      continue;
    ++probes;
    hits += test_services.contains(service_key(p.ip, p.port));
  }
  double share = static_cast<double>(discovered) / static_cast<double>(test_services.size());
  double prec = probes == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(probes);
  bool pass = seed_members == 2 && share >= c3_min_discovered && prec >= c3_min_precision;
  return {pass, fmt("2 seed hosts (rng_seed %llu), %zu test services: discovered %.4f (>= %.2f), "
                    "precision %.4f over %zu predictions (>= %.2f)",
                    static_cast<unsigned long long>(chosen), test_services.size(), share, c3_min_discovered, prec,
                    probes, c3_min_precision)};
}

// -- 4 ------------------------------------------------------------------------

Outcome bandwidth_dominance() {
  auto dir = reference_dir();
  auto regenerated = generate(load_synthetic_spec((dir / "synthetic_spec.json").string()));
  auto config = ConfigDocument::load((dir / "config.json").string()).resolve();
  auto committed = load_corpus(config.corpus_path, *config.universe);
  if (!(committed == regenerated.corpus))
    return {false, "committed corpus differs from its regeneration"};

  auto out = scratch("c4");
  auto r = run_to_directory(config, out.string());
  auto inputs = load_inputs(config);
  auto replay = replay_curve(inputs, config, out.string());
  std::ifstream curve_in(out / "curve.csv");
  if (replay != read_curve(curve_in))
    return {false, "replayed curve differs from curve.csv"};

  auto gps = probes_to_reach(r.curve, c4_target);
  auto base = probes_to_reach(r.baselines.port_order, c4_target);
  if (!gps || !base)
    return {false, fmt("target %.2f not reached (final %.4f)", c4_target, r.curve.back().fraction_services)};
  double ratio = *gps / *base;

  std::size_t violations = 0;
  for (const auto* curve : {&r.curve, &r.curve_with_seed})
    for (const auto& pt : *curve) {
      auto [f, n] = oracle_value_at(r.truth, pt.probes);
      violations += pt.fraction_services > f || pt.normalized_services > n + 1e-12;
    }
  bool pinned = std::abs(*gps - c4_pinned_probes) <= c4_pinned_rel_tol * c4_pinned_probes;
  fs::remove_all(out);
  return {ratio <= c4_max_ratio && violations == 0 && pinned,
          fmt("%.1f probes to %.0f%% vs %.4g for port order: ratio %.4f (<= %.2f); pinned %.1f %s; "
              "%zu oracle violations; replay equal; seed scan adds %.4g probes",
              *gps, c4_target * 100, *base, ratio, c4_max_ratio, c4_pinned_probes, pinned ? "matches" : "DIFFERS",
              violations, static_cast<double>(r.seed_scan.delta.probes))};
}

// -- 5 ------------------------------------------------------------------------

Outcome pseudo_filter() {
  std::vector<SyntheticSpec> specs;
  specs.push_back(load_synthetic_spec((reference_dir() / "synthetic_spec.json").string()));
  for (std::uint64_t s = 0; s < 4; ++s) {
    auto spec = specs.front();
    spec.rng_seed = 5000 + s;
    spec.pseudo_host_count = 10 + s * 5;
    spec.pseudo_ports_per_host = static_cast<std::uint32_t>(1001 + s * 700);
    specs.push_back(spec);
  }
  std::uint64_t pseudo = 0;
  std::uint64_t pseudo_removed = 0;
  std::uint64_t removed = 0;
  for (const auto& spec : specs) {
    auto g = generate(spec);
    auto kept = filter_pseudo_services(g.corpus);
    for (const auto& r : g.corpus.services()) {
      bool is_pseudo = g.origin(r.ip)->kind == HostOrigin::Kind::pseudo;
      bool gone = !kept.contains(r.ip, r.port);
      pseudo += is_pseudo;
      removed += gone;
      pseudo_removed += is_pseudo && gone;
    }
  }
  double recall = static_cast<double>(pseudo_removed) / static_cast<double>(pseudo);
  double prec = static_cast<double>(pseudo_removed) / static_cast<double>(removed);
  return {pseudo_removed == pseudo && prec >= c5_min_precision,
          fmt("%zu corpora, %llu pseudo services: recall %.6f (== 1), precision %.6f (>= %.2f, %llu removed)",
              specs.size(), static_cast<unsigned long long>(pseudo), recall, prec, c5_min_precision,
              static_cast<unsigned long long>(removed))};
}

// -- 6 ------------------------------------------------------------------------

Outcome metric_checks() {
  auto key = [](std::uint32_t ip, Port port) { return service_key(IPv4Address{ip}, port); };
  std::vector<ServiceKey> truth_keys;
  std::unordered_set<ServiceKey> found;
  for (std::uint32_t i = 0; i < 10; ++i) {
    truth_keys.push_back(key(i, 1));
    if (i < 5)
      found.insert(key(i, 1));
  }
  truth_keys.push_back(key(100, 2));
  truth_keys.push_back(key(101, 2));
  found.insert(key(100, 2));
  found.insert(key(101, 2));
  GroundTruth truth(truth_keys);
  std::vector<Port> ports{1, 2};
  double norm = normalized_services(found, truth, ports);
  double frac = fraction_services(found, truth);
  if (norm != 0.75 || frac != 7.0 / 12.0)
    return {false, fmt("hand example: normalized %.17g (want 0.75), fraction %.17g (want 7/12)", norm, frac)};

  std::mt19937_64 rng(6006);
  std::size_t largest = 0;
  for (int i = 0; i < c6_instances; ++i) {
    std::set<Pair> truth_pairs;
    std::set<Pair> found_pairs;
    auto nports = 1 + rng() % 40;
    auto n = 100 + rng() % (c6_max_services - 100);
    while (truth_pairs.size() < n)
      truth_pairs.insert({static_cast<std::uint32_t>(rng() % 20000), static_cast<Port>(1 + rng() % nports)});
    auto keep = 1 + rng() % 5;
    for (const auto& t : truth_pairs)
      if (rng() % keep == 0)
        found_pairs.insert(t);
    largest = std::max(largest, truth_pairs.size());
    std::vector<ServiceKey> keys;
    for (auto [ip, port] : truth_pairs)
      keys.push_back(key(ip, port));
    GroundTruth t(keys);
    std::unordered_set<ServiceKey> f;
    for (auto [ip, port] : found_pairs)
      f.insert(key(ip, port));
    auto tp = t.ports();
    if (fraction_services(f, t) != loop_fraction(found_pairs, truth_pairs) ||
        normalized_services(f, t, tp) != loop_normalized(found_pairs, truth_pairs, tp) ||
        optimal_port_order(t) != loop_port_order(truth_pairs))
      return {false, fmt("random instance %d disagrees with the loop oracle", i)};
  }
  return {true, fmt("0.75 and 7/12 hand examples exact; %d random instances (up to %zu services) exact",
                    c6_instances, largest)};
}

// -- 7 ------------------------------------------------------------------------

Outcome determinism() {
  auto config = ConfigDocument::load((reference_dir() / "config.json").string()).resolve();
  auto inputs = load_inputs(config);
  auto s = split(inputs.truth, config.seed_fraction, config.rng_seed);
  auto seed = inputs.truth.filter([&](const ServiceRecord& r) { return s.is_seed(r.ip); });
  ModelOptions options;
  options.features.net_kinds = config.net_kinds;
  options.features.asn = inputs.asn;
  options.min_support = config.min_support;
  options.partitions = 1;
  auto one = build_model(seed, options);
  options.partitions = 8;
  auto eight = build_model(seed, options);
  std::ostringstream a;
  std::ostringstream b;
  one.write(a);
  eight.write(b);
  if (!(one == eight) || a.str() != b.str())
    return {false, "partitions 1 and 8 produce different models"};

  auto dir = scratch("c7");
  run_to_directory(config, (dir / "first").string());
  run_to_directory(config, (dir / "second").string());
  std::string why;
  bool same = same_directories(dir / "first", dir / "second", why);
  std::size_t files = std::distance(fs::directory_iterator(dir / "first"), fs::directory_iterator{});
  fs::remove_all(dir);
  if (!same)
    return {false, "run directories differ: " + why};
  return {true, fmt("model of %zu entries identical at 1 and 8 partitions (%zu bytes); %zu artifacts identical "
                    "across two runs",
                    one.entry_count(), a.str().size(), files)};
}

// -- 8 ------------------------------------------------------------------------

SyntheticSpec throughput_spec() {
  SyntheticSpec spec;
  spec.universe = Subnet::parse("10.0.0.0/8");
  spec.rng_seed = 808;
  spec.noise_host_count = 40000;
  spec.noise_max_ports = 3;
  std::mt19937_64 rng(808);
  for (int i = 0; i < 16; ++i)
    spec.asn_blocks.push_back({Subnet(IPv4Address{0x0a000000u + (static_cast<std::uint32_t>(i) << 20)}, 12),
                               64512u + static_cast<std::uint32_t>(i)});
  const Port pool[] = {21, 22, 23, 25, 80, 443, 554, 1723, 2323, 3306, 5900, 7547, 8000, 8080, 8443, 8888, 9000, 49152};
  for (int t = 0; t < 60; ++t) {
    DeviceTemplate d;
    d.id = "bulk-" + std::to_string(t);
    std::set<Port> ports;
    while (ports.size() < static_cast<std::size_t>(3 + t % 3))
      ports.insert(pool[rng() % std::size(pool)]);
    d.port_set.assign(ports.begin(), ports.end());
    d.optional_ports[static_cast<Port>(10000 + t)] = 0.5;
    d.shared_features[FeatureKind::http_server] = "server-" + std::to_string(t % 20);
    d.shared_features[FeatureKind::ssh_banner] = "SSH-2.0-" + std::to_string(t % 15);
    d.subnet_clustering = {{Subnet(IPv4Address{0x0a000000u + (static_cast<std::uint32_t>(rng() % 256) << 16)}, 16), 1.0},
                           {Subnet(IPv4Address{0x0a000000u + (static_cast<std::uint32_t>(rng() % 256) << 16)}, 16), 0.5}};
    d.population = 4200;
    spec.templates.push_back(std::move(d));
  }
  return spec;
}

Outcome throughput() {
  auto g = generate(throughput_spec());
  const auto& seed = g.corpus;
  if (seed.size() < c8_min_services)
    return {false, fmt("seed has only %zu services", seed.size())};
  auto asn = std::make_shared<AsnTable>(g.asn);

  ModelOptions options;
  options.features.asn = asn;
  options.partitions = 1;
  auto t0 = std::chrono::steady_clock::now();
  auto model = build_model(seed, options);
  double build1 = seconds_since(t0);
  auto priors = build_priors_list(seed, model, 16);
  auto predictive = build_predictive_features(seed, model);
  std::vector<ServiceRecord> firsts;
  std::unordered_set<ServiceKey> known;
  for (const auto& h : seed.hosts()) {
    firsts.push_back(seed.host_services(h).front());
    known.insert(service_key(firsts.back()));
  }
  auto predictions = build_prediction_list(firsts, predictive, known, model.features());
  double single = seconds_since(t0);

  options.partitions = c8_partitions;
  auto t1 = std::chrono::steady_clock::now();
  auto parallel = build_model(seed, options);
  double build4 = seconds_since(t1);
  double speedup = build1 / build4;
  bool same = parallel == model;
  unsigned cores = std::thread::hardware_concurrency();
  bool pass = single < c8_seconds && speedup >= c8_min_speedup && same;
  return {pass, fmt("%zu services: build + plans %.1f s single-partition (< %.0f s; %zu priors, %zu predictions); "
                    "build %.1f s at 1 partition vs %.1f s at %u: speedup %.2fx (>= %.1fx) on %u hardware thread(s)%s",
                    seed.size(), single, c8_seconds, priors.size(), predictions.size(), build1, build4,
                    c8_partitions, speedup, c8_min_speedup, cores, same ? "" : "; MODELS DIFFER")};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> selected;
  app.add_option("-k,--criterion", selected, "Criterion number (repeatable)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
    {1, "probability oracle", probability_oracle},
    {2, "planner oracle", planner_oracle},
    {3, "two-example learnability", two_example_learnability},
    {4, "bandwidth dominance", bandwidth_dominance},
    {5, "pseudo-service filter", pseudo_filter},
    {6, "metric hand-checks", metric_checks},
    {7, "determinism and parallelism", determinism},
    {8, "throughput", throughput},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << "  " << c.title << ": " << o.detail
              << fmt(" [%.1f s]", seconds_since(t0)) << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
