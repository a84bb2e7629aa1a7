// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "gps/model.hpp"

#include "gps/error.hpp"
#include "model_impl.hpp"
#include "parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

namespace gps {

std::string_view name(ConditionClass cls) {
  switch (cls) {
    case ConditionClass::port_only:
      return "port_only";
    case ConditionClass::port_app:
      return "port_app";
    case ConditionClass::port_net:
      return "port_net";
    case ConditionClass::port_app_net:
      return "port_app_net";
  }
  return "unknown";
}

std::optional<ConditionClass> condition_class_from_name(std::string_view n) {
  for (auto c : {ConditionClass::port_only, ConditionClass::port_app, ConditionClass::port_net,
                 ConditionClass::port_app_net})
    if (name(c) == n)
      return c;
  return std::nullopt;
}

std::string Condition::to_string() const {
  std::string out = "(" + std::to_string(port_b);
  if (app)
    out += ", " + std::string(name(app->kind)) + "=\"" + app->value + "\"";
  if (net)
    out += ", " + std::string(name(net->kind)) + "=" + net->value;
  return out + ")";
}

std::size_t ConditionHash::operator()(const Condition& c) const noexcept {
  std::uint64_t h = hash_mix(static_cast<std::uint64_t>(c.cls), c.port_b);
  auto fold = [&](const std::optional<FeatureValue>& v) {
    if (!v)
      return;
    h = hash_mix(h, static_cast<std::uint64_t>(v->kind));
    h = hash_mix(h, std::hash<std::string>{}(v->value));
  };
  fold(c.app);
  fold(c.net);
  return static_cast<std::size_t>(h);
}

std::vector<Condition> derive_conditions(const ServiceRecord& service,
                                         std::span<const FeatureValue> app_values,
                                         std::span<const FeatureValue> net_values) {
  std::vector<Condition> out;
  out.reserve(1 + app_values.size() + net_values.size() + app_values.size() * net_values.size());
  out.push_back(Condition::port_only(service.port));
  for (const auto& a : app_values)
    out.push_back(Condition::port_app(service.port, a));
  for (const auto& n : net_values)
    out.push_back(Condition::port_net(service.port, n));
  for (const auto& a : app_values)
    for (const auto& n : net_values)
      out.push_back(Condition::port_app_net(service.port, a, n));
  return out;
}

namespace {

int compare_net(const std::optional<FeatureValue>& x, const std::optional<FeatureValue>& y) {
  if (!x || !y)
    return static_cast<int>(x.has_value()) - static_cast<int>(y.has_value());
  auto nx = parse_net_feature(*x);
  auto ny = parse_net_feature(*y);
  if (nx < ny)
    return -1;
  return ny < nx ? 1 : 0;
}

int compare_app(const std::optional<FeatureValue>& x, const std::optional<FeatureValue>& y) {
  if (!x || !y)
    return static_cast<int>(x.has_value()) - static_cast<int>(y.has_value());
  if (*x < *y)
    return -1;
  return *y < *x ? 1 : 0;
}

/// 1 when x ranks before y on the numeric part of the order, -1 when after,
/// 0 when tied.
int compare_scores(CountPair x, Port xport, ConditionClass xcls, CountPair y, Port yport,
                   ConditionClass ycls) {
  auto lhs = static_cast<std::uint64_t>(x.joint_hosts) * y.cond_hosts;
  auto rhs = static_cast<std::uint64_t>(y.joint_hosts) * x.cond_hosts;
  if (lhs != rhs)
    return lhs > rhs ? 1 : -1;
  if (x.cond_hosts != y.cond_hosts)
    return x.cond_hosts > y.cond_hosts ? 1 : -1;
  if (xport != yport)
    return xport < yport ? 1 : -1;
  if (xcls != ycls)
    return class_preference(xcls) > class_preference(ycls) ? 1 : -1;
  return 0;
}

} // namespace

bool better_condition(const ScoredCondition& x, const ScoredCondition& y) {
  auto c = compare_scores(x.counts, x.condition.port_b, x.condition.cls, y.counts,
                          y.condition.port_b, y.condition.cls);
  if (c != 0)
    return c > 0;
  if (auto a = compare_app(x.condition.app, y.condition.app); a != 0)
    return a < 0;
  return compare_net(x.condition.net, y.condition.net) < 0;
}

// -- Impl --------------------------------------------------------------------

std::uint32_t CoOccurrenceModel::Impl::intern(const FeatureValue& v) {
  auto [it, inserted] =
    app_ids.try_emplace(intern_key(v.kind, v.value), static_cast<std::uint32_t>(app_values.size() + 1));
  if (inserted)
    app_values.push_back(v);
  return it->second;
}

std::uint32_t CoOccurrenceModel::Impl::find_app(const FeatureValue& v) const {
  auto it = app_ids.find(intern_key(v.kind, v.value));
  return it == app_ids.end() ? 0 : it->second;
}

void CoOccurrenceModel::Impl::rank_app_values() {
  std::vector<std::uint32_t> order(app_values.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t x, std::uint32_t y) { return app_values[x] < app_values[y]; });
  app_rank.assign(app_values.size() + 1, 0);
  for (std::uint32_t r = 0; r < order.size(); ++r)
    app_rank[order[r] + 1] = r + 1;
}

std::vector<ServiceKeys> CoOccurrenceModel::Impl::host_keys(std::span<const ServiceRecord> services) const {
  std::vector<ServiceKeys> out;
  if (services.empty())
    return out;
  auto nets = extract_net_values(services.front().ip, features.net_kinds, *features.asn);
  out.reserve(services.size());
  std::vector<std::uint32_t> apps;
  for (const auto& s : services) {
    apps.clear();
    for (const auto& v : extract_app_features(s, features.app_kinds))
      if (auto id = find_app(v))
        apps.push_back(id);
    ServiceKeys sk;
    sk.port = s.port;
    sk.keys.reserve(1 + apps.size() + nets.size() + apps.size() * nets.size());
    sk.keys.push_back({0, 0, s.port, ConditionClass::port_only, no_net_kind});
    for (auto a : apps)
      sk.keys.push_back({a, 0, s.port, ConditionClass::port_app, no_net_kind});
    for (auto n : nets)
      sk.keys.push_back({0, n.value, s.port, ConditionClass::port_net, static_cast<std::uint8_t>(n.kind)});
    for (auto a : apps)
      for (auto n : nets)
        sk.keys.push_back(
          {a, n.value, s.port, ConditionClass::port_app_net, static_cast<std::uint8_t>(n.kind)});
    out.push_back(std::move(sk));
  }
  return out;
}

std::optional<CountPair> CoOccurrenceModel::Impl::lookup(const CondKey& key, Port target) const {
  auto it = row_index.find(key);
  if (it == row_index.end())
    return std::nullopt;
  const auto& row = rows[it->second];
  auto first = targets.begin() + row.target_begin;
  auto last = targets.begin() + row.target_end;
  auto t = std::lower_bound(first, last, target, [](const Target& x, Port p) { return x.port < p; });
  if (t == last || t->port != target)
    return std::nullopt;
  return CountPair{t->joint_hosts, row.cond_hosts};
}

bool CoOccurrenceModel::Impl::better(const KeyCandidate& x, const KeyCandidate& y) const {
  auto c = compare_scores(x.counts, x.key.port, x.key.cls, y.counts, y.key.port, y.key.cls);
  if (c != 0)
    return c > 0;
  if (x.key.app != y.key.app)
    return app_rank[x.key.app] < app_rank[y.key.app];
  if (x.key.net_kind != y.key.net_kind)
    return x.key.net_kind < y.key.net_kind;
  return x.key.net < y.key.net;
}

std::optional<KeyCandidate> CoOccurrenceModel::Impl::best_among(std::span<const ServiceKeys> host,
                                                                Port target) const {
  std::optional<KeyCandidate> best;
  for (const auto& sk : host) {
    if (sk.port == target)
      continue;
    for (const auto& key : sk.keys) {
      auto counts = lookup(key, target);
      if (!counts)
        continue;
      KeyCandidate cand{key, *counts};
      if (!best || better(cand, *best))
        best = cand;
    }
  }
  return best;
}

Condition CoOccurrenceModel::Impl::materialize(const CondKey& key) const {
  Condition c;
  c.cls = key.cls;
  c.port_b = key.port;
  if (key.app)
    c.app = app_values[key.app - 1];
  if (key.net_kind != no_net_kind)
    c.net = to_feature_value({static_cast<FeatureKind>(key.net_kind), key.net});
  return c;
}

std::optional<CondKey> CoOccurrenceModel::Impl::key_of(const Condition& c) const {
  CondKey key;
  key.cls = c.cls;
  key.port = c.port_b;
  bool wants_app = c.cls == ConditionClass::port_app || c.cls == ConditionClass::port_app_net;
  bool wants_net = c.cls == ConditionClass::port_net || c.cls == ConditionClass::port_app_net;
  if (wants_app != c.app.has_value() || wants_net != c.net.has_value())
    throw Error(Errc::invalid_argument, "condition " + c.to_string() + " does not match its class");
  if (c.app) {
    key.app = find_app(*c.app);
    if (!key.app)
      return std::nullopt;
  }
  if (c.net) {
    auto n = parse_net_feature(*c.net);
    key.net_kind = static_cast<std::uint8_t>(n.kind);
    key.net = n.value;
  }
  return key;
}

bool CoOccurrenceModel::Impl::canonical_less(const CondKey& x, const CondKey& y) const {
  if (x.port != y.port)
    return x.port < y.port;
  if (x.cls != y.cls)
    return x.cls < y.cls;
  if (x.app != y.app)
    return app_rank[x.app] < app_rank[y.app];
  if (x.net_kind != y.net_kind)
    return x.net_kind < y.net_kind;
  return x.net < y.net;
}

void CoOccurrenceModel::Impl::finalize(
  std::vector<std::tuple<CondKey, std::uint32_t, std::vector<Target>>> grouped) {
  rank_app_values();
  std::sort(grouped.begin(), grouped.end(), [&](const auto& x, const auto& y) {
    return canonical_less(std::get<0>(x), std::get<0>(y));
  });
  rows.clear();
  row_keys.clear();
  targets.clear();
  row_index.clear();
  rows.reserve(grouped.size());
  row_keys.reserve(grouped.size());
  row_index.reserve(grouped.size());
  for (auto& [key, cond_hosts, ts] : grouped) {
    std::sort(ts.begin(), ts.end(), [](const Target& x, const Target& y) { return x.port < y.port; });
    Row row;
    row.condition = materialize(key);
    row.cond_hosts = cond_hosts;
    row.target_begin = static_cast<std::uint32_t>(targets.size());
    targets.insert(targets.end(), ts.begin(), ts.end());
    row.target_end = static_cast<std::uint32_t>(targets.size());
    row_index.emplace(key, static_cast<std::uint32_t>(rows.size()));
    rows.push_back(std::move(row));
    row_keys.push_back(key);
  }
}

// -- CoOccurrenceModel -------------------------------------------------------

CoOccurrenceModel::CoOccurrenceModel() : impl_(std::make_unique<Impl>()) {}
CoOccurrenceModel::CoOccurrenceModel(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
CoOccurrenceModel::CoOccurrenceModel(const CoOccurrenceModel& o)
    : impl_(std::make_unique<Impl>(*o.impl_)) {}
CoOccurrenceModel::CoOccurrenceModel(CoOccurrenceModel&&) noexcept = default;
CoOccurrenceModel& CoOccurrenceModel::operator=(const CoOccurrenceModel& o) {
  if (this != &o)
    impl_ = std::make_unique<Impl>(*o.impl_);
  return *this;
}
CoOccurrenceModel& CoOccurrenceModel::operator=(CoOccurrenceModel&&) noexcept = default;
CoOccurrenceModel::~CoOccurrenceModel() = default;

std::optional<CountPair> CoOccurrenceModel::counts(const Condition& cond, Port target) const {
  auto key = impl_->key_of(cond);
  if (!key)
    return std::nullopt;
  return impl_->lookup(*key, target);
}

std::optional<double> CoOccurrenceModel::probability(const Condition& cond, Port target) const {
  if (auto c = counts(cond, target))
    return c->probability();
  return std::nullopt;
}

std::optional<ScoredCondition> CoOccurrenceModel::best_condition_for(
  std::span<const ServiceRecord> host_services, Port target) const {
  auto keys = impl_->host_keys(host_services);
  auto best = impl_->best_among(keys, target);
  if (!best)
    return std::nullopt;
  return ScoredCondition{impl_->materialize(best->key), best->counts};
}

std::span<const CoOccurrenceModel::Row> CoOccurrenceModel::rows() const {
  return impl_->rows;
}

std::span<const CoOccurrenceModel::Target> CoOccurrenceModel::targets(const Row& row) const {
  return std::span<const Target>(impl_->targets).subspan(row.target_begin, row.target_end - row.target_begin);
}

std::size_t CoOccurrenceModel::entry_count() const {
  return impl_->targets.size();
}

const FeatureConfig& CoOccurrenceModel::features() const {
  return impl_->features;
}

std::uint32_t CoOccurrenceModel::min_support() const {
  return impl_->min_support;
}

const std::string& CoOccurrenceModel::built_from() const {
  return impl_->built_from;
}

bool operator==(const CoOccurrenceModel& x, const CoOccurrenceModel& y) {
  const auto& a = *x.impl_;
  const auto& b = *y.impl_;
  if (a.min_support != b.min_support || a.built_from != b.built_from ||
      a.features.app_kinds != b.features.app_kinds || a.features.net_kinds != b.features.net_kinds ||
      a.rows.size() != b.rows.size() || a.targets != b.targets)
    return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& r = a.rows[i];
    const auto& s = b.rows[i];
    if (r.condition != s.condition || r.cond_hosts != s.cond_hosts ||
        r.target_begin != s.target_begin || r.target_end != s.target_end)
      return false;
  }
  return true;
}

// -- build -------------------------------------------------------------------

namespace {

struct JointKey {
  CondKey cond;
  Port target = 0;
  friend bool operator==(const JointKey&, const JointKey&) = default;
};

struct JointKeyHash {
  std::size_t operator()(const JointKey& k) const noexcept {
    return static_cast<std::size_t>(hash_mix(CondKeyHash{}(k.cond), k.target));
  }
};

using CondCounts = std::unordered_map<CondKey, std::uint32_t, CondKeyHash>;
using JointCounts = std::unordered_map<JointKey, std::uint32_t, JointKeyHash>;

std::string seed_fingerprint(const Corpus& seed) {
  std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
  for (const auto& r : seed.services()) {
    auto k = service_key(r);
    for (int i = 0; i < 6; ++i) {
      h ^= (k >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
  }
  char buf[17];
  static constexpr char hex[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i, h >>= 4)
    buf[i] = hex[h & 0xf];
  buf[16] = '\0';
  return "seed:" + std::to_string(seed.size()) + ":" + buf;
}

} // namespace

CoOccurrenceModel build_model(const Corpus& seed, const ModelOptions& options) {
  if (options.partitions < 1)
    throw Error(Errc::invalid_argument, "partitions must be >= 1");
  if (!options.features.asn)
    throw Error(Errc::invalid_argument, "feature config has no ASN table");
  auto impl = std::make_unique<CoOccurrenceModel::Impl>();
  impl->features = options.features;
  impl->features.net_kinds = options.features.net_kinds & FeatureKindSet::all_network();
  impl->features.app_kinds = options.features.app_kinds & FeatureKindSet::all_app();
  impl->min_support = options.min_support;
  impl->built_from = seed_fingerprint(seed);

  for (const auto& r : seed.services())
    for (const auto& v : extract_app_features(r, impl->features.app_kinds))
      impl->intern(v);

  const auto hosts = seed.hosts();
  const auto parts = static_cast<std::size_t>(options.partitions);
  auto chunk = [&](std::size_t p) {
    return std::pair{hosts.size() * p / parts, hosts.size() * (p + 1) / parts};
  };
  const auto& model = *impl;

  // Pass 1: hosts exhibiting each condition.
  std::vector<CondCounts> cond_parts(parts);
  parallel_for(parts, [&](std::size_t p) {
    auto [lo, hi] = chunk(p);
    auto& local = cond_parts[p];
    for (auto h = lo; h < hi; ++h)
      for (const auto& sk : model.host_keys(seed.host_services(hosts[h])))
        for (const auto& key : sk.keys)
          ++local[key];
  });
  CondCounts cond = std::move(cond_parts[0]);
  for (std::size_t p = 1; p < parts; ++p) {
    for (const auto& [key, n] : cond_parts[p])
      cond[key] += n;
    CondCounts().swap(cond_parts[p]);
  }
  const auto min_support = options.min_support;

  // Pass 2: ordered port pairs on multi-service hosts, supported conditions only.
  std::vector<JointCounts> joint_parts(parts);
  parallel_for(parts, [&](std::size_t p) {
    auto [lo, hi] = chunk(p);
    auto& local = joint_parts[p];
    for (auto h = lo; h < hi; ++h) {
      auto services = seed.host_services(hosts[h]);
      if (services.size() < 2)
        continue;
      auto keys = model.host_keys(services);
      for (const auto& b : keys) {
        for (const auto& key : b.keys) {
          if (cond.find(key)->second < min_support)
            continue;
          for (const auto& a : keys)
            if (a.port != b.port)
              ++local[JointKey{key, a.port}];
        }
      }
    }
  });
  JointCounts joint = std::move(joint_parts[0]);
  for (std::size_t p = 1; p < parts; ++p) {
    for (const auto& [key, n] : joint_parts[p])
      joint[key] += n;
    JointCounts().swap(joint_parts[p]);
  }

  std::unordered_map<CondKey, std::vector<CoOccurrenceModel::Target>, CondKeyHash> by_cond;
  for (const auto& [key, n] : joint)
    by_cond[key.cond].push_back({key.target, n});
  JointCounts().swap(joint);
  std::vector<std::tuple<CondKey, std::uint32_t, std::vector<CoOccurrenceModel::Target>>> grouped;
  grouped.reserve(by_cond.size());
  for (auto& [key, ts] : by_cond)
    grouped.emplace_back(key, cond.find(key)->second, std::move(ts));
  impl->finalize(std::move(grouped));
  return CoOccurrenceModel(std::move(impl));
}

// -- network feature ranking -------------------------------------------------

std::vector<std::pair<FeatureKind, double>> rank_net_features(const CoOccurrenceModel& model,
                                                              const Corpus& seed) {
  const auto& impl = model.impl();
  if (impl.features.net_kinds.empty())
    throw Error(Errc::unavailable, "model was built without network feature candidates");
  std::map<FeatureKind, std::uint64_t> wins;
  std::uint64_t total = 0;
  for (const auto& host : seed.hosts()) {
    auto services = seed.host_services(host);
    if (services.size() < 2)
      continue;
    auto keys = impl.host_keys(services);
    for (const auto& s : services) {
      auto best = impl.best_among(keys, s.port);
      if (!best || best->key.net_kind == no_net_kind)
        continue;
      ++wins[static_cast<FeatureKind>(best->key.net_kind)];
      ++total;
    }
  }
  std::vector<std::pair<FeatureKind, double>> out;
  for (auto [kind, n] : wins)
    out.emplace_back(kind, static_cast<double>(n) / static_cast<double>(total));
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return out;
}

// -- serialization -----------------------------------------------------------

namespace {

nlohmann::json kinds_json(FeatureKindSet set) {
  auto arr = nlohmann::json::array();
  for (auto k : set.to_vector())
    arr.push_back(std::string(name(k)));
  return arr;
}

FeatureKindSet kinds_from_json(const nlohmann::json& arr) {
  FeatureKindSet set;
  for (const auto& v : arr) {
    auto k = kind_from_name(v.get<std::string>());
    if (!k)
      throw Error(Errc::parse, "unknown feature kind '" + v.get<std::string>() + "'");
    set.insert(*k);
  }
  return set;
}

FeatureValue value_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2)
    throw Error(Errc::parse, "feature value must be [kind, value]");
  auto k = kind_from_name(j[0].get<std::string>());
  if (!k)
    throw Error(Errc::parse, "unknown feature kind '" + j[0].get<std::string>() + "'");
  return {*k, j[1].get<std::string>()};
}

} // namespace

void CoOccurrenceModel::write(std::ostream& out) const {
  const auto& m = *impl_;
  nlohmann::ordered_json header;
  header["format"] = "gps-model";
  header["version"] = 1;
  header["built_from"] = m.built_from;
  header["min_support"] = m.min_support;
  header["app_kinds"] = kinds_json(m.features.app_kinds);
  header["net_kinds"] = kinds_json(m.features.net_kinds);
  header["rows"] = m.rows.size();
  header["entries"] = m.targets.size();
  out << header.dump() << '\n';
  for (const auto& row : m.rows) {
    nlohmann::ordered_json j;
    j["class"] = std::string(name(row.condition.cls));
    j["port"] = row.condition.port_b;
    if (row.condition.app)
      j["app"] = {std::string(name(row.condition.app->kind)), row.condition.app->value};
    if (row.condition.net)
      j["net"] = {std::string(name(row.condition.net->kind)), row.condition.net->value};
    j["cond_hosts"] = row.cond_hosts;
    auto ts = nlohmann::ordered_json::array();
    for (const auto& t : targets(row))
      ts.push_back({t.port, t.joint_hosts});
    j["targets"] = std::move(ts);
    out << j.dump() << '\n';
  }
}

CoOccurrenceModel CoOccurrenceModel::read(std::istream& in, std::shared_ptr<const AsnTable> asn) {
  auto impl = std::make_unique<Impl>();
  if (asn)
    impl->features.asn = std::move(asn);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::tuple<CondKey, std::uint32_t, std::vector<Target>>> grouped;
  try {
    if (!std::getline(in, line))
      throw Error(Errc::parse, "empty model file");
    ++line_no;
    auto header = nlohmann::json::parse(line);
    if (header.at("format") != "gps-model" || header.at("version") != 1)
      throw Error(Errc::parse, "not a version 1 gps-model file");
    impl->built_from = header.at("built_from").get<std::string>();
    impl->min_support = header.at("min_support").get<std::uint32_t>();
    impl->features.app_kinds = kinds_from_json(header.at("app_kinds"));
    impl->features.net_kinds = kinds_from_json(header.at("net_kinds"));
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty())
        continue;
      auto j = nlohmann::json::parse(line);
      auto cls = condition_class_from_name(j.at("class").get<std::string>());
      if (!cls)
        throw Error(Errc::parse, "unknown condition class");
      Condition c;
      c.cls = *cls;
      c.port_b = j.at("port").get<Port>();
      if (j.contains("app"))
        c.app = value_from_json(j["app"]);
      if (j.contains("net"))
        c.net = value_from_json(j["net"]);
      if (c.app)
        impl->intern(*c.app);
      auto key = impl->key_of(c);
      std::vector<Target> ts;
      for (const auto& t : j.at("targets"))
        ts.push_back({t.at(0).get<Port>(), t.at(1).get<std::uint32_t>()});
      grouped.emplace_back(*key, j.at("cond_hosts").get<std::uint32_t>(), std::move(ts));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, "model line " + std::to_string(line_no) + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), "model line " + std::to_string(line_no) + ": " + e.what());
  }
  impl->finalize(std::move(grouped));
  return CoOccurrenceModel(std::move(impl));
}

} // namespace gps
