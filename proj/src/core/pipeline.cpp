// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "gps/pipeline.hpp"

#include "gps/error.hpp"
#include "gps/synthetic.hpp"
#include "parallel.hpp"
#include "text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace gps {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// -- PipelineConfig -------------------------------------------------------------

void PipelineConfig::validate() const {
  auto bad = [](const std::string& key, const std::string& why) {
    throw Error(Errc::invalid_argument, "config '" + key + "': " + why);
  };
  if (corpus_path.empty() == synthetic_spec_path.empty())
    bad("corpus", "exactly one of corpus.path and corpus.synthetic is required");
  if (!corpus_path.empty() && !universe)
    bad("universe", "required with corpus.path");
  if (!(seed_fraction > 0 && seed_fraction < 1))
    bad("seed_fraction", "must lie in (0, 1)");
  if (step_prefix < 0 || step_prefix > 32)
    bad("step_prefix", "must lie in [0, 32]");
  if (!(probability_floor > 0 && probability_floor <= 1))
    bad("probability_floor", "must lie in (0, 1]");
  if (min_support < 1)
    bad("min_support", "must be >= 1");
  if (min_ips < 1)
    bad("min_ips", "must be >= 1");
  if (partitions < 1 || partitions > 256)
    bad("partitions", "must lie in [1, 256]");
  if (curve_every < 1)
    bad("curve_every", "must be >= 1");
  if (filter.max_services_per_host < 1)
    bad("filter.max_services_per_host", "must be >= 1");
  if ((net_kinds & FeatureKindSet::all_network()) != net_kinds)
    bad("net_kinds", "must name network kinds only");
  if ((app_kinds & FeatureKindSet::all_app()) != app_kinds)
    bad("app_kinds", "must name application kinds only");
}

// -- ConfigDocument ---------------------------------------------------------------

struct ConfigDocument::Impl {
  json doc = json::object();
  std::string base_dir = ".";
};

ConfigDocument::ConfigDocument() : impl_(std::make_unique<Impl>()) {}
ConfigDocument::ConfigDocument(const ConfigDocument& o) : impl_(std::make_unique<Impl>(*o.impl_)) {}
ConfigDocument& ConfigDocument::operator=(const ConfigDocument& o) {
  if (this != &o)
    impl_ = std::make_unique<Impl>(*o.impl_);
  return *this;
}
ConfigDocument::~ConfigDocument() = default;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::io, "file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(Errc::io, "cannot write " + path.string());
  return out;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
    "corpus", "corpus.path", "corpus.synthetic", "universe", "asn_table", "seed_fraction", "step_prefix",
    "probability_floor", "min_support", "min_ips", "net_kinds", "app_kinds", "seed_ports",
    "budgets.priors", "budgets.predictions", "rng_seed", "partitions", "filter.enabled",
    "filter.max_services_per_host", "filter.keep_representative", "filter.dynamic_fields",
    "restrict_truth", "curve_every", "output_dir", "sweep.seed_fractions", "sweep.step_prefixes"};
  return keys;
}

void check_keys(const json& j, const std::string& prefix) {
  for (const auto& [k, v] : j.items()) {
    auto key = prefix.empty() ? k : prefix + "." + k;
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) != keys.end() && !v.is_object())
      continue;
    if (v.is_object()) {
      bool parent = std::any_of(keys.begin(), keys.end(),
                                [&](const std::string& s) { return s.rfind(key + ".", 0) == 0; });
      if (parent) {
        check_keys(v, key);
        continue;
      }
    }
    throw Error(Errc::invalid_argument, "unknown config key '" + key + "'");
  }
}

const json* find_key(const json& doc, const std::string& key) {
  const json* cur = &doc;
  std::size_t start = 0;
  while (true) {
    auto dot = key.find('.', start);
    auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object() || !cur->contains(part))
      return nullptr;
    cur = &(*cur)[part];
    if (dot == std::string::npos)
      return cur;
    start = dot + 1;
  }
}

std::string resolve_path(const std::string& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute())
    return p;
  return (fs::path(base) / p).lexically_normal().string();
}

FeatureKindSet kinds_value(const json& j, const std::string& key, FeatureKindSet all) {
  if (j.is_string() && j.get<std::string>() == "all")
    return all;
  if (!j.is_array())
    throw Error(Errc::invalid_argument, "config '" + key + "': expected a list of feature kinds");
  FeatureKindSet set;
  for (const auto& v : j) {
    auto k = v.is_string() ? kind_from_name(v.get<std::string>()) : std::nullopt;
    if (!k)
      throw Error(Errc::invalid_argument, "config '" + key + "': unknown feature kind " + v.dump());
    set.insert(*k);
  }
  return set;
}

ProbeBudget budget_value(const json& j, const std::string& key) {
  if (j.is_null() || (j.is_string() && j.get<std::string>() == "unlimited"))
    return std::nullopt;
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw Error(Errc::invalid_argument, "config '" + key + "': expected a probe count or null");
  return j.get<std::uint64_t>();
}

json kinds_json(FeatureKindSet set) {
  auto arr = json::array();
  for (auto k : set.to_vector())
    arr.push_back(std::string(name(k)));
  return arr;
}

} // namespace

ConfigDocument ConfigDocument::load(const std::string& path) {
  auto doc = parse(read_file(path), fs::path(path).parent_path().string());
  return doc;
}

ConfigDocument ConfigDocument::parse(const std::string& text, const std::string& base_dir) {
  ConfigDocument d;
  try {
    d.impl_->doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("config: ") + e.what());
  }
  if (!d.impl_->doc.is_object())
    throw Error(Errc::parse, "config: top level must be an object");
  d.impl_->base_dir = base_dir.empty() ? "." : base_dir;
  check_keys(d.impl_->doc, "");
  return d;
}

void ConfigDocument::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw Error(Errc::invalid_argument, "unknown config key '" + key + "'");
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;
  }
  // Paths given on the command line are relative to the working directory.
  static const char* path_keys[] = {"corpus", "corpus.path", "corpus.synthetic", "asn_table", "output_dir"};
  if (parsed.is_string() && std::find(std::begin(path_keys), std::end(path_keys), key) != std::end(path_keys) &&
      !parsed.get<std::string>().empty())
    parsed = fs::absolute(parsed.get<std::string>()).lexically_normal().string();
  json* cur = &impl_->doc;
  std::size_t start = 0;
  while (true) {
    auto dot = key.find('.', start);
    auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty())
      throw Error(Errc::invalid_argument, "bad config key '" + key + "'");
    if (dot == std::string::npos) {
      (*cur)[part] = std::move(parsed);
      break;
    }
    auto& next = (*cur)[part];
    if (!next.is_object())
      next = json::object();
    cur = &next;
    start = dot + 1;
  }
}

PipelineConfig ConfigDocument::resolve() const {
  const auto& doc = impl_->doc;
  const auto& base = impl_->base_dir;
  check_keys(doc, "");
  PipelineConfig c;
  auto get = [&](const std::string& key) { return find_key(doc, key); };
  auto typed = [&](const std::string& key, auto& out) {
    if (const auto* j = get(key); j && !j->is_null()) {
      try {
        j->get_to(out);
      } catch (const json::exception&) {
        throw Error(Errc::invalid_argument, "config '" + key + "': wrong type " + j->dump());
      }
    }
  };
  try {
    if (const auto* j = get("corpus"); j && j->is_string())
      c.corpus_path = resolve_path(base, j->get<std::string>());
    std::string path;
    typed("corpus.path", path);
    if (!path.empty())
      c.corpus_path = resolve_path(base, path);
    path.clear();
    typed("corpus.synthetic", path);
    if (!path.empty())
      c.synthetic_spec_path = resolve_path(base, path);
    std::string text;
    typed("universe", text);
    if (!text.empty()) {
      auto s = Subnet::try_parse(text);
      if (!s)
        throw Error(Errc::invalid_argument, "config 'universe': bad subnet '" + text + "'");
      c.universe = *s;
    }
    path.clear();
    typed("asn_table", path);
    c.asn_table_path = resolve_path(base, path);
    typed("seed_fraction", c.seed_fraction);
    typed("step_prefix", c.step_prefix);
    typed("probability_floor", c.probability_floor);
    typed("min_support", c.min_support);
    typed("min_ips", c.min_ips);
    if (const auto* j = get("net_kinds"))
      c.net_kinds = kinds_value(*j, "net_kinds", FeatureKindSet::all_network());
    if (const auto* j = get("app_kinds"))
      c.app_kinds = kinds_value(*j, "app_kinds", FeatureKindSet::all_app());
    if (const auto* j = get("seed_ports"); j && !(j->is_string() && j->get<std::string>() == "all"))
      typed("seed_ports", c.seed_ports);
    if (const auto* j = get("budgets.priors"))
      c.priors_budget = budget_value(*j, "budgets.priors");
    if (const auto* j = get("budgets.predictions"))
      c.prediction_budget = budget_value(*j, "budgets.predictions");
    typed("rng_seed", c.rng_seed);
    typed("partitions", c.partitions);
    typed("filter.enabled", c.filter_enabled);
    typed("filter.max_services_per_host", c.filter.max_services_per_host);
    typed("filter.keep_representative", c.filter.keep_representative);
    if (const auto* j = get("filter.dynamic_fields")) {
      if (!j->is_array())
        throw Error(Errc::invalid_argument, "config 'filter.dynamic_fields': expected a list");
      c.filter.dynamic_fields.clear();
      auto defaults = default_dynamic_fields();
      for (const auto& f : *j) {
        if (f.is_string()) {
          auto it = std::find_if(defaults.begin(), defaults.end(),
                                 [&](const DynamicField& d) { return d.name == f.get<std::string>(); });
          if (it == defaults.end())
            throw Error(Errc::invalid_argument,
                        "config 'filter.dynamic_fields': unknown field '" + f.get<std::string>() + "'");
          c.filter.dynamic_fields.push_back(*it);
        } else {
          c.filter.dynamic_fields.push_back(
            {f.at("name").get<std::string>(), f.at("pattern").get<std::string>()});
        }
      }
    }
    typed("restrict_truth", c.restrict_truth);
    typed("curve_every", c.curve_every);
    path.clear();
    typed("output_dir", path);
    if (!path.empty())
      c.output_dir = resolve_path(base, path);
    typed("sweep.seed_fractions", c.sweep_seed_fractions);
    typed("sweep.step_prefixes", c.sweep_step_prefixes);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string ConfigDocument::dump() const {
  return impl_->doc.dump(2);
}

// -- inputs -----------------------------------------------------------------------

PipelineInputs make_inputs(Corpus raw, std::shared_ptr<const AsnTable> asn, const PipelineConfig& config) {
  PipelineInputs in;
  in.truth = config.filter_enabled ? filter_pseudo_services(raw, config.filter) : raw;
  in.pseudo_removed = raw.size() - in.truth.size();
  in.raw = std::move(raw);
  in.asn = asn ? std::move(asn) : std::make_shared<AsnTable>();
  return in;
}

PipelineInputs load_inputs(const PipelineConfig& config) {
  config.validate();
  std::shared_ptr<const AsnTable> asn;
  Corpus raw;
  if (!config.synthetic_spec_path.empty()) {
    auto spec = load_synthetic_spec(config.synthetic_spec_path);
    if (config.universe && *config.universe != spec.universe)
      throw Error(Errc::invalid_argument, "config 'universe' disagrees with the synthetic spec");
    auto gen = generate(spec);
    raw = std::move(gen.corpus);
    asn = std::make_shared<AsnTable>(std::move(gen.asn));
  } else {
    raw = load_corpus(config.corpus_path, *config.universe);
  }
  if (!config.asn_table_path.empty())
    asn = std::make_shared<AsnTable>(AsnTable::load(config.asn_table_path));
  return make_inputs(std::move(raw), std::move(asn), config);
}

// -- run ----------------------------------------------------------------------------

namespace {

json ledger_json(const BandwidthLedger& ledger) {
  json j = json::object();
  j["probes_per_full_scan"] = ledger.probes_per_full_scan();
  json phases = json::object();
  for (auto p : {Phase::seed, Phase::priors, Phase::predictions}) {
    const auto& c = ledger.counts(p);
    phases[std::string(name(p))] = {{"probes", c.probes},
                                    {"responses", c.responses},
                                    {"full_scan_units", ledger.full_scan_units(c.probes)}};
  }
  j["phases"] = std::move(phases);
  j["total_probes"] = ledger.total_probes();
  j["total_responses"] = ledger.total_responses();
  j["total_full_scan_units"] = ledger.full_scan_units(ledger.total_probes());
  return j;
}

json config_json(const PipelineConfig& c) {
  json j = json::object();
  j["seed_fraction"] = c.seed_fraction;
  j["step_prefix"] = c.step_prefix;
  j["probability_floor"] = c.probability_floor;
  j["min_support"] = c.min_support;
  j["min_ips"] = c.min_ips;
  j["net_kinds"] = kinds_json(c.net_kinds);
  j["app_kinds"] = kinds_json(c.app_kinds);
  if (c.seed_ports.empty())
    j["seed_ports"] = "all";
  else
    j["seed_ports"] = c.seed_ports;
  j["budgets"] = {{"priors", c.priors_budget ? json(*c.priors_budget) : json(nullptr)},
                  {"predictions", c.prediction_budget ? json(*c.prediction_budget) : json(nullptr)}};
  j["rng_seed"] = c.rng_seed;
  j["partitions"] = c.partitions;
  j["filter"] = {{"enabled", c.filter_enabled},
                 {"max_services_per_host", c.filter.max_services_per_host},
                 {"keep_representative", c.filter.keep_representative}};
  j["restrict_truth"] = c.restrict_truth;
  j["curve_every"] = c.curve_every;
  return j;
}

/// Tags errors with the phase that raised them.
class PhaseGuard {
public:
  explicit PhaseGuard(std::string* current) : current_(current) {}

  template <class Fn>
  auto operator()(const char* phase, Fn&& fn) {
    *current_ = phase;
    try {
      return fn();
    } catch (const Error& e) {
      throw Error(e.code(), std::string("phase ") + phase + ": " + e.what());
    } catch (const std::bad_alloc&) {
      throw Error(Errc::capacity, std::string("phase ") + phase + ": out of memory");
    } catch (const std::exception& e) {
      throw Error(Errc::internal, std::string("phase ") + phase + ": " + e.what());
    }
  }

private:
  std::string* current_;
};

Corpus scanned_corpus(const Subnet& universe, const std::vector<ServiceRecord>& found,
                      const PipelineConfig& config) {
  Corpus c(universe, found);
  return config.filter_enabled ? filter_pseudo_services(c, config.filter) : c;
}

/// Seed hosts (training data) never become prediction targets.
std::vector<ServiceRecord> prediction_sources(const Corpus& prior_results, const SeedSplit& split) {
  std::vector<ServiceRecord> out;
  for (const auto& r : prior_results.services())
    if (!split.is_seed(r.ip))
      out.push_back(r);
  return out;
}

using ArtifactSink = std::function<void(const char* phase, const RunResult&)>;

RunResult run_impl(const PipelineInputs& inputs, const PipelineConfig& config, std::string* phase_out,
                   const ArtifactSink& sink) {
  config.validate();
  std::string phase_local;
  PhaseGuard phase(phase_out ? phase_out : &phase_local);
  RunResult r;
  const auto universe = inputs.raw.universe();
  SimulatedBackend backend(inputs.raw);
  r.ledger = BandwidthLedger(universe.size());
  auto emit = [&](const char* name) {
    if (sink)
      sink(name, r);
  };

  phase("seed", [&] {
    r.split = split(inputs.truth, config.seed_fraction, config.rng_seed);
    r.seed_scan = run_seed_scan(backend, universe, config.seed_fraction, config.seed_ports,
                                config.rng_seed, r.ledger);
    auto scanned = scanned_corpus(universe, r.seed_scan.found, config);
    r.eligible = eligible_ports(r.split, scanned, config.min_ips, SplitSide::seed);
    std::vector<bool> keep(65536, false);
    for (auto p : r.eligible)
      keep[p] = true;
    r.seed = scanned.filter([&](const ServiceRecord& s) { return keep[s.port]; });
  });
  emit("seed");

  phase("model", [&] {
    ModelOptions opt;
    opt.features.app_kinds = config.app_kinds;
    opt.features.net_kinds = config.net_kinds;
    opt.features.asn = inputs.asn;
    opt.min_support = config.min_support;
    opt.partitions = config.partitions;
    r.model = build_model(r.seed, opt);
  });
  emit("model");

  Corpus prior_results;
  phase("priors", [&] {
    r.priors = build_priors_list(r.seed, r.model, config.step_prefix);
    r.priors_scan = run_priors_scan(backend, r.priors, config.priors_budget, r.ledger);
    prior_results = scanned_corpus(universe, r.priors_scan.found, config);
  });
  emit("priors");

  phase("predictions", [&] {
    r.predictive = build_predictive_features(r.seed, r.model, config.probability_floor);
    std::unordered_set<ServiceKey> known;
    for (const auto& s : r.priors_scan.found)
      known.insert(service_key(s));
    auto sources = prediction_sources(prior_results, r.split);
    r.predictions = build_prediction_list(sources, r.predictive, known, r.model.features());
    r.prediction_scan = run_prediction_scan(backend, r.predictions, config.prediction_budget, r.ledger);
  });
  emit("predictions");

  phase("evaluate", [&] {
    r.truth = GroundTruth::from_split(inputs.truth, r.split, r.eligible, config.restrict_truth);
    const auto full = r.ledger.probes_per_full_scan();
    CoverageTracker plain(r.truth, full, 0, config.curve_every);
    plain.observe(r.priors_scan, "priors");
    plain.observe(r.prediction_scan, "predictions");
    r.curve = plain.curve();
    CoverageTracker seeded(r.truth, full, r.seed_scan.delta.probes, config.curve_every);
    seeded.observe(r.priors_scan, "priors");
    seeded.observe(r.prediction_scan, "predictions");
    r.curve_with_seed = seeded.curve();
    r.baselines = baseline_curves(r.truth, universe, config.curve_every);

    std::unordered_set<ServiceKey> hit;
    for (const auto& s : r.prediction_scan.found)
      hit.insert(service_key(s));
    std::vector<Prediction> found;
    for (std::size_t i = 0; i < r.prediction_scan.items_scanned; ++i)
      if (hit.contains(service_key(r.predictions[i].ip, r.predictions[i].port)))
        found.push_back(r.predictions[i]);
    r.feature_report = feature_report(found, r.truth);
  });
  emit("evaluate");
  return r;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  auto out = open_out(path);
  fn(out);
  if (!out)
    throw Error(Errc::io, "write failed: " + path.string());
}

void write_curve_file(const fs::path& path, const CoverageCurve& curve) {
  write_file(path, [&](std::ostream& o) { write_curve(o, curve); });
}

json summary_json(const RunResult& r, const PipelineInputs& inputs, const PipelineConfig& config) {
  json j = json::object();
  j["config"] = config_json(config);
  j["universe"] = inputs.raw.universe().to_string();
  j["corpus_services"] = inputs.raw.size();
  j["pseudo_removed"] = inputs.pseudo_removed;
  j["seed_hosts"] = r.split.seed_ips.size();
  j["test_hosts"] = r.split.test_ips.size();
  j["seed_services"] = r.seed.size();
  j["eligible_ports"] = r.eligible.size();
  j["truth_services"] = r.truth.size();
  j["model_conditions"] = r.model.rows().size();
  j["model_entries"] = r.model.entry_count();
  j["priors_entries"] = r.priors.size();
  j["priors_scanned"] = r.priors_scan.items_scanned;
  j["predictive_features"] = r.predictive.size();
  j["predictions"] = r.predictions.size();
  j["predictions_scanned"] = r.prediction_scan.items_scanned;
  if (!r.curve.empty()) {
    const auto& last = r.curve.back();
    j["final"] = {{"probes", last.probes},
                  {"full_scan_units", last.full_scan_units},
                  {"fraction_services", last.fraction_services},
                  {"normalized_services", last.normalized_services},
                  {"precision", last.precision}};
  }
  auto reach = [&](const CoverageCurve& c, double f) {
    auto p = probes_to_reach(c, f);
    return p ? json(*p) : json(nullptr);
  };
  json milestones = json::array();
  for (double f : {0.5, 0.8, 0.9}) {
    milestones.push_back({{"fraction", f},
                          {"gps_probes", reach(r.curve, f)},
                          {"port_order_probes", reach(r.baselines.port_order, f)},
                          {"oracle_probes", reach(r.baselines.oracle, f)}});
  }
  j["milestones"] = std::move(milestones);
  return j;
}

void write_phase(const char* phase, const RunResult& r, const PipelineInputs& inputs,
                 const PipelineConfig& config, const fs::path& d) {
  std::string p = phase;
  if (p == "seed") {
    write_file(d / "seed_scan.jsonl", [&](std::ostream& o) { write_records(o, r.seed_scan.found); });
  } else if (p == "model") {
    write_file(d / "model.jsonl", [&](std::ostream& o) { r.model.write(o); });
  } else if (p == "priors") {
    write_file(d / "priors.csv", [&](std::ostream& o) { write_priors_list(o, r.priors); });
    write_file(d / "priors_scan.jsonl", [&](std::ostream& o) { write_records(o, r.priors_scan.found); });
  } else if (p == "predictions") {
    write_file(d / "predictions.csv", [&](std::ostream& o) { write_prediction_list(o, r.predictions); });
    write_file(d / "prediction_scan.jsonl",
               [&](std::ostream& o) { write_records(o, r.prediction_scan.found); });
    write_file(d / "ledger.json", [&](std::ostream& o) { o << ledger_json(r.ledger).dump(2) << '\n'; });
  } else if (p == "evaluate") {
    write_curve_file(d / "curve.csv", r.curve);
    write_curve_file(d / "curve_with_seed.csv", r.curve_with_seed);
    write_curve_file(d / "baseline_oracle.csv", r.baselines.oracle);
    write_curve_file(d / "baseline_port_order.csv", r.baselines.port_order);
    write_file(d / "feature_report.csv", [&](std::ostream& o) { write_feature_report(o, r.feature_report); });
    write_file(d / "summary.json",
               [&](std::ostream& o) { o << summary_json(r, inputs, config).dump(2) << '\n'; });
  }
}

void prepare_dir(const fs::path& d) {
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec)
    throw Error(Errc::io, "cannot create " + d.string() + ": " + ec.message());
  fs::remove(d / "FAILED", ec);
}

} // namespace

RunResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config) {
  return run_impl(inputs, config, nullptr, {});
}

void write_artifacts(const RunResult& result, const PipelineInputs& inputs, const PipelineConfig& config,
                     const std::string& dir) {
  prepare_dir(dir);
  for (const char* p : {"seed", "model", "priors", "predictions", "evaluate"})
    write_phase(p, result, inputs, config, dir);
}

RunResult run_to_directory(const PipelineConfig& config, const std::string& dir) {
  const fs::path d(dir);
  prepare_dir(d);
  std::string phase = "load";
  try {
    auto inputs = load_inputs(config);
    return run_impl(inputs, config, &phase, [&](const char* p, const RunResult& r) {
      write_phase(p, r, inputs, config, d);
    });
  } catch (const std::exception& e) {
    std::ofstream marker(d / "FAILED");
    marker << "phase: " << phase << "\nerror: " << e.what() << '\n';
    throw;
  }
}

CoverageCurve replay_curve(const PipelineInputs& inputs, const PipelineConfig& config,
                           const std::string& run_dir) {
  const fs::path d(run_dir);
  if (fs::exists(d / "FAILED"))
    throw Error(Errc::invalid_argument, "run directory " + run_dir + " holds a failed run");
  auto open = [&](const char* name) {
    std::ifstream in(d / name, std::ios::binary);
    if (!in)
      throw Error(Errc::io, "file not found: " + (d / name).string());
    return in;
  };
  const auto universe = inputs.raw.universe();
  auto seed_in = open("seed_scan.jsonl");
  auto seed_scan = read_corpus(seed_in, universe, "seed_scan.jsonl");
  auto priors_in = open("priors.csv");
  auto priors = read_priors_list(priors_in);
  auto predictions_in = open("predictions.csv");
  auto predictions = read_prediction_list(predictions_in);

  auto sp = split(inputs.truth, config.seed_fraction, config.rng_seed);
  auto scanned = config.filter_enabled ? filter_pseudo_services(seed_scan, config.filter) : seed_scan;
  auto eligible = eligible_ports(sp, scanned, config.min_ips, SplitSide::seed);
  auto truth = GroundTruth::from_split(inputs.truth, sp, eligible, config.restrict_truth);

  SimulatedBackend backend(inputs.raw);
  BandwidthLedger ledger(universe.size());
  auto priors_scan = run_priors_scan(backend, priors, config.priors_budget, ledger);
  auto prediction_scan = run_prediction_scan(backend, predictions, config.prediction_budget, ledger);
  CoverageTracker tracker(truth, ledger.probes_per_full_scan(), 0, config.curve_every);
  tracker.observe(priors_scan, "priors");
  tracker.observe(prediction_scan, "predictions");
  return tracker.curve();
}

// -- sweep ---------------------------------------------------------------------------

namespace {

std::string cell_label(double fraction, int prefix) {
  std::ostringstream ss;
  ss << "seed" << fraction << "_step" << prefix;
  return ss.str();
}

} // namespace

std::vector<SweepCell> run_sweep(const PipelineInputs& inputs, const PipelineConfig& config) {
  auto fractions = config.sweep_seed_fractions;
  auto prefixes = config.sweep_step_prefixes;
  if (fractions.empty())
    fractions.push_back(config.seed_fraction);
  if (prefixes.empty())
    prefixes.push_back(config.step_prefix);
  std::vector<SweepCell> cells;
  for (double f : fractions)
    for (int p : prefixes)
      cells.push_back({f, p, cell_label(f, p), std::nullopt, {}, BandwidthLedger()});

  auto workers = std::min<std::size_t>(cells.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  parallel_for(workers, [&](std::size_t) {
    for (auto i = next++; i < cells.size(); i = next++) {
      auto& cell = cells[i];
      try {
        auto c = config;
        c.seed_fraction = cell.seed_fraction;
        c.step_prefix = cell.step_prefix;
        auto r = run_pipeline(inputs, c);
        cell.curve = std::move(r.curve);
        cell.ledger = r.ledger;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  });
  return cells;
}

void write_sweep(const std::vector<SweepCell>& cells, const std::string& dir) {
  const fs::path d(dir);
  prepare_dir(d);
  write_file(d / "sweep.csv", [&](std::ostream& o) {
    o << "label,seed_fraction,step_prefix,status,curve,total_probes,fraction_services,normalized_services,"
         "error\n";
    for (const auto& c : cells) {
      o << c.label << ',' << format_real(c.seed_fraction) << ',' << c.step_prefix << ',';
      if (c.error) {
        auto msg = *c.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        o << "error,,,,," << msg << '\n';
        continue;
      }
      auto file = "curve_" + c.label + ".csv";
      o << "ok," << file << ',' << c.ledger.total_probes() << ',';
      if (c.curve.empty())
        o << ",,\n";
      else
        o << format_real(c.curve.back().fraction_services) << ','
          << format_real(c.curve.back().normalized_services) << ",\n";
      write_curve_file(d / file, c.curve);
    }
  });
}

// -- reports --------------------------------------------------------------------------

namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v * 100);
  return buf;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

} // namespace

std::string render_report(const std::string& run_dir) {
  const fs::path d(run_dir);
  std::ostringstream out;
  if (fs::exists(d / "FAILED"))
    out << "run FAILED\n" << read_file((d / "FAILED").string()) << '\n';
  json summary;
  json ledger;
  try {
    summary = json::parse(read_file((d / "summary.json").string()));
    ledger = json::parse(read_file((d / "ledger.json").string()));
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("report: ") + e.what());
  }
  out << "universe           " << summary.value("universe", "") << '\n'
      << "corpus services    " << summary.value("corpus_services", 0) << " (pseudo removed "
      << summary.value("pseudo_removed", 0) << ")\n"
      << "seed / test hosts  " << summary.value("seed_hosts", 0) << " / " << summary.value("test_hosts", 0)
      << '\n'
      << "eligible ports     " << summary.value("eligible_ports", 0) << '\n'
      << "truth services     " << summary.value("truth_services", 0) << '\n'
      << "model              " << summary.value("model_conditions", 0) << " conditions, "
      << summary.value("model_entries", 0) << " entries\n"
      << "priors             " << summary.value("priors_scanned", 0) << " of "
      << summary.value("priors_entries", 0) << " entries scanned\n"
      << "predictions        " << summary.value("predictions_scanned", 0) << " of "
      << summary.value("predictions", 0) << " probed\n\n";
  out << "bandwidth (probes, 100%-scan units)\n";
  for (const auto& [phase, c] : ledger.at("phases").items())
    out << "  " << phase << std::string(13 - std::min<std::size_t>(phase.size(), 12), ' ')
        << c.at("probes").get<std::uint64_t>() << "  " << number(c.at("full_scan_units").get<double>())
        << "  responses " << c.at("responses").get<std::uint64_t>() << '\n';
  if (summary.contains("final")) {
    const auto& f = summary["final"];
    out << "\nfinal (excluding seed)\n"
        << "  fraction of services  " << percent(f.at("fraction_services").get<double>()) << '\n'
        << "  normalized services   " << percent(f.at("normalized_services").get<double>()) << '\n'
        << "  precision             " << number(f.at("precision").get<double>()) << '\n'
        << "  100%-scan units       " << number(f.at("full_scan_units").get<double>()) << '\n';
  }
  out << "\nprobes to reach fraction of services\n";
  for (const auto& m : summary.at("milestones")) {
    auto show = [](const json& v) { return v.is_null() ? std::string("never") : number(v.get<double>()); };
    out << "  " << percent(m.at("fraction").get<double>()) << "  gps " << show(m.at("gps_probes"))
        << "  port-order " << show(m.at("port_order_probes")) << "  oracle " << show(m.at("oracle_probes"))
        << '\n';
  }
  std::ifstream fr(d / "feature_report.csv");
  if (fr) {
    out << "\ntop predictive features (normalized share, service share)\n";
    std::string line;
    std::getline(fr, line);
    for (int i = 0; i < 5 && std::getline(fr, line); ++i) {
      std::istringstream ls(line);
      std::string cls, kinds, ns, ss;
      std::getline(ls, cls, ',');
      std::getline(ls, kinds, ',');
      std::getline(ls, ns, ',');
      std::getline(ls, ss, ',');
      out << "  " << cls << (kinds.empty() ? "" : " [" + kinds + "]") << "  " << percent(std::stod(ns))
          << "  " << percent(std::stod(ss)) << '\n';
    }
  }
  return out.str();
}

std::string render_net_feature_ranking(const PipelineConfig& config) {
  auto inputs = load_inputs(config);
  auto sp = split(inputs.truth, config.seed_fraction, config.rng_seed);
  auto eligible = eligible_ports(sp, inputs.truth, config.min_ips, SplitSide::seed);
  std::vector<bool> keep(65536, false);
  for (auto p : eligible)
    keep[p] = true;
  auto seed = inputs.truth.filter([&](const ServiceRecord& r) { return keep[r.port] && sp.is_seed(r.ip); });
  ModelOptions opt;
  opt.features.app_kinds = config.app_kinds;
  opt.features.net_kinds = all_net_candidates;
  opt.features.asn = inputs.asn;
  opt.min_support = config.min_support;
  opt.partitions = config.partitions;
  auto model = build_model(seed, opt);
  std::ostringstream out;
  out << "network feature ranking (share of seed services best predicted via each kind)\n";
  for (const auto& [kind, share] : rank_net_features(model, seed))
    out << "  " << name(kind) << std::string(12 - std::min<std::size_t>(name(kind).size(), 11), ' ')
        << percent(share) << '\n';
  return out.str();
}

} // namespace gps
