// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "gps/gps.h"

#include "gps/corpus.hpp"
#include "gps/error.hpp"
#include "gps/model.hpp"
#include "gps/pipeline.hpp"
#include "gps/synthetic.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

struct gps_corpus {
  gps::Corpus corpus;
};

struct gps_model {
  gps::CoOccurrenceModel model;
};

struct gps_config {
  gps::ConfigDocument doc;
};

namespace {

thread_local std::string last_error;

gps_status fail(gps_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

template <class Fn>
gps_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return GPS_OK;
  } catch (const gps::Error& e) {
    return fail(static_cast<gps_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GPS_ERR_CAPACITY, "out of memory");
  } catch (const std::exception& e) {
    return fail(GPS_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (!p)
    throw gps::Error(gps::Errc::invalid_argument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out)
    throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

gps::Subnet parse_universe(const char* text) {
  require(text, "universe");
  auto s = gps::Subnet::try_parse(text);
  if (!s)
    throw gps::Error(gps::Errc::invalid_argument, std::string("bad universe '") + text + "'");
  return *s;
}

std::shared_ptr<const gps::AsnTable> load_asn(const char* path) {
  if (!path || !*path)
    return std::make_shared<gps::AsnTable>();
  return std::make_shared<gps::AsnTable>(gps::AsnTable::load(path));
}

gps::FeatureKindSet parse_kinds(const char* csv) {
  if (!csv)
    return gps::default_net_kinds;
  gps::FeatureKindSet set;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty())
      continue;
    auto k = gps::kind_from_name(item);
    if (!k || !gps::is_network_kind(*k))
      throw gps::Error(gps::Errc::invalid_argument, "unknown network kind '" + item + "'");
    set.insert(*k);
  }
  return set;
}

std::optional<gps::FeatureValue> value_of(const char* kind, const char* value) {
  if (!kind)
    return std::nullopt;
  auto k = gps::kind_from_name(kind);
  if (!k)
    throw gps::Error(gps::Errc::invalid_argument, std::string("unknown feature kind '") + kind + "'");
  require(value, "feature value");
  return gps::FeatureValue{*k, value};
}

} // namespace

extern "C" {

const char* gps_version(void) {
  return "1.0.0";
}

const char* gps_last_error(void) {
  return last_error.c_str();
}

const char* gps_status_name(gps_status status) {
  switch (status) {
    case GPS_OK:
      return "ok";
    case GPS_ERR_IO:
      return "io";
    case GPS_ERR_PARSE:
      return "parse";
    case GPS_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case GPS_ERR_CAPACITY:
      return "capacity";
    case GPS_ERR_REJECTED:
      return "rejected";
    case GPS_ERR_UNAVAILABLE:
      return "unavailable";
    case GPS_ERR_UNDEFINED_METRIC:
      return "undefined_metric";
    case GPS_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

void gps_string_free(char* s) {
  std::free(s);
}

gps_status gps_corpus_load(const char* path, const char* universe, gps_corpus** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new gps_corpus{gps::load_corpus(path, parse_universe(universe))};
  });
}

gps_status gps_corpus_generate(const char* spec_path, gps_corpus** out) {
  return guarded([&] {
    require(spec_path, "spec_path");
    require(out, "out");
    *out = new gps_corpus{gps::generate(gps::load_synthetic_spec(spec_path)).corpus};
  });
}

gps_status gps_corpus_filter(const gps_corpus* corpus, size_t max_services_per_host, int keep_representative,
                             gps_corpus** out) {
  return guarded([&] {
    require(corpus, "corpus");
    require(out, "out");
    gps::PseudoFilterOptions opt;
    opt.max_services_per_host = max_services_per_host;
    opt.keep_representative = keep_representative != 0;
    *out = new gps_corpus{gps::filter_pseudo_services(corpus->corpus, opt)};
  });
}

gps_status gps_corpus_write(const gps_corpus* corpus, const char* path) {
  return guarded([&] {
    require(corpus, "corpus");
    require(path, "path");
    gps::save_corpus(path, corpus->corpus);
  });
}

size_t gps_corpus_service_count(const gps_corpus* corpus) {
  return corpus ? corpus->corpus.size() : 0;
}

size_t gps_corpus_host_count(const gps_corpus* corpus) {
  return corpus ? corpus->corpus.host_count() : 0;
}

void gps_corpus_free(gps_corpus* corpus) {
  delete corpus;
}

gps_status gps_config_load(const char* path, gps_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new gps_config{gps::ConfigDocument::load(path)};
  });
}

gps_status gps_config_new(gps_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new gps_config{};
  });
}

gps_status gps_config_set(gps_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    config->doc.set(key, value);
  });
}

void gps_config_free(gps_config* config) {
  delete config;
}

gps_status gps_model_build(const gps_corpus* seed, const char* net_kinds_csv, const char* asn_path,
                           uint32_t min_support, unsigned partitions, gps_model** out) {
  return guarded([&] {
    require(seed, "seed");
    require(out, "out");
    gps::ModelOptions opt;
    opt.features.net_kinds = parse_kinds(net_kinds_csv);
    opt.features.asn = load_asn(asn_path);
    opt.min_support = min_support;
    opt.partitions = partitions;
    *out = new gps_model{gps::build_model(seed->corpus, opt)};
  });
}

gps_status gps_model_probability(const gps_model* model, const gps_condition* condition, uint16_t target_port,
                                 double* out) {
  return guarded([&] {
    require(model, "model");
    require(condition, "condition");
    require(out, "out");
    if (condition->cls < GPS_PORT_ONLY || condition->cls > GPS_PORT_APP_NET)
      throw gps::Error(gps::Errc::invalid_argument, "bad condition class");
    gps::Condition c;
    c.cls = static_cast<gps::ConditionClass>(condition->cls);
    c.port_b = condition->port;
    c.app = value_of(condition->app_kind, condition->app_value);
    c.net = value_of(condition->net_kind, condition->net_value);
    auto p = model->model.probability(c, target_port);
    *out = p ? *p : 0.0;
  });
}

gps_status gps_model_write(const gps_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    std::ofstream f(path, std::ios::binary);
    if (!f)
      throw gps::Error(gps::Errc::io, std::string("cannot write ") + path);
    model->model.write(f);
  });
}

gps_status gps_model_read(const char* path, const char* asn_path, gps_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    std::ifstream f(path, std::ios::binary);
    if (!f)
      throw gps::Error(gps::Errc::io, std::string("file not found: ") + path);
    *out = new gps_model{gps::CoOccurrenceModel::read(f, load_asn(asn_path))};
  });
}

size_t gps_model_entry_count(const gps_model* model) {
  return model ? model->model.entry_count() : 0;
}

void gps_model_free(gps_model* model) {
  delete model;
}

gps_status gps_generate(const char* spec_path, const char* out_path, const char* asn_out_path) {
  return guarded([&] {
    require(spec_path, "spec_path");
    require(out_path, "out_path");
    auto gen = gps::generate(gps::load_synthetic_spec(spec_path));
    gps::save_corpus(out_path, gen.corpus);
    if (asn_out_path) {
      std::ofstream f(asn_out_path, std::ios::binary);
      if (!f)
        throw gps::Error(gps::Errc::io, std::string("cannot write ") + asn_out_path);
      gen.asn.write(f);
    }
  });
}

gps_status gps_run(const gps_config* config, const char* out_dir) {
  return guarded([&] {
    require(config, "config");
    auto c = config->doc.resolve();
    gps::run_to_directory(c, out_dir ? out_dir : c.output_dir);
  });
}

gps_status gps_eval(const gps_config* config, const char* run_dir, int* curve_matches) {
  return guarded([&] {
    require(config, "config");
    auto c = config->doc.resolve();
    std::string dir = run_dir ? run_dir : c.output_dir;
    auto inputs = gps::load_inputs(c);
    auto replayed = gps::replay_curve(inputs, c, dir);
    std::filesystem::path d(dir);
    {
      std::ofstream f(d / "replay_curve.csv", std::ios::binary);
      if (!f)
        throw gps::Error(gps::Errc::io, "cannot write " + (d / "replay_curve.csv").string());
      gps::write_curve(f, replayed);
    }
    if (curve_matches) {
      std::ifstream f(d / "curve.csv", std::ios::binary);
      if (!f)
        throw gps::Error(gps::Errc::io, "file not found: " + (d / "curve.csv").string());
      *curve_matches = gps::read_curve(f) == replayed ? 1 : 0;
    }
  });
}

gps_status gps_sweep(const gps_config* config, const char* out_dir, size_t* failed_cells) {
  return guarded([&] {
    require(config, "config");
    auto c = config->doc.resolve();
    auto inputs = gps::load_inputs(c);
    auto cells = gps::run_sweep(inputs, c);
    gps::write_sweep(cells, out_dir ? out_dir : c.output_dir);
    if (failed_cells) {
      *failed_cells = 0;
      for (const auto& cell : cells)
        *failed_cells += cell.error.has_value();
    }
  });
}

gps_status gps_report(const char* run_dir, char** out) {
  return guarded([&] {
    require(run_dir, "run_dir");
    require(out, "out");
    *out = dup_string(gps::render_report(run_dir));
  });
}

gps_status gps_rank_net_features(const gps_config* config, char** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = dup_string(gps::render_net_feature_ranking(config->doc.resolve()));
  });
}

} // extern "C"
