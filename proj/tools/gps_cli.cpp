// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C API.

#include "gps/gps.h"

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace {

// One flag per config key; keep in sync with the config reference.
const char* const config_keys[] = {
  "corpus.path", "corpus.synthetic", "universe", "asn_table", "seed_fraction", "step_prefix",
  "probability_floor", "min_support", "min_ips", "net_kinds", "app_kinds", "seed_ports",
  "budgets.priors", "budgets.predictions", "rng_seed", "partitions", "filter.enabled",
  "filter.max_services_per_host", "filter.keep_representative", "filter.dynamic_fields",
  "restrict_truth", "curve_every", "output_dir", "sweep.seed_fractions", "sweep.step_prefixes",
};

struct ConfigFlags {
  std::string path;
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", path, "Run configuration (JSON)");
    for (const char* key : config_keys)
      cmd->add_option(std::string("--") + key, values[key], std::string("Override config key ") + key);
    cmd->add_option("--set", sets, "Override any config key: key=value");
  }
};

int report_failure(gps_status s) {
  std::fprintf(stderr, "gps: error (%s): %s\n", gps_status_name(s), gps_last_error());
  return static_cast<int>(s);
}

using ConfigHandle = std::unique_ptr<gps_config, decltype(&gps_config_free)>;

gps_status make_config(const ConfigFlags& flags, ConfigHandle& out) {
  gps_config* raw = nullptr;
  auto s = flags.path.empty() ? gps_config_new(&raw) : gps_config_load(flags.path.c_str(), &raw);
  if (s != GPS_OK)
    return s;
  out.reset(raw);
  for (const auto& [key, value] : flags.values) {
    if (value.empty())
      continue;
    if ((s = gps_config_set(raw, key.c_str(), value.c_str())) != GPS_OK)
      return s;
  }
  for (const auto& kv : flags.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "gps: --set expects key=value, got '%s'\n", kv.c_str());
      return GPS_ERR_INVALID_ARGUMENT;
    }
    if ((s = gps_config_set(raw, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())) != GPS_OK)
      return s;
  }
  return GPS_OK;
}

const char* or_null(const std::string& s) {
  return s.empty() ? nullptr : s.c_str();
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive Internet service scanner: seed scan, co-occurrence model, priors and "
               "prediction scans, evaluation."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gps_version()));

  std::string spec_path, out_path, asn_out;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic corpus from a spec");
  generate->add_option("spec", spec_path, "Synthetic spec (JSON)")->required();
  generate->add_option("-o,--out", out_path, "Output corpus file")->required();
  generate->add_option("--asn-out", asn_out, "Also write the spec's prefix-to-ASN table");

  ConfigFlags run_flags;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run the four-phase pipeline and write all artifacts");
  run_flags.attach(run);
  run->add_option("-o,--out", run_out, "Artifact directory (default: output_dir)");

  ConfigFlags eval_flags;
  std::string eval_dir;
  auto* eval = app.add_subcommand("eval", "Replay a run's plans and recompute its curve");
  eval_flags.attach(eval);
  eval->add_option("-r,--run-dir", eval_dir, "Run directory (default: output_dir)");

  ConfigFlags sweep_flags;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Run the pipeline over seed_fraction x step_prefix");
  sweep_flags.attach(sweep);
  sweep->add_option("-o,--out", sweep_out, "Sweep directory (default: output_dir)");

  ConfigFlags report_flags;
  std::string report_dir;
  bool net_features = false;
  auto* report = app.add_subcommand("report", "Summarize a run directory");
  report->add_option("-r,--run-dir", report_dir, "Run directory");
  report_flags.attach(report);
  report->add_flag("--net-features", net_features,
                   "Rank subnet /16../23 and ASN features on the configured corpus instead");

  CLI11_PARSE(app, argc, argv);

  if (generate->parsed()) {
    auto s = gps_generate(spec_path.c_str(), out_path.c_str(), or_null(asn_out));
    if (s != GPS_OK)
      return report_failure(s);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
  }

  ConfigHandle config(nullptr, &gps_config_free);
  auto load = [&](const ConfigFlags& flags) { return make_config(flags, config); };

  if (run->parsed()) {
    if (auto s = load(run_flags); s != GPS_OK)
      return report_failure(s);
    if (auto s = gps_run(config.get(), or_null(run_out)); s != GPS_OK)
      return report_failure(s);
    std::printf("run complete\n");
    return 0;
  }

  if (eval->parsed()) {
    if (auto s = load(eval_flags); s != GPS_OK)
      return report_failure(s);
    int matches = 0;
    if (auto s = gps_eval(config.get(), or_null(eval_dir), &matches); s != GPS_OK)
      return report_failure(s);
    if (!matches) {
      std::fprintf(stderr, "gps: replayed curve differs from curve.csv (see replay_curve.csv)\n");
      return GPS_ERR_INTERNAL;
    }
    std::printf("replayed curve matches curve.csv\n");
    return 0;
  }

  if (sweep->parsed()) {
    if (auto s = load(sweep_flags); s != GPS_OK)
      return report_failure(s);
    size_t failed = 0;
    if (auto s = gps_sweep(config.get(), or_null(sweep_out), &failed); s != GPS_OK)
      return report_failure(s);
    if (failed)
      std::fprintf(stderr, "gps: %zu sweep cell(s) failed; see sweep.csv\n", failed);
    std::printf("sweep complete\n");
    return 0;
  }

  if (report->parsed()) {
    char* text = nullptr;
    gps_status s;
    if (net_features) {
      if ((s = load(report_flags)) != GPS_OK)
        return report_failure(s);
      s = gps_rank_net_features(config.get(), &text);
    } else {
      if (report_dir.empty()) {
        std::fprintf(stderr, "gps: report needs --run-dir (or --net-features with a config)\n");
        return GPS_ERR_INVALID_ARGUMENT;
      }
      s = gps_report(report_dir.c_str(), &text);
    }
    if (s != GPS_OK)
      return report_failure(s);
    std::fputs(text, stdout);
    gps_string_free(text);
    return 0;
  }
  return 0;
}
