// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "carbonsched/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace carbonsched {
namespace {

// 0 = success, 1 = invalid inputs, 2 = runtime failure.
int exit_code_for(errc code) {
  switch (code) {
    case errc::trace_exhausted:
    case errc::out_of_range:
    case errc::io_error:
    case errc::instance_too_large:
      return 2;
    default:
      return 1;
  }
}

struct CliConfig {
  fs::path base_dir;
  std::string config_path;
  std::string regions, latency, carbon, workload;
  long long hours = 24;
  int timesteps_per_hour = 60;
  std::uint64_t seed = 0;
  double energy_per_request_kwh = 1e-4;
  double alpha = 0.5;
  std::vector<long long> capacity{100};
  long long max_servers = 500;
  ForecastKind carbon_forecaster = ForecastKind::oracle;
  ForecastKind workload_forecaster = ForecastKind::oracle;
  PolicySpec policy;
  std::vector<PolicySpec> policies;
  std::string out = "out";
};

std::string resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return path.string();
  return (base / path).lexically_normal().string();
}

std::vector<long long> parse_capacity(const json& j) {
  std::vector<long long> out;
  if (j.is_array())
    out = j.get<std::vector<long long>>();
  else
    out.push_back(j.get<long long>());
  return out;
}

PolicySpec parse_policy(const json& j, const CliConfig& cfg) {
  PolicySpec spec;
  spec.carbon_weight = j.value("alpha", cfg.alpha);
  spec.capacity_per_server = j.contains("capacity_per_server")
                                 ? parse_capacity(j.at("capacity_per_server"))
                                 : cfg.capacity;
  spec.max_total_servers = j.value("max_servers", cfg.max_servers);
  std::string kind = j.value("kind", "carbon");
  if (kind == "latency") {
    spec.kind = PolicyKind::latency_baseline;
  } else if (kind == "carbon") {
    spec.kind = PolicyKind::carbon_slo;
    spec.slo_ms = j.value("slo_ms", 100.0);
  } else {
    raise(errc::invalid_spec, "unknown policy kind '" + kind + "'");
  }
  return spec;
}

CliConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    raise(errc::parse_error, path + ": " + e.what());
  }
  CliConfig cfg;
  cfg.config_path = path;
  cfg.base_dir = fs::path(path).parent_path();
  cfg.regions = resolve(cfg.base_dir, j.value("regions", "regions.csv"));
  cfg.latency = resolve(cfg.base_dir, j.value("latency", "latency.csv"));
  cfg.carbon = resolve(cfg.base_dir, j.value("carbon", "carbon.csv"));
  cfg.workload = resolve(cfg.base_dir, j.value("workload", "workload.csv"));
  cfg.hours = j.value("hours", 24LL);
  cfg.timesteps_per_hour = j.value("timesteps_per_hour", 60);
  cfg.seed = j.value("seed", 0ULL);
  cfg.energy_per_request_kwh = j.value("energy_per_request_kwh", 1e-4);
  cfg.alpha = j.value("alpha", 0.5);
  if (j.contains("capacity_per_server"))
    cfg.capacity = parse_capacity(j.at("capacity_per_server"));
  cfg.max_servers = j.value("max_servers", 500LL);
  cfg.carbon_forecaster =
      forecast_kind_from_string(j.value("carbon_forecaster", "oracle"));
  cfg.workload_forecaster =
      forecast_kind_from_string(j.value("workload_forecaster", "oracle"));
  cfg.out = j.value("out", "out");
  if (j.contains("policy")) {
    cfg.policy = parse_policy(j.at("policy"), cfg);
  } else {
    cfg.policy.kind = PolicyKind::carbon_slo;
    cfg.policy.slo_ms = 100.0;
    cfg.policy.carbon_weight = cfg.alpha;
    cfg.policy.capacity_per_server = cfg.capacity;
    cfg.policy.max_total_servers = cfg.max_servers;
  }
  if (j.contains("policies"))
    for (const json& pj : j.at("policies"))
      cfg.policies.push_back(parse_policy(pj, cfg));
  return cfg;
}

SimConfig sim_config(const CliConfig& cfg) {
  SimConfig sc;
  sc.hours = cfg.hours;
  sc.timesteps_per_hour = cfg.timesteps_per_hour;
  sc.seed = cfg.seed;
  sc.energy_per_request_kwh = cfg.energy_per_request_kwh;
  sc.policy = cfg.policy;
  sc.carbon_forecaster = cfg.carbon_forecaster;
  sc.workload_forecaster = cfg.workload_forecaster;
  return sc;
}

RunManifest make_manifest(const CliConfig& cfg,
                          const std::vector<std::string>& policy_names,
                          const std::string& out_dir) {
  RunManifest m;
  m.config_path = cfg.config_path;
  m.regions_path = cfg.regions;
  m.latency_path = cfg.latency;
  m.carbon_path = cfg.carbon;
  m.workload_path = cfg.workload;
  m.policies = policy_names;
  m.seed = cfg.seed;
  m.hours = cfg.hours;
  m.timesteps_per_hour = cfg.timesteps_per_hour;
  m.energy_per_request_kwh = cfg.energy_per_request_kwh;
  m.out_dir = out_dir;
  return m;
}

int cmd_validate(const CliConfig& cfg) {
  bool ok = true;
  std::optional<RegionSet> rs;
  auto check = [&ok](const std::string& path, auto&& loader) {
    try {
      loader();
      std::cout << "ok " << path << "\n";
    } catch (const Error& e) {
      std::cerr << "FAIL " << path << ": " << e.what() << "\n";
      ok = false;
    }
  };
  check(cfg.regions, [&] { rs = load_region_set(cfg.regions); });
  if (!rs) {
    std::cerr << "FAIL remaining files skipped: region set unavailable\n";
    return 1;
  }
  std::cout << "   " << rs->size() << " regions\n";
  check(cfg.latency, [&] { load_latency_matrix(cfg.latency, *rs); });
  check(cfg.carbon, [&] { load_carbon_trace(cfg.carbon, *rs); });
  check(cfg.workload, [&] { load_workload_trace(cfg.workload, *rs); });
  if (ok) {
    // Cross-file consistency (shared hour domain).
    check("trace set", [&] {
      load_trace_set(cfg.regions, cfg.latency, cfg.carbon, cfg.workload);
    });
  }
  return ok ? 0 : 1;
}

int cmd_solve(const CliConfig& cfg, long long hour) {
  TraceSet traces =
      load_trace_set(cfg.regions, cfg.latency, cfg.carbon, cfg.workload);
  const int n = traces.regions.size();
  Forecaster carbon_fc{cfg.carbon_forecaster};
  Forecaster workload_fc{cfg.workload_forecaster};
  std::vector<double> carbon_hat(n), workload_hat(n);
  for (int r = 0; r < n; ++r) {
    carbon_hat[r] = forecast(carbon_fc, traces.carbon, r, hour);
    workload_hat[r] = forecast(workload_fc, traces.workload, r, hour);
  }
  HourPlanOutcome out = apply_policy(cfg.policy, traces.regions, carbon_hat,
                                     workload_hat, traces.latency, hour);
  for (const RuleViolation& v : verify_plan(out.problem, out.plan))
    raise(errc::invalid_param,
          std::string("plan verification failed: ") + plan_rule_name(v.rule) +
              " (" + v.detail + ")");
  std::cout << plan_to_json(out.plan).dump(2) << "\n";
  return 0;
}

void write_run_artifacts(const std::string& dir, const CliConfig& cfg,
                         const SimConfig& sc, const TraceSet& traces,
                         const SimulationResult& result,
                         const RunManifest& manifest) {
  fs::create_directories(dir);
  write_text_file(dir + "/hourly.csv",
                  hourly_csv(result, traces.regions, manifest));
  write_text_file(dir + "/summary.json",
                  summary_to_json(result, traces.regions, sc, manifest).dump(2) +
                      "\n");
  write_text_file(dir + "/plans.jsonl", plans_jsonl(result));
}

int cmd_run(const CliConfig& cfg) {
  TraceSet traces =
      load_trace_set(cfg.regions, cfg.latency, cfg.carbon, cfg.workload);
  SimConfig sc = sim_config(cfg);
  SimulationResult result = run_simulation(sc, traces);
  RunManifest manifest = make_manifest(cfg, {cfg.policy.name()}, cfg.out);
  write_run_artifacts(cfg.out, cfg, sc, traces, result, manifest);
  std::cout << "wrote " << cfg.out << "/hourly.csv, summary.json, plans.jsonl\n";
  return 0;
}

int cmd_sweep(const CliConfig& cfg, const std::vector<double>& slo_override) {
  TraceSet traces =
      load_trace_set(cfg.regions, cfg.latency, cfg.carbon, cfg.workload);
  std::vector<PolicySpec> policies;
  if (!slo_override.empty()) {
    PolicySpec baseline = cfg.policy;
    baseline.kind = PolicyKind::latency_baseline;
    policies.push_back(baseline);
    for (double slo : slo_override) {
      PolicySpec spec = cfg.policy;
      spec.kind = PolicyKind::carbon_slo;
      spec.slo_ms = slo;
      policies.push_back(spec);
    }
  } else if (!cfg.policies.empty()) {
    policies = cfg.policies;
  } else {
    raise(errc::invalid_spec,
          "sweep needs --slo or a 'policies' list in the config");
  }

  std::vector<std::string> names;
  for (const PolicySpec& spec : policies) names.push_back(spec.name());
  SimConfig base = sim_config(cfg);
  std::vector<SimulationResult> runs;
  ComparisonReport report = run_sweep(policies, base, traces, &runs);

  fs::create_directories(cfg.out);
  RunManifest manifest = make_manifest(cfg, names, cfg.out);
  write_text_file(cfg.out + "/comparison.json",
                  comparison_to_json(report, traces.regions, manifest).dump(2) +
                      "\n");
  for (size_t k = 0; k < policies.size(); ++k) {
    SimConfig sc = base;
    sc.policy = policies[k];
    std::string dir = cfg.out + "/" + policies[k].name();
    RunManifest m = make_manifest(cfg, {policies[k].name()}, dir);
    write_run_artifacts(dir, cfg, sc, traces, runs[k], m);
  }
  std::cout << "wrote " << cfg.out << "/comparison.json and "
            << policies.size() << " policy run directories\n";
  return 0;
}

}  // namespace
}  // namespace carbonsched

int main(int argc, char** argv) {
  using namespace carbonsched;
  CLI::App app{"carbon-aware provisioning and request-routing simulator"};
  app.require_subcommand(1);
  app.fallthrough(true);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  std::optional<long long> hours_override;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--seed", seed_override, "override the config seed");
  app.add_option("--out", out_override, "override the output directory");
  app.add_option("--hours", hours_override, "override the simulated horizon");

  auto* validate = app.add_subcommand("validate", "check all trace files");
  auto* solve =
      app.add_subcommand("solve", "solve one hour and print the plan JSON");
  long long hour = 0;
  solve->add_option("--hour", hour, "hour index to solve");
  auto* run = app.add_subcommand("run", "simulate the configured policy");
  auto* sweep =
      app.add_subcommand("sweep", "compare policies on identical workloads");
  std::string slo_csv;
  sweep->add_option("--slo", slo_csv,
                    "comma-separated latency ceilings (ms) for carbon policies");

  CLI11_PARSE(app, argc, argv);

  try {
    CliConfig cfg = load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (out_override) cfg.out = *out_override;
    if (hours_override) cfg.hours = *hours_override;

    if (app.got_subcommand(validate)) return cmd_validate(cfg);
    if (app.got_subcommand(solve)) return cmd_solve(cfg, hour);
    if (app.got_subcommand(run)) return cmd_run(cfg);
    if (app.got_subcommand(sweep)) {
      std::vector<double> slos;
      if (!slo_csv.empty()) {
        std::stringstream ss(slo_csv);
        std::string field;
        while (std::getline(ss, field, ','))
          slos.push_back(std::stod(field));
      }
      return cmd_sweep(cfg, slos);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "Error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
