// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#include "carbonsched/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace carbonsched {

namespace {

using nlohmann::json;

constexpr const char* kArrivalModelNote =
    "per-timestep exponential draws (mean rate/timesteps), redrawn above "
    "1.5x mean; realized mean ~0.569x nominal";

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

json manifest_to_json(const RunManifest& manifest) {
  return json{{"config_path", manifest.config_path},
              {"regions", manifest.regions_path},
              {"latency", manifest.latency_path},
              {"carbon", manifest.carbon_path},
              {"workload", manifest.workload_path},
              {"policies", manifest.policies},
              {"seed", manifest.seed},
              {"hours", manifest.hours},
              {"timesteps_per_hour", manifest.timesteps_per_hour},
              {"energy_per_request_kwh", manifest.energy_per_request_kwh},
              {"out_dir", manifest.out_dir},
              {"tool_version", manifest.tool_version}};
}

json plan_to_json(const ProvisioningPlan& plan) {
  return json{{"hour", plan.hour},
              {"s", plan.servers},
              {"x", plan.routed},
              {"unserved", plan.unserved},
              {"objective", plan.objective},
              {"carbon_term", plan.carbon_term},
              {"server_term", plan.server_term}};
}

ProvisioningPlan plan_from_json(const json& j) {
  ProvisioningPlan plan;
  plan.hour = j.at("hour").get<long long>();
  plan.servers = j.at("s").get<std::vector<long long>>();
  plan.routed = j.at("x").get<std::vector<std::vector<long long>>>();
  plan.unserved = j.at("unserved").get<std::vector<long long>>();
  plan.objective = j.at("objective").get<double>();
  plan.carbon_term = j.at("carbon_term").get<double>();
  plan.server_term = j.at("server_term").get<long long>();
  return plan;
}

json weights_to_json(const RoutingWeights& weights) {
  return json{{"hour", weights.hour},
              {"w", weights.weights},
              {"f", weights.inbound_fraction},
              {"t", weights.inbound_total}};
}

std::string hourly_csv(const SimulationResult& result, const RegionSet& rs,
                       const RunManifest& manifest) {
  std::ostringstream out;
  out << "# carbonsched " << kToolVersion << "\n";
  out << "# manifest " << manifest_to_json(manifest).dump() << "\n";
  out << "# arrivals: " << kArrivalModelNote << "\n";
  out << "hour,region,originated,served,emissions_g,utilization,overloads,"
         "mean_latency_ms\n";
  for (const HourlyReport& hr : result.hourly) {
    for (int r = 0; r < rs.size(); ++r) {
      const RegionHourStats& stats = hr.regions[r];
      out << hr.hour << ',' << rs.name(r) << ',' << stats.originated << ','
          << stats.served << ',' << fmt_double(stats.emissions_g) << ','
          << fmt_double(stats.utilization) << ',' << stats.overloads << ','
          << fmt_double(stats.mean_latency_ms) << '\n';
    }
  }
  return out.str();
}

json summary_to_json(const SimulationResult& result, const RegionSet& rs,
                     const SimConfig& config, const RunManifest& manifest) {
  const SummaryReport& s = result.summary;
  json per_region = json::array();
  for (int r = 0; r < rs.size(); ++r) {
    long long originated = 0, served = 0, overloads = 0;
    double emissions = 0.0;
    for (const HourlyReport& hr : result.hourly) {
      originated += hr.regions[r].originated;
      served += hr.regions[r].served;
      overloads += hr.regions[r].overloads;
      emissions += hr.regions[r].emissions_g;
    }
    per_region.push_back(json{{"region", rs.name(r)},
                              {"originated", originated},
                              {"served", served},
                              {"emissions_g", emissions},
                              {"overloads", overloads},
                              {"total_servers", s.total_servers.empty()
                                                    ? 0
                                                    : s.total_servers[r]},
                              {"mean_servers", s.mean_servers.empty()
                                                   ? 0.0
                                                   : s.mean_servers[r]}});
  }
  json policy{{"name", config.policy.name()},
              {"alpha", config.policy.carbon_weight},
              {"capacity_per_server", config.policy.capacity_per_server},
              {"max_servers", config.policy.max_total_servers}};
  if (config.policy.kind == PolicyKind::carbon_slo)
    policy["slo_ms"] = config.policy.slo_ms;
  return json{
      {"manifest", manifest_to_json(manifest)},
      {"policy", config.policy.name()},
      {"policy_config", policy},
      {"carbon_forecaster", to_string(config.carbon_forecaster)},
      {"workload_forecaster", to_string(config.workload_forecaster)},
      {"arrival_model", kArrivalModelNote},
      {"latency_model", "network latency only; no service-time component"},
      {"totals",
       json{{"hours", s.hours},
            {"requests", s.total_requests},
            {"emissions_g", s.total_emissions_g},
            {"mean_latency_ms", s.mean_latency_ms},
            {"p95_latency_ms", s.p95_latency_ms},
            {"overloads", s.total_overloads},
            {"slo_violations", s.total_slo_violations},
            {"unserved_planned", s.total_unserved_planned}}},
      {"per_region", per_region}};
}

std::string plans_jsonl(const SimulationResult& result) {
  std::ostringstream out;
  for (const HourlyReport& hr : result.hourly) {
    json line{{"hour", hr.hour},
              {"plan", plan_to_json(hr.plan)},
              {"weights", weights_to_json(hr.weights)}};
    out << line.dump() << "\n";
  }
  return out.str();
}

json comparison_to_json(const ComparisonReport& report, const RegionSet& rs,
                        const RunManifest& manifest) {
  json entries = json::array();
  for (const PolicyRunSummary& entry : report.entries) {
    json e{{"name", entry.name},
           {"total_emissions_g", entry.total_emissions_g},
           {"mean_latency_ms", entry.mean_latency_ms},
           {"p95_latency_ms", entry.p95_latency_ms},
           {"total_overloads", entry.total_overloads},
           {"total_unserved_planned", entry.total_unserved_planned},
           {"mean_servers", entry.mean_servers}};
    if (entry.reduction_vs_baseline)
      e["reduction_vs_baseline"] = *entry.reduction_vs_baseline;
    entries.push_back(std::move(e));
  }
  json regions = json::array();
  for (int r = 0; r < rs.size(); ++r) regions.push_back(rs.name(r));
  return json{{"manifest", manifest_to_json(manifest)},
              {"regions", regions},
              {"policies", entries}};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot write " + path);
  out << content;
}

}  // namespace carbonsched
