// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carbonsched/sweep.hpp"

namespace carbonsched {

inline constexpr const char* kToolVersion = "0.1.0";

/// Reproducibility record echoed verbatim into every output artifact.
struct RunManifest {
  std::string config_path;
  std::string regions_path;
  std::string latency_path;
  std::string carbon_path;
  std::string workload_path;
  std::vector<std::string> policies;
  std::uint64_t seed = 0;
  long long hours = 0;
  int timesteps_per_hour = 60;
  double energy_per_request_kwh = 1e-4;
  std::string out_dir;
  std::string tool_version = kToolVersion;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

/// Wire format: {hour, s, x, unserved, objective, carbon_term, server_term}.
nlohmann::json plan_to_json(const ProvisioningPlan& plan);
ProvisioningPlan plan_from_json(const nlohmann::json& j);

/// Wire format: {hour, w, f, t}.
nlohmann::json weights_to_json(const RoutingWeights& weights);

/// Tidy per-hour CSV: hour,region,originated,served,emissions_g,utilization,
/// overloads,mean_latency_ms. Manifest and arrival-model notes are embedded
/// as leading '#' comment lines.
std::string hourly_csv(const SimulationResult& result, const RegionSet& rs,
                       const RunManifest& manifest);

nlohmann::json summary_to_json(const SimulationResult& result,
                               const RegionSet& rs, const SimConfig& config,
                               const RunManifest& manifest);

/// One JSON line per hour with the plan and routing weights, for debugging.
std::string plans_jsonl(const SimulationResult& result);

nlohmann::json comparison_to_json(const ComparisonReport& report,
                                  const RegionSet& rs,
                                  const RunManifest& manifest);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace carbonsched
