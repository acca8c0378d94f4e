// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#include "carbonsched/sweep.hpp"

#include <optional>

namespace carbonsched {

ComparisonReport run_sweep(const std::vector<PolicySpec>& policies,
                           const SimConfig& base_config, const TraceSet& traces,
                           std::vector<SimulationResult>* runs_out) {
  if (policies.empty())
    raise(errc::invalid_param, "sweep requires at least one policy");

  ComparisonReport report;
  std::optional<double> baseline_emissions;
  for (const PolicySpec& spec : policies) {
    SimConfig config = base_config;
    config.policy = spec;
    SimulationResult result = run_simulation(config, traces);

    PolicyRunSummary entry;
    entry.name = spec.name();
    entry.total_emissions_g = result.summary.total_emissions_g;
    entry.mean_latency_ms = result.summary.mean_latency_ms;
    entry.p95_latency_ms = result.summary.p95_latency_ms;
    entry.total_overloads = result.summary.total_overloads;
    entry.total_unserved_planned = result.summary.total_unserved_planned;
    entry.mean_servers = result.summary.mean_servers;
    if (!baseline_emissions && spec.kind == PolicyKind::latency_baseline)
      baseline_emissions = entry.total_emissions_g;
    report.entries.push_back(std::move(entry));
    if (runs_out) runs_out->push_back(std::move(result));
  }

  if (baseline_emissions && *baseline_emissions > 0.0)
    for (PolicyRunSummary& entry : report.entries)
      entry.reduction_vs_baseline =
          1.0 - entry.total_emissions_g / *baseline_emissions;
  return report;
}

}  // namespace carbonsched
