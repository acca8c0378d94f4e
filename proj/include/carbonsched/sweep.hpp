// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "carbonsched/sim.hpp"

namespace carbonsched {

struct PolicyRunSummary {
  std::string name;
  double total_emissions_g = 0.0;
  std::optional<double> reduction_vs_baseline;  // absent without a baseline run
  double mean_latency_ms = 0.0;
  double p95_latency_ms = 0.0;
  long long total_overloads = 0;
  long long total_unserved_planned = 0;
  std::vector<double> mean_servers;  // per region
};

struct ComparisonReport {
  std::vector<PolicyRunSummary> entries;
};

/// Runs every policy with the same seed and traces so workload realizations
/// are identical and differences are attributable to policy alone. The first
/// latency-baseline entry anchors reduction_vs_baseline; without one,
/// reductions are omitted.
ComparisonReport run_sweep(const std::vector<PolicySpec>& policies,
                           const SimConfig& base_config, const TraceSet& traces,
                           std::vector<SimulationResult>* runs_out = nullptr);

}  // namespace carbonsched
