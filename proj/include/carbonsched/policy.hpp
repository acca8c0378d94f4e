// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "carbonsched/planner.hpp"

namespace carbonsched {

enum class PolicyKind {
  latency_baseline,  // serve everything locally, no redirection
  carbon_slo,        // carbon optimization under a latency ceiling
};

struct PolicySpec {
  PolicyKind kind = PolicyKind::carbon_slo;
  double slo_ms = 100.0;  // ignored by the latency baseline
  double carbon_weight = 0.5;
  std::vector<long long> capacity_per_server;
  long long max_total_servers = 500;

  std::string name() const;  // "latency" or "carbon-<L>"
};

/// Raises InvalidSpec for kind-specific problems (e.g. non-positive SLO on a
/// carbon policy).
void validate_policy(const PolicySpec& spec);

/// The hourly planning result a policy produces: the problem used for
/// dispatch-time decisions plus the plan to route by. The latency baseline
/// bypasses the solver with a fixed local plan (servers = ceil(demand /
/// capacity) per region) and carries an unbounded SLO in its problem.
struct HourPlanOutcome {
  ProvisioningProblem problem;
  ProvisioningPlan plan;
};

HourPlanOutcome apply_policy(const PolicySpec& spec, const RegionSet& rs,
                             const std::vector<double>& carbon_forecast,
                             const std::vector<double>& workload_forecast_rps,
                             const LatencyMatrix& latency, long long hour);

}  // namespace carbonsched
