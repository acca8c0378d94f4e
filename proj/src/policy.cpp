// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#include "carbonsched/policy.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace carbonsched {

std::string PolicySpec::name() const {
  if (kind == PolicyKind::latency_baseline) return "latency";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "carbon-%g", slo_ms);
  return buf;
}

void validate_policy(const PolicySpec& spec) {
  if (spec.kind == PolicyKind::carbon_slo &&
      !(spec.slo_ms > 0.0 && !std::isnan(spec.slo_ms)))
    raise(errc::invalid_spec, "carbon policy requires slo_ms > 0");
  if (!(spec.carbon_weight >= 0.0 && spec.carbon_weight <= 1.0))
    raise(errc::invalid_spec, "carbon_weight must be in [0, 1]");
  if (spec.capacity_per_server.empty())
    raise(errc::invalid_spec, "capacity_per_server is required");
  for (long long c : spec.capacity_per_server)
    if (c < 1) raise(errc::invalid_spec, "capacity_per_server must be >= 1");
  if (spec.max_total_servers < 1)
    raise(errc::invalid_spec, "max_total_servers must be >= 1");
}

HourPlanOutcome apply_policy(const PolicySpec& spec, const RegionSet& rs,
                             const std::vector<double>& carbon_forecast,
                             const std::vector<double>& workload_forecast_rps,
                             const LatencyMatrix& latency, long long hour) {
  validate_policy(spec);
  PlanParams params;
  params.carbon_weight = spec.carbon_weight;
  params.capacity_per_server = spec.capacity_per_server;
  params.max_total_servers = spec.max_total_servers;
  // The baseline never redirects, so its problem carries no latency gate;
  // dispatch-time spillover checks then accept any region.
  params.slo_ms = spec.kind == PolicyKind::latency_baseline
                      ? std::numeric_limits<double>::infinity()
                      : spec.slo_ms;

  HourPlanOutcome out{
      build_problem(rs, carbon_forecast, workload_forecast_rps, latency, params),
      {}};
  const int n = rs.size();
  if (spec.kind == PolicyKind::latency_baseline) {
    ProvisioningPlan plan;
    plan.hour = hour;
    plan.routed.assign(n, std::vector<long long>(n, 0));
    plan.servers.assign(n, 0);
    plan.unserved.assign(n, 0);
    for (int i = 0; i < n; ++i) {
      long long demand = out.problem.demand[i];
      long long capacity = out.problem.capacity_per_server[i];
      plan.routed[i][i] = demand;
      plan.servers[i] = demand == 0 ? 0 : (demand + capacity - 1) / capacity;
    }
    annotate_plan(out.problem, plan);
    out.plan = std::move(plan);
  } else {
    out.plan = solve_plan(out.problem);
    out.plan.hour = hour;
  }
  return out;
}

}  // namespace carbonsched
