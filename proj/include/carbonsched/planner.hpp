// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "carbonsched/traces.hpp"

namespace carbonsched {

/// One hour's provisioning inputs. Demands are whole requests for the hour.
struct ProvisioningProblem {
  std::vector<double> intensity;        // g CO2eq/kWh per region
  std::vector<long long> demand;        // expected requests originating per region
  LatencyMatrix latency;                // ms
  double slo_ms = 0;                    // > 0; +inf disables the latency gate
  std::vector<long long> capacity_per_server;  // requests/hour each server absorbs
  long long max_total_servers = 0;      // global cap across regions
  double carbon_weight = 0.5;           // 0 = servers only, 1 = carbon only

  int region_count() const { return static_cast<int>(intensity.size()); }
};

struct PlanParams {
  double carbon_weight = 0.5;
  double slo_ms = 100.0;
  std::vector<long long> capacity_per_server;
  long long max_total_servers = 500;
};

/// Converts a requests-per-second forecast into whole requests per hour,
/// rounding half up.
long long expected_arrivals(double rate_rps);

/// Validates shapes/ranges and assembles the hourly problem. The workload
/// forecast is in requests/second (trace units) and is converted here.
ProvisioningProblem build_problem(const RegionSet& rs,
                                  const std::vector<double>& carbon_forecast,
                                  const std::vector<double>& workload_forecast_rps,
                                  const LatencyMatrix& latency,
                                  const PlanParams& params);

/// Solver output for one hour. All counts are integers; `unserved` is demand
/// that had no feasible placement (capacity/SLO limits).
struct ProvisioningPlan {
  long long hour = 0;
  std::vector<std::vector<long long>> routed;  // [origin][destination] requests
  std::vector<long long> servers;              // per destination
  std::vector<long long> unserved;             // per origin
  double objective = 0.0;
  double carbon_term = 0.0;    // sum_j intensity_j * inbound_j (raw scale)
  long long server_term = 0;   // sum_j servers_j
};

/// Origin/destination pairs whose latency is within the SLO; routing outside
/// this set is forbidden.
std::vector<std::pair<int, int>> feasible_arcs(const ProvisioningProblem& p);

/// Unserved-demand penalty per request, in normalized objective units. Large
/// enough that serving a request is always preferred when feasible.
inline double unserved_penalty(int region_count) { return 10.0 * region_count; }

/// Recomputes objective / carbon_term / server_term from the plan's counts.
void annotate_plan(const ProvisioningProblem& p, ProvisioningPlan& plan);

/// Exact solve of the hourly provisioning problem: minimizes
///   carbon_weight * C + (1 - carbon_weight) * S + penalty * unserved
/// where C is the carbon term normalized by (max intensity * total demand)
/// and S is the server count normalized by the global cap. Deterministic;
/// among equal-objective routings for the chosen destination loads it returns
/// the one with minimum total latency.
ProvisioningPlan solve_plan(const ProvisioningProblem& p);

enum class PlanRule {
  demand_conservation,  // routed row + unserved == demand
  capacity,             // inbound <= servers * capacity
  server_budget,        // total servers <= global cap
  slo_arc,              // no routing over arcs beyond the SLO
  idle_servers,         // zero inbound forces zero servers
  negativity,           // all counts >= 0
};

const char* plan_rule_name(PlanRule rule);

struct RuleViolation {
  PlanRule rule;
  std::string detail;
};

/// Checks every plan invariant independently of the solver; empty means valid.
std::vector<RuleViolation> verify_plan(const ProvisioningProblem& p,
                                       const ProvisioningPlan& plan);

/// Exhaustive reference solver. Guards against anything beyond toy size
/// (n <= 3, cap <= 4, demand <= 6, capacity/server <= 3) and otherwise
/// enumerates every feasible integer assignment. Test oracle; shares no
/// search code with solve_plan.
ProvisioningPlan solve_exhaustive(const ProvisioningProblem& p);

}  // namespace carbonsched
