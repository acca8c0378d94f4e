// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "carbonsched/policy.hpp"
#include "carbonsched/router.hpp"
#include "carbonsched/traces.hpp"

namespace carbonsched {

struct SimConfig {
  long long hours = 24;
  int timesteps_per_hour = 60;
  std::uint64_t seed = 0;
  double energy_per_request_kwh = 1e-4;
  PolicySpec policy;
  ForecastKind carbon_forecaster = ForecastKind::oracle;
  ForecastKind workload_forecaster = ForecastKind::oracle;
};

void validate_config(const SimConfig& config);

struct RegionHourStats {
  long long originated = 0;       // requests arriving at this region
  long long served = 0;           // requests executed at this region
  double emissions_g = 0.0;       // served * intensity(hour) * energy/request
  double utilization = 0.0;       // served / (servers * capacity); 0 when no servers
  long long overloads = 0;        // local-overload serves past capacity
  long long unserved_planned = 0; // plan's unserved count for this origin
  double mean_latency_ms = 0.0;   // mean over requests originated here
};

struct HourlyReport {
  long long hour = 0;
  std::vector<RegionHourStats> regions;
  double mean_latency_ms = 0.0;  // over all served requests this hour
  double p95_latency_ms = 0.0;
  long long slo_violations = 0;  // local-overload serves whose local latency breaks the SLO
  ProvisioningPlan plan;
  RoutingWeights weights;
  // Requests dispatched origin->destination this hour; the latency stats above
  // are derived from these counts.
  std::vector<std::vector<long long>> served_pairs;
};

struct SummaryReport {
  long long hours = 0;
  long long total_requests = 0;
  double total_emissions_g = 0.0;
  double mean_latency_ms = 0.0;
  double p95_latency_ms = 0.0;
  long long total_overloads = 0;
  long long total_slo_violations = 0;
  long long total_unserved_planned = 0;
  std::vector<double> mean_servers;       // per region, averaged over hours
  std::vector<long long> total_servers;   // per region, summed over hours
};

struct SimulationResult {
  std::vector<HourlyReport> hourly;
  SummaryReport summary;
};

/// Per-timestep request counts for one origin-hour. Each timestep count is an
/// exponential draw with mean rate/timesteps, re-drawn while it exceeds
/// 1.5x that mean, then rounded. The truncation biases the realized mean to
/// ~0.569x the nominal rate; reports state this.
std::vector<long long> generate_arrivals(double lam_per_hour, int timesteps,
                                         Rng& rng);

/// RNG streams carried across hours. Arrivals and dispatch draw from separate
/// streams so the workload realization is identical across policies run with
/// the same seed.
struct SimState {
  Rng arrivals_rng;
  Rng dispatch_rng;

  explicit SimState(std::uint64_t seed)
      : arrivals_rng(mix64(seed ^ 0x61727276ULL)),
        dispatch_rng(mix64(seed ^ 0x64737063ULL)) {}
};

/// One simulated hour: forecast, plan, derive weights, then generate and
/// dispatch every request. Every generated request is served exactly once.
HourlyReport run_hour(long long hour, const TraceSet& traces,
                      const SimConfig& config, SimState& state);

SimulationResult run_simulation(const SimConfig& config, const TraceSet& traces);

}  // namespace carbonsched
