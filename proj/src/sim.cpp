// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#include "carbonsched/sim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace carbonsched {

namespace {

// Nearest-rank percentile over latency values weighted by request counts.
double percentile_from_pairs(const std::vector<std::vector<long long>>& pairs,
                             const LatencyMatrix& latency, double q) {
  const int n = latency.size();
  std::vector<std::pair<double, long long>> buckets;
  long long total = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (pairs[i][j] <= 0) continue;
      buckets.emplace_back(latency.at(i, j), pairs[i][j]);
      total += pairs[i][j];
    }
  }
  if (total == 0) return 0.0;
  std::sort(buckets.begin(), buckets.end());
  long long rank = static_cast<long long>(std::ceil(q * static_cast<double>(total)));
  rank = std::max<long long>(rank, 1);
  long long seen = 0;
  for (const auto& [ms, count] : buckets) {
    seen += count;
    if (seen >= rank) return ms;
  }
  return buckets.back().first;
}

double mean_from_pairs(const std::vector<std::vector<long long>>& pairs,
                       const LatencyMatrix& latency) {
  const int n = latency.size();
  double sum = 0.0;
  long long total = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      sum += static_cast<double>(pairs[i][j]) * latency.at(i, j);
      total += pairs[i][j];
    }
  }
  return total > 0 ? sum / static_cast<double>(total) : 0.0;
}

}  // namespace

void validate_config(const SimConfig& config) {
  if (config.hours < 0) raise(errc::invalid_param, "hours must be >= 0");
  if (config.timesteps_per_hour < 1)
    raise(errc::invalid_param, "timesteps_per_hour must be >= 1");
  if (!(config.energy_per_request_kwh > 0.0))
    raise(errc::invalid_param, "energy_per_request_kwh must be > 0");
  validate_policy(config.policy);
}

std::vector<long long> generate_arrivals(double lam_per_hour, int timesteps,
                                         Rng& rng) {
  if (timesteps < 1) raise(errc::invalid_param, "timesteps must be >= 1");
  if (lam_per_hour < 0)
    raise(errc::invalid_param, "arrival rate must be >= 0");
  std::vector<long long> out(timesteps, 0);
  if (lam_per_hour == 0.0) return out;
  const double mean = lam_per_hour / timesteps;
  const double cap = 1.5 * mean;
  for (int t = 0; t < timesteps; ++t) {
    double draw;
    do {
      draw = -mean * std::log1p(-rng.uniform());
    } while (draw > cap);
    out[t] = std::llround(draw);
  }
  return out;
}

HourlyReport run_hour(long long hour, const TraceSet& traces,
                      const SimConfig& config, SimState& state) {
  const int n = traces.regions.size();
  if (!traces.workload.covers(hour) || !traces.carbon.covers(hour))
    raise(errc::trace_exhausted,
          "hour " + std::to_string(hour) + " is beyond the loaded traces");

  // Plan on forecasts; arrivals and emissions use the true trace values.
  Forecaster carbon_fc{config.carbon_forecaster};
  Forecaster workload_fc{config.workload_forecaster};
  std::vector<double> carbon_hat(n), workload_hat(n);
  for (int r = 0; r < n; ++r) {
    carbon_hat[r] = forecast(carbon_fc, traces.carbon, r, hour);
    workload_hat[r] = forecast(workload_fc, traces.workload, r, hour);
  }

  HourPlanOutcome planned =
      apply_policy(config.policy, traces.regions, carbon_hat, workload_hat,
                   traces.latency, hour);
  RoutingWeights weights = derive_weights(planned.plan);
  RegionLoadState load(planned.plan, planned.problem);

  // Arrival vectors are drawn for all origins up front, in index order, from
  // the dedicated arrivals stream: the realized workload is identical across
  // policies run with the same seed.
  std::vector<std::vector<long long>> arrivals(n);
  for (int r = 0; r < n; ++r)
    arrivals[r] = generate_arrivals(traces.workload.at(r, hour) * 3600.0,
                                    config.timesteps_per_hour,
                                    state.arrivals_rng);

  HourlyReport report;
  report.hour = hour;
  report.served_pairs.assign(n, std::vector<long long>(n, 0));
  report.regions.assign(n, RegionHourStats{});

  for (int t = 0; t < config.timesteps_per_hour; ++t) {
    for (int origin = 0; origin < n; ++origin) {
      for (long long k = 0; k < arrivals[origin][t]; ++k) {
        DispatchResult r = dispatch(origin, weights, load, planned.problem,
                                    state.dispatch_rng);
        ++report.served_pairs[origin][r.destination];
        if (r.outcome == DispatchOutcome::local_overload &&
            traces.latency.at(origin, origin) > planned.problem.slo_ms)
          ++report.slo_violations;
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    RegionHourStats& stats = report.regions[i];
    for (long long c : arrivals[i]) stats.originated += c;
    for (int j = 0; j < n; ++j) stats.served += report.served_pairs[j][i];
    stats.emissions_g = static_cast<double>(stats.served) *
                        traces.carbon.at(i, hour) *
                        config.energy_per_request_kwh;
    stats.utilization =
        load.capacity[i] > 0
            ? static_cast<double>(stats.served) /
                  static_cast<double>(load.capacity[i])
            : 0.0;
    stats.overloads = load.overloads[i];
    stats.unserved_planned = planned.plan.unserved[i];
    double lat_sum = 0.0;
    for (int j = 0; j < n; ++j)
      lat_sum += static_cast<double>(report.served_pairs[i][j]) *
                 traces.latency.at(i, j);
    stats.mean_latency_ms =
        stats.originated > 0 ? lat_sum / static_cast<double>(stats.originated)
                             : 0.0;
  }
  report.mean_latency_ms = mean_from_pairs(report.served_pairs, traces.latency);
  report.p95_latency_ms =
      percentile_from_pairs(report.served_pairs, traces.latency, 0.95);
  report.plan = std::move(planned.plan);
  report.weights = std::move(weights);
  return report;
}

SimulationResult run_simulation(const SimConfig& config,
                                const TraceSet& traces) {
  validate_config(config);
  const int n = traces.regions.size();
  SimulationResult result;
  SimState state(config.seed);
  for (long long hour = 0; hour < config.hours; ++hour)
    result.hourly.push_back(run_hour(hour, traces, config, state));

  SummaryReport& summary = result.summary;
  summary.hours = config.hours;
  summary.mean_servers.assign(n, 0.0);
  summary.total_servers.assign(n, 0);
  std::vector<std::vector<long long>> pairs(n, std::vector<long long>(n, 0));
  for (const HourlyReport& hr : result.hourly) {
    summary.total_slo_violations += hr.slo_violations;
    for (int i = 0; i < n; ++i) {
      const RegionHourStats& stats = hr.regions[i];
      summary.total_requests += stats.originated;
      summary.total_emissions_g += stats.emissions_g;
      summary.total_overloads += stats.overloads;
      summary.total_unserved_planned += stats.unserved_planned;
      summary.total_servers[i] += hr.plan.servers[i];
      for (int j = 0; j < n; ++j) pairs[i][j] += hr.served_pairs[i][j];
    }
  }
  if (config.hours > 0)
    for (int i = 0; i < n; ++i)
      summary.mean_servers[i] = static_cast<double>(summary.total_servers[i]) /
                                static_cast<double>(config.hours);
  summary.mean_latency_ms = mean_from_pairs(pairs, traces.latency);
  summary.p95_latency_ms = percentile_from_pairs(pairs, traces.latency, 0.95);
  return result;
}

}  // namespace carbonsched
