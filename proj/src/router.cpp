// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#include "carbonsched/router.hpp"

#include <algorithm>

namespace carbonsched {

RoutingWeights derive_weights(const ProvisioningPlan& plan) {
  const int n = static_cast<int>(plan.routed.size());
  RoutingWeights out;
  out.hour = plan.hour;
  out.weights.assign(n, std::vector<double>(n, 0.0));
  out.inbound_fraction.assign(n, 0.0);
  out.inbound_total.assign(n, 0);

  long long grand_total = 0;
  for (int i = 0; i < n; ++i) {
    long long row_total = 0;
    for (int j = 0; j < n; ++j) row_total += plan.routed[i][j];
    if (row_total > 0) {
      for (int j = 0; j < n; ++j)
        out.weights[i][j] = static_cast<double>(plan.routed[i][j]) /
                            static_cast<double>(row_total);
    }
    // rows with no planned traffic stay all-zero; dispatch serves locally
    for (int j = 0; j < n; ++j) out.inbound_total[j] += plan.routed[i][j];
    grand_total += row_total;
  }
  if (grand_total > 0)
    for (int j = 0; j < n; ++j)
      out.inbound_fraction[j] = static_cast<double>(out.inbound_total[j]) /
                                static_cast<double>(grand_total);
  return out;
}

RegionLoadState::RegionLoadState(const ProvisioningPlan& plan,
                                 const ProvisioningProblem& p) {
  const int n = p.region_count();
  served.assign(n, 0);
  overloads.assign(n, 0);
  capacity.assign(n, 0);
  for (int j = 0; j < n; ++j)
    capacity[j] = plan.servers[j] * p.capacity_per_server[j];
}

DispatchResult dispatch(int origin, const RoutingWeights& weights,
                        RegionLoadState& state, const ProvisioningProblem& p,
                        Rng& rng) {
  const int n = p.region_count();
  const auto& row = weights.weights[origin];

  // Sample the planned destination; an all-zero row falls back to local.
  int target = origin;
  double row_sum = 0.0;
  for (double w : row) row_sum += w;
  if (row_sum > 0.0) {
    double u = rng.uniform() * row_sum;
    double cum = 0.0;
    target = -1;
    for (int j = 0; j < n; ++j) {
      if (row[j] <= 0.0) continue;
      cum += row[j];
      target = j;
      if (u < cum) break;
    }
  }

  if (state.served[target] < state.capacity[target]) {
    ++state.served[target];
    return {target, DispatchOutcome::planned};
  }

  // Spillover: greenest SLO-feasible region with spare capacity; ties go to
  // lower latency, then lower index.
  int alt = -1;
  for (int j = 0; j < n; ++j) {
    if (p.latency.at(origin, j) > p.slo_ms) continue;
    if (state.served[j] >= state.capacity[j]) continue;
    if (alt < 0 || p.intensity[j] < p.intensity[alt] ||
        (p.intensity[j] == p.intensity[alt] &&
         p.latency.at(origin, j) < p.latency.at(origin, alt)))
      alt = j;
  }
  if (alt >= 0) {
    ++state.served[alt];
    return {alt, DispatchOutcome::spillover};
  }

  ++state.served[origin];
  ++state.overloads[origin];
  return {origin, DispatchOutcome::local_overload};
}

}  // namespace carbonsched
