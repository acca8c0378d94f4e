// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "carbonsched/planner.hpp"
#include "carbonsched/rng.hpp"

namespace carbonsched {

/// Per-origin routing probabilities derived from an hourly plan. Row i is the
/// distribution over destinations for requests arriving at region i; a row is
/// all-zero when the plan routed nothing from that origin (dispatch then
/// falls back to serving locally).
struct RoutingWeights {
  long long hour = 0;
  std::vector<std::vector<double>> weights;   // w[i][j]
  std::vector<double> inbound_fraction;       // share of all routed requests per destination
  std::vector<long long> inbound_total;       // routed requests per destination
};

RoutingWeights derive_weights(const ProvisioningPlan& plan);

/// Runtime capacity accounting for one simulated hour. `served` may exceed
/// `capacity` only through the local-overload path, which bumps `overloads`.
struct RegionLoadState {
  std::vector<long long> served;
  std::vector<long long> capacity;   // servers * capacity_per_server
  std::vector<long long> overloads;

  explicit RegionLoadState(const ProvisioningPlan& plan,
                           const ProvisioningProblem& p);
};

enum class DispatchOutcome { planned, spillover, local_overload };

struct DispatchResult {
  int destination;
  DispatchOutcome outcome;
};

/// Routes one request: samples a destination from the weight row, serves it
/// there if capacity remains, otherwise spills over to the lowest-carbon
/// SLO-feasible region with spare capacity (ties: lower latency, then lower
/// index), and as a last resort serves at the origin past its capacity.
DispatchResult dispatch(int origin, const RoutingWeights& weights,
                        RegionLoadState& state, const ProvisioningProblem& p,
                        Rng& rng);

}  // namespace carbonsched
