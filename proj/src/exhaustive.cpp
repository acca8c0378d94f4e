// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

//
// Exhaustive reference solver. Enumerates every integer-feasible combination
// of server counts and request assignments for toy-sized problems. Used as
// the optimality oracle in tests; intentionally shares no code with the
// production solver beyond the objective definition.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "carbonsched/planner.hpp"

namespace carbonsched {

namespace {

struct Enumerator {
  const ProvisioningProblem& p;
  int n;
  double alpha;
  double penalty;
  double norm;           // max intensity * total demand (0 disables the term)
  double server_unit;    // (1 - alpha) / max servers

  std::vector<std::vector<bool>> feasible;  // [origin][destination]
  std::vector<long long> servers;
  std::vector<long long> cap_left;
  std::vector<std::vector<long long>> routed;
  std::vector<long long> inbound;
  std::vector<long long> unserved;

  double best_value = std::numeric_limits<double>::infinity();
  double best_latency = std::numeric_limits<double>::infinity();
  ProvisioningPlan best;
  bool found = false;

  explicit Enumerator(const ProvisioningProblem& problem)
      : p(problem), n(problem.region_count()), alpha(problem.carbon_weight),
        penalty(unserved_penalty(problem.region_count())) {
    long long total = 0;
    double i_max = 0.0;
    for (int i = 0; i < n; ++i) {
      total += p.demand[i];
      i_max = std::max(i_max, p.intensity[i]);
    }
    norm = i_max * static_cast<double>(total);
    server_unit = (1.0 - alpha) / static_cast<double>(p.max_total_servers);
    feasible.assign(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        feasible[i][j] = p.latency.at(i, j) <= p.slo_ms;
    servers.assign(n, 0);
    routed.assign(n, std::vector<long long>(n, 0));
    inbound.assign(n, 0);
    unserved.assign(n, 0);
  }

  double carbon_norm() const {
    if (norm <= 0) return 0.0;
    double carbon = 0.0;
    for (int j = 0; j < n; ++j)
      carbon += p.intensity[j] * static_cast<double>(inbound[j]);
    return carbon / norm;
  }

  double assignment_value() const {
    long long total_servers = 0, total_unserved = 0;
    for (int j = 0; j < n; ++j) total_servers += servers[j];
    for (int i = 0; i < n; ++i) total_unserved += unserved[i];
    return alpha * carbon_norm() +
           server_unit * static_cast<double>(total_servers) +
           penalty * static_cast<double>(total_unserved);
  }

  double total_latency() const {
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        sum += static_cast<double>(routed[i][j]) * p.latency.at(i, j);
    return sum;
  }

  void consider_leaf() {
    // Zero inbound forces zero servers.
    for (int j = 0; j < n; ++j)
      if (servers[j] > 0 && inbound[j] == 0) return;
    double value = assignment_value();
    if (value > best_value + 1e-12) return;
    double latency = total_latency();
    bool better = false;
    if (!found || value < best_value - 1e-12) {
      better = true;
    } else if (latency < best_latency - 1e-9) {
      better = true;
    } else if (latency <= best_latency + 1e-9) {
      // Final tie-break: lexicographically smaller (servers, routed).
      if (servers < best.servers ||
          (servers == best.servers && routed < best.routed))
        better = true;
    }
    if (!better) return;
    found = true;
    best_value = value;
    best_latency = latency;
    best.routed = routed;
    best.servers = servers;
    best.unserved = unserved;
  }

  void assign_origin(int i) {
    if (i == n) {
      consider_leaf();
      return;
    }
    distribute(i, 0, p.demand[i]);
  }

  // Distribute origin i's remaining demand over destinations j.. ; whatever
  // is left at the end goes unserved. Partial costs only grow, so branches
  // already above the incumbent are cut.
  void distribute(int i, int j, long long remaining) {
    if (j == n) {
      unserved[i] = remaining;
      if (assignment_value() <= best_value + 1e-12) assign_origin(i + 1);
      unserved[i] = 0;
      return;
    }
    long long room = feasible[i][j] ? std::min(remaining, cap_left[j]) : 0;
    for (long long amount = 0; amount <= room; ++amount) {
      routed[i][j] = amount;
      inbound[j] += amount;
      cap_left[j] -= amount;
      distribute(i, j + 1, remaining - amount);
      routed[i][j] = 0;
      inbound[j] -= amount;
      cap_left[j] += amount;
    }
  }

  void enumerate_assignments() {
    cap_left.assign(n, 0);
    for (int j = 0; j < n; ++j)
      cap_left[j] = servers[j] * p.capacity_per_server[j];
    assign_origin(0);
  }

  void enumerate_servers(int j, long long budget_left) {
    if (j == n) {
      enumerate_assignments();
      return;
    }
    for (long long s = 0; s <= budget_left; ++s) {
      servers[j] = s;
      enumerate_servers(j + 1, budget_left - s);
    }
    servers[j] = 0;
  }
};

}  // namespace

ProvisioningPlan solve_exhaustive(const ProvisioningProblem& p) {
  const int n = p.region_count();
  if (n > 3)
    raise(errc::instance_too_large, "exhaustive solver handles n <= 3");
  if (p.max_total_servers > 4)
    raise(errc::instance_too_large, "exhaustive solver handles max servers <= 4");
  for (long long d : p.demand)
    if (d > 6)
      raise(errc::instance_too_large, "exhaustive solver handles demand <= 6");
  for (long long c : p.capacity_per_server)
    if (c > 3)
      raise(errc::instance_too_large,
            "exhaustive solver handles capacity/server <= 3");

  Enumerator e(p);
  e.enumerate_servers(0, p.max_total_servers);

  ProvisioningPlan plan;
  plan.routed = e.best.routed;
  plan.servers = e.best.servers;
  plan.unserved = e.best.unserved;
  annotate_plan(p, plan);
  return plan;
}

}  // namespace carbonsched
