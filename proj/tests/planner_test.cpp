// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "carbonsched/planner.hpp"
#include "test_util.hpp"

using namespace carbonsched;
using testutil::make_problem;
using testutil::TempFile;

using testutil::random_small_problem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent minimum transportation cost for fixed server counts: enumerate
// every feasible routing of the demand and keep the best normalized value.
double best_value_for_servers(const ProvisioningProblem& p,
                              const std::vector<long long>& servers) {
  const int n = p.region_count();
  double i_max = 0.0;
  long long lam = 0;
  for (int j = 0; j < n; ++j) {
    i_max = std::max(i_max, p.intensity[j]);
    lam += p.demand[j];
  }
  const double norm = i_max * static_cast<double>(lam);
  long long server_total = 0;
  std::vector<long long> cap(n);
  for (int j = 0; j < n; ++j) {
    cap[j] = servers[j] * p.capacity_per_server[j];
    server_total += servers[j];
  }
  double best = kInf;
  std::vector<long long> inbound(n, 0);

  auto value = [&](long long unserved) {
    double carbon = 0.0;
    for (int j = 0; j < n; ++j)
      carbon += p.intensity[j] * static_cast<double>(inbound[j]);
    return p.carbon_weight * (norm > 0 ? carbon / norm : 0.0) +
           (1.0 - p.carbon_weight) * static_cast<double>(server_total) /
               static_cast<double>(p.max_total_servers) +
           unserved_penalty(n) * static_cast<double>(unserved);
  };

  // recurse over origins, then destinations
  std::function<void(int, int, long long, long long)> go =
      [&](int i, int j, long long remaining, long long unserved) {
        if (i == n) {
          for (int k = 0; k < n; ++k)
            if (servers[k] > 0 && inbound[k] == 0) return;
          best = std::min(best, value(unserved));
          return;
        }
        if (j == n) {
          go(i + 1, 0, i + 1 < n ? p.demand[i + 1] : 0, unserved + remaining);
          return;
        }
        long long room = p.latency.at(i, j) <= p.slo_ms
                             ? std::min(remaining, cap[j] - inbound[j])
                             : 0;
        for (long long amount = 0; amount <= room; ++amount) {
          inbound[j] += amount;
          go(i, j + 1, remaining - amount, unserved);
          inbound[j] -= amount;
        }
      };
  go(0, 0, p.demand[0], 0);
  return best;
}

}  // namespace

TEST_CASE("expected_arrivals rounds half up") {
  CHECK(expected_arrivals(2.5) == 9000);
  CHECK(expected_arrivals(1.0 / 7200.0) == 1);  // 0.5 requests
  CHECK(expected_arrivals(0.0) == 0);
}

TEST_CASE("build_problem assembles a valid six-region instance") {
  TraceSet traces = testutil::bundled_traces();
  const int n = traces.regions.size();
  std::vector<double> carbon(n), workload(n);
  for (int r = 0; r < n; ++r) {
    carbon[r] = traces.carbon.at(r, 0);
    workload[r] = traces.workload.at(r, 0);
  }
  PlanParams params{0.5, 100.0, {100}, 500};
  ProvisioningProblem p =
      build_problem(traces.regions, carbon, workload, traces.latency, params);
  CHECK(p.region_count() == 6);
  CHECK(p.capacity_per_server == std::vector<long long>(6, 100));
  for (int r = 0; r < n; ++r)
    CHECK(p.demand[r] == expected_arrivals(workload[r]));
}

TEST_CASE("build_problem accepts zero demand and rejects bad params") {
  TempFile regions("only\n");
  RegionSet rs = load_region_set(regions.path());
  LatencyMatrix lat(1, {1.0});
  PlanParams params{0.5, 50.0, {100}, 10};
  ProvisioningProblem p = build_problem(rs, {100.0}, {0.0}, lat, params);
  CHECK(p.demand[0] == 0);

  PlanParams bad_alpha{1.2, 50.0, {100}, 10};
  CHECK_THROWS_WITH_AS(build_problem(rs, {100.0}, {1.0}, lat, bad_alpha),
                       doctest::Contains("InvalidParam"), Error);
  PlanParams bad_cap{0.5, 50.0, {100, 100}, 10};
  CHECK_THROWS_WITH_AS(build_problem(rs, {100.0}, {1.0}, lat, bad_cap),
                       doctest::Contains("DimensionMismatch"), Error);
  CHECK_THROWS_WITH_AS(build_problem(rs, {100.0, 5.0}, {1.0}, lat, params),
                       doctest::Contains("DimensionMismatch"), Error);
}

TEST_CASE("feasible arcs pre-filter the latency gate") {
  // de, fr, sg with the bundled distances
  ProvisioningProblem p = make_problem(
      {460, 45, 500}, {100, 0, 0},
      {2, 10, 160, 10, 2, 280, 160, 280, 4}, 20.0, {100, 100, 100}, 500, 0.5);
  auto arcs = feasible_arcs(p);
  auto has = [&arcs](int i, int j) {
    return std::find(arcs.begin(), arcs.end(), std::make_pair(i, j)) != arcs.end();
  };
  CHECK(has(0, 1));        // de -> fr at 10ms
  CHECK(!has(0, 2));       // de -> sg at 160ms
  CHECK(arcs.size() == 5); // three diagonals + de<->fr

  p.slo_ms = 1e9;
  CHECK(feasible_arcs(p).size() == 9);

  p.slo_ms = 1.0;  // below every diagonal
  CHECK(feasible_arcs(p).empty());
}

TEST_CASE("single region with demand is forced local") {
  ProvisioningProblem p =
      make_problem({100}, {100}, {1}, 50.0, {100}, 10, 0.5);
  ProvisioningPlan plan = solve_plan(p);
  CHECK(plan.routed[0][0] == 100);
  CHECK(plan.servers == std::vector<long long>{1});
  CHECK(plan.unserved == std::vector<long long>{0});
  CHECK(verify_plan(p, plan).empty());
}

TEST_CASE("demand moves to the greener region when the SLO allows") {
  ProvisioningProblem p =
      make_problem({100, 10}, {100, 0}, {1, 20, 20, 1}, 20.0, {100, 100}, 5, 1.0);
  ProvisioningPlan plan = solve_plan(p);
  CHECK(plan.routed[0][1] == 100);
  CHECK(plan.routed[0][0] == 0);
  // With full carbon weight the server term costs nothing, but idle servers
  // are still forbidden.
  CHECK(plan.servers == std::vector<long long>{0, 1});
  CHECK(plan.unserved == std::vector<long long>{0, 0});
  CHECK(verify_plan(p, plan).empty());

  // Same shape scaled into the exhaustive solver's guard.
  ProvisioningProblem small =
      make_problem({100, 10}, {4, 0}, {1, 20, 20, 1}, 20.0, {2, 2}, 3, 1.0);
  ProvisioningPlan fast = solve_plan(small);
  ProvisioningPlan reference = solve_exhaustive(small);
  CHECK(fast.routed[0][1] == 4);
  CHECK(fast.objective == doctest::Approx(reference.objective).epsilon(1e-9));
}

TEST_CASE("green region out of SLO reach keeps demand local") {
  ProvisioningProblem p =
      make_problem({100, 10}, {100, 0}, {1, 30, 30, 1}, 20.0, {100, 100}, 5, 1.0);
  ProvisioningPlan plan = solve_plan(p);
  CHECK(plan.routed[0][0] == 100);
  CHECK(plan.servers == std::vector<long long>{1, 0});
  CHECK(verify_plan(p, plan).empty());

  ProvisioningProblem small =
      make_problem({100, 10}, {4, 0}, {1, 30, 30, 1}, 20.0, {2, 2}, 3, 1.0);
  ProvisioningPlan fast = solve_plan(small);
  ProvisioningPlan reference = solve_exhaustive(small);
  CHECK(fast.routed[0][0] == 4);
  CHECK(fast.objective == doctest::Approx(reference.objective).epsilon(1e-9));
}

TEST_CASE("no reachable destination leaves demand unserved") {
  ProvisioningProblem p =
      make_problem({100, 10}, {3, 2}, {5, 30, 30, 5}, 2.0, {2, 2}, 4, 0.5);
  ProvisioningPlan plan = solve_plan(p);
  CHECK(plan.unserved == std::vector<long long>{3, 2});
  CHECK(plan.server_term == 0);
  CHECK(plan.objective ==
        doctest::Approx(unserved_penalty(2) * 5.0).epsilon(1e-12));
  CHECK(verify_plan(p, plan).empty());
}

TEST_CASE("verify_plan reports constructed violations") {
  ProvisioningProblem p =
      make_problem({100}, {100}, {1}, 50.0, {100}, 10, 0.5);
  ProvisioningPlan plan = solve_plan(p);

  ProvisioningPlan no_servers = plan;
  no_servers.servers = {0};
  auto violations = verify_plan(p, no_servers);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].rule == PlanRule::capacity);

  ProvisioningProblem p2 = make_problem({100, 10}, {100, 0}, {1, 30, 30, 1},
                                        20.0, {100, 100}, 5, 1.0);
  ProvisioningPlan bad_arc = solve_plan(p2);
  bad_arc.routed[0][0] = 0;
  bad_arc.routed[0][1] = 100;  // 30ms arc with a 20ms ceiling
  bad_arc.servers = {0, 1};
  auto arc_violations = verify_plan(p2, bad_arc);
  REQUIRE(!arc_violations.empty());
  bool found = false;
  for (const auto& v : arc_violations) found |= v.rule == PlanRule::slo_arc;
  CHECK(found);
}

TEST_CASE("exhaustive solver enforces its size guard") {
  ProvisioningProblem p = make_problem(
      {1, 2, 3}, {1, 1, 1}, {1, 1, 1, 1, 1, 1, 1, 1, 1}, 5.0, {1, 1, 1}, 5, 0.5);
  CHECK_THROWS_WITH_AS(solve_exhaustive(p),
                       doctest::Contains("InstanceTooLarge"), Error);
  p.max_total_servers = 4;
  CHECK_NOTHROW(solve_exhaustive(p));
}

TEST_CASE("solver matches the exhaustive oracle on randomized instances") {
  std::mt19937_64 rng(20240811);
  for (int trial = 0; trial < 80; ++trial) {
    ProvisioningProblem p = random_small_problem(rng);
    CAPTURE(trial);
    ProvisioningPlan fast = solve_plan(p);
    ProvisioningPlan reference = solve_exhaustive(p);
    CHECK(std::abs(fast.objective - reference.objective) <= 1e-9);
    CHECK(verify_plan(p, fast).empty());
    CHECK(verify_plan(p, reference).empty());
  }
}

TEST_CASE("solver routing is a minimum-cost completion of its own servers") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    ProvisioningProblem p = random_small_problem(rng);
    CAPTURE(trial);
    ProvisioningPlan plan = solve_plan(p);
    double reference = best_value_for_servers(p, plan.servers);
    CHECK(std::abs(plan.objective - reference) <= 1e-9);
  }
}

TEST_CASE("relaxing the SLO never worsens the objective") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 30; ++trial) {
    ProvisioningProblem p = random_small_problem(rng);
    p.carbon_weight = trial % 2 == 0 ? 1.0 : 0.5;
    double previous_objective = kInf;
    long long previous_unserved = -1;
    double previous_carbon = kInf;
    for (double slo : {2.0, 8.0, 16.0, 32.0, 64.0, 2000.0}) {
      p.slo_ms = slo;
      ProvisioningPlan plan = solve_plan(p);
      CHECK(plan.objective <= previous_objective + 1e-9);
      long long unserved = 0;
      for (long long u : plan.unserved) unserved += u;
      // Carbon can only be compared while the served volume is unchanged:
      // a larger SLO may make previously unservable demand servable.
      if (p.carbon_weight == 1.0 && unserved == previous_unserved)
        CHECK(plan.carbon_term <= previous_carbon + 1e-9);
      previous_objective = plan.objective;
      previous_unserved = unserved;
      previous_carbon = plan.carbon_term;
    }
  }
}

TEST_CASE("zero demand produces the all-zero plan") {
  ProvisioningProblem p = make_problem({100, 200}, {0, 0}, {1, 5, 5, 1}, 10.0,
                                       {100, 100}, 5, 0.5);
  ProvisioningPlan plan = solve_plan(p);
  CHECK(plan.objective == 0.0);
  CHECK(plan.carbon_term == 0.0);
  CHECK(plan.server_term == 0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(plan.routed[i][j] == 0);
}

TEST_CASE("scaling all intensities leaves the chosen plan unchanged") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 25; ++trial) {
    ProvisioningProblem p = random_small_problem(rng);
    ProvisioningPlan base = solve_plan(p);
    ProvisioningProblem scaled = p;
    for (double& v : scaled.intensity) v *= 10.0;
    ProvisioningPlan plan = solve_plan(scaled);
    CHECK(plan.routed == base.routed);
    CHECK(plan.servers == base.servers);
    CHECK(plan.unserved == base.unserved);
  }
}

TEST_CASE("solves are deterministic") {
  std::mt19937_64 rng(999);
  for (int trial = 0; trial < 10; ++trial) {
    ProvisioningProblem p = random_small_problem(rng);
    ProvisioningPlan a = solve_plan(p);
    ProvisioningPlan b = solve_plan(p);
    CHECK(a.routed == b.routed);
    CHECK(a.servers == b.servers);
    CHECK(a.unserved == b.unserved);
    CHECK(a.objective == b.objective);
  }
}

TEST_CASE("objective decomposes into its reported terms") {
  ProvisioningProblem p = make_problem({300, 50}, {120, 40}, {2, 15, 15, 2},
                                       20.0, {100, 100}, 500, 0.5);
  ProvisioningPlan plan = solve_plan(p);
  long long lam = 160;
  double i_max = 300;
  long long unserved = plan.unserved[0] + plan.unserved[1];
  double expected = 0.5 * plan.carbon_term / (i_max * lam) +
                    0.5 * static_cast<double>(plan.server_term) / 500.0 +
                    unserved_penalty(2) * static_cast<double>(unserved);
  CHECK(plan.objective == doctest::Approx(expected).epsilon(1e-12));
}
