// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "carbonsched/report.hpp"
#include "carbonsched/sim.hpp"
#include "test_util.hpp"

using namespace carbonsched;

namespace {

TraceSet make_traces(std::vector<std::string> names,
                     std::vector<double> latency_row_major,
                     std::vector<std::vector<double>> carbon,
                     std::vector<std::vector<double>> workload_rps) {
  TraceSet ts;
  ts.regions = RegionSet(std::move(names));
  ts.latency = LatencyMatrix(ts.regions.size(), std::move(latency_row_major));
  ts.carbon = HourlyTrace(0, std::move(carbon));
  ts.workload = HourlyTrace(0, std::move(workload_rps));
  return ts;
}

SimConfig carbon_config(double slo_ms, long long hours, std::uint64_t seed) {
  SimConfig config;
  config.hours = hours;
  config.seed = seed;
  config.policy.kind = PolicyKind::carbon_slo;
  config.policy.slo_ms = slo_ms;
  config.policy.carbon_weight = 0.5;
  config.policy.capacity_per_server = {100};
  config.policy.max_total_servers = 500;
  return config;
}

}  // namespace

TEST_CASE("zero rate generates an all-zero arrival vector") {
  Rng rng(1);
  auto counts = generate_arrivals(0.0, 60, rng);
  CHECK(counts.size() == 60);
  for (long long c : counts) CHECK(c == 0);
}

TEST_CASE("arrival counts stay within 1.5x the per-timestep mean") {
  // 6000 requests/hour over 60 timesteps: mean 100, hard ceiling 150.
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    Rng rng(seed);
    auto counts = generate_arrivals(6000.0, 60, rng);
    for (long long c : counts) {
      CHECK(c >= 0);
      CHECK(c <= 150);
    }
  }
}

TEST_CASE("seed 42 reproduces the golden arrival vector") {
  const std::vector<long long> golden{
      141, 102, 139, 15,  10, 85,  47, 32,  49, 1,  74, 116, 101, 140, 60,
      5,   7,   138, 16,  55, 11,  16, 10,  76, 59, 148, 13,  137, 39,  139,
      4,   136, 54,  35,  2,  120, 62, 77,  67, 24, 93, 68,  48,  110, 54,
      57,  10,  8,   65,  59, 90,  97, 86,  65, 68, 59, 37,  35,  74,  45};
  Rng rng(42);
  CHECK(generate_arrivals(6000.0, 60, rng) == golden);
}

TEST_CASE("single region with constant traces serves everything locally") {
  TraceSet ts = make_traces({"only"}, {2.0}, {{100, 100, 100}},
                            {{0.5, 0.5, 0.5}});
  SimConfig config;
  config.hours = 3;
  config.seed = 7;
  config.policy.kind = PolicyKind::latency_baseline;
  config.policy.capacity_per_server = {100};
  config.policy.max_total_servers = 500;

  SimulationResult result = run_simulation(config, ts);
  REQUIRE(result.hourly.size() == 3);
  for (const HourlyReport& hr : result.hourly) {
    CHECK(hr.regions[0].originated == hr.regions[0].served);
    if (hr.regions[0].served > 0) {
      CHECK(hr.mean_latency_ms == 2.0);
      CHECK(hr.p95_latency_ms == 2.0);
    }
    CHECK(hr.regions[0].overloads == 0);
  }
  CHECK(result.summary.mean_latency_ms == 2.0);
}

TEST_CASE("an hour beyond the traces raises TraceExhausted") {
  TraceSet ts = make_traces({"only"}, {2.0}, {{100}}, {{0.5}});
  SimConfig config = carbon_config(50.0, 1, 1);
  SimState state(config.seed);
  CHECK_THROWS_WITH_AS(run_hour(5, ts, config, state),
                       doctest::Contains("TraceExhausted"), Error);
  SimConfig too_long = carbon_config(50.0, 2, 1);
  CHECK_THROWS_WITH_AS(run_simulation(too_long, ts),
                       doctest::Contains("TraceExhausted"), Error);
}

TEST_CASE("dirty-region demand is served in the green region when reachable") {
  TraceSet ts = make_traces({"dirty", "green"}, {1, 10, 10, 1},
                            {{500, 500}, {50, 50}}, {{1.0, 1.0}, {0.2, 0.2}});
  SimConfig config = carbon_config(20.0, 2, 42);
  SimulationResult result = run_simulation(config, ts);
  for (const HourlyReport& hr : result.hourly) {
    long long from_dirty = hr.regions[0].originated;
    long long to_green = hr.served_pairs[0][1];
    if (from_dirty == 0) continue;
    CHECK(static_cast<double>(to_green) / from_dirty >= 0.95);
  }
}

TEST_CASE("every generated request is served exactly once") {
  TraceSet ts = testutil::bundled_traces();
  SimConfig config = carbon_config(100.0, 4, 99);
  SimulationResult result = run_simulation(config, ts);
  for (const HourlyReport& hr : result.hourly) {
    long long originated = 0, served = 0, pairs = 0;
    for (const RegionHourStats& stats : hr.regions) {
      originated += stats.originated;
      served += stats.served;
    }
    for (const auto& row : hr.served_pairs)
      for (long long c : row) pairs += c;
    CHECK(originated == served);
    CHECK(originated == pairs);
  }
}

TEST_CASE("capacity is respected except for counted overloads") {
  TraceSet ts = testutil::bundled_traces();
  SimConfig config = carbon_config(500.0, 6, 5);
  SimulationResult result = run_simulation(config, ts);
  const int n = ts.regions.size();
  for (const HourlyReport& hr : result.hourly) {
    for (int j = 0; j < n; ++j) {
      long long cap = hr.plan.servers[j] * 100;
      CHECK(hr.regions[j].served <= cap + hr.regions[j].overloads);
    }
  }
}

TEST_CASE("total emissions decompose into served * intensity * energy") {
  TraceSet ts = testutil::bundled_traces();
  SimConfig config = carbon_config(100.0, 5, 11);
  SimulationResult result = run_simulation(config, ts);
  double expected = 0.0;
  for (const HourlyReport& hr : result.hourly)
    for (int r = 0; r < ts.regions.size(); ++r)
      expected += static_cast<double>(hr.regions[r].served) *
                  ts.carbon.at(r, hr.hour) * config.energy_per_request_kwh;
  CHECK(result.summary.total_emissions_g ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("identical configs give byte-identical serialized reports") {
  TraceSet ts = testutil::bundled_traces();
  SimConfig config = carbon_config(100.0, 3, 2024);
  RunManifest manifest;
  SimulationResult a = run_simulation(config, ts);
  SimulationResult b = run_simulation(config, ts);
  CHECK(hourly_csv(a, ts.regions, manifest) == hourly_csv(b, ts.regions, manifest));
  CHECK(summary_to_json(a, ts.regions, config, manifest).dump() ==
        summary_to_json(b, ts.regions, config, manifest).dump());
  CHECK(plans_jsonl(a) == plans_jsonl(b));
}

TEST_CASE("different seeds change the workload realization") {
  TraceSet ts = testutil::bundled_traces();
  SimulationResult a = run_simulation(carbon_config(100.0, 2, 1), ts);
  SimulationResult b = run_simulation(carbon_config(100.0, 2, 2), ts);
  long long total_a = 0, total_b = 0;
  for (const auto& hr : a.hourly)
    for (const auto& s : hr.regions) total_a += s.originated;
  for (const auto& hr : b.hourly)
    for (const auto& s : hr.regions) total_b += s.originated;
  CHECK(total_a != total_b);
}

TEST_CASE("a zero-hour simulation returns empty reports and zero totals") {
  TraceSet ts = testutil::bundled_traces();
  SimConfig config = carbon_config(100.0, 0, 1);
  SimulationResult result = run_simulation(config, ts);
  CHECK(result.hourly.empty());
  CHECK(result.summary.total_requests == 0);
  CHECK(result.summary.total_emissions_g == 0.0);
}

TEST_CASE("persistence forecasting still serves all load on day one") {
  TraceSet ts = testutil::bundled_traces();
  SimConfig config = carbon_config(100.0, 3, 31);
  config.carbon_forecaster = ForecastKind::persistence;
  config.workload_forecaster = ForecastKind::persistence;
  SimulationResult result = run_simulation(config, ts);
  for (const HourlyReport& hr : result.hourly) {
    long long originated = 0, served = 0;
    for (const RegionHourStats& stats : hr.regions) {
      originated += stats.originated;
      served += stats.served;
    }
    CHECK(originated == served);
  }
}
