// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "carbonsched/report.hpp"
#include "test_util.hpp"

using namespace carbonsched;
using nlohmann::json;

namespace {

SimulationResult small_run(const TraceSet& ts, PolicyKind kind) {
  SimConfig config;
  config.hours = 2;
  config.seed = 3;
  config.policy.kind = kind;
  config.policy.slo_ms = 100.0;
  config.policy.capacity_per_server = {100};
  config.policy.max_total_servers = 500;
  return run_simulation(config, ts);
}

}  // namespace

TEST_CASE("plans round-trip through their JSON wire format") {
  TraceSet ts = testutil::bundled_traces();
  SimulationResult result = small_run(ts, PolicyKind::carbon_slo);
  const ProvisioningPlan& plan = result.hourly[1].plan;

  json j = plan_to_json(plan);
  for (const char* key :
       {"hour", "s", "x", "unserved", "objective", "carbon_term", "server_term"})
    CHECK(j.contains(key));

  ProvisioningPlan back = plan_from_json(j);
  CHECK(back.hour == plan.hour);
  CHECK(back.routed == plan.routed);
  CHECK(back.servers == plan.servers);
  CHECK(back.unserved == plan.unserved);
  CHECK(back.objective == plan.objective);
}

TEST_CASE("weights serialize with their aggregate factors") {
  TraceSet ts = testutil::bundled_traces();
  SimulationResult result = small_run(ts, PolicyKind::carbon_slo);
  json j = weights_to_json(result.hourly[0].weights);
  CHECK(j.contains("hour"));
  CHECK(j.contains("w"));
  CHECK(j.contains("f"));
  CHECK(j.contains("t"));
  CHECK(j["w"].size() == 6);
}

TEST_CASE("hourly CSV embeds the manifest and one row per region-hour") {
  TraceSet ts = testutil::bundled_traces();
  SimulationResult result = small_run(ts, PolicyKind::latency_baseline);
  RunManifest manifest;
  manifest.seed = 3;
  std::string csv = hourly_csv(result, ts.regions, manifest);

  std::istringstream in(csv);
  std::string line;
  int comments = 0, rows = 0;
  bool header_seen = false;
  bool manifest_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      ++comments;
      if (line.find("manifest") != std::string::npos) manifest_seen = true;
      continue;
    }
    if (!header_seen) {
      CHECK(line ==
            "hour,region,originated,served,emissions_g,utilization,overloads,"
            "mean_latency_ms");
      header_seen = true;
      continue;
    }
    ++rows;
  }
  CHECK(manifest_seen);
  CHECK(comments >= 2);
  CHECK(rows == 2 * 6);
}

TEST_CASE("summary JSON echoes the manifest and totals") {
  TraceSet ts = testutil::bundled_traces();
  SimConfig config;
  config.hours = 2;
  config.seed = 3;
  config.policy.kind = PolicyKind::carbon_slo;
  config.policy.slo_ms = 100.0;
  config.policy.capacity_per_server = {100};
  config.policy.max_total_servers = 500;
  SimulationResult result = run_simulation(config, ts);

  RunManifest manifest;
  manifest.seed = 3;
  manifest.hours = 2;
  json j = summary_to_json(result, ts.regions, config, manifest);
  CHECK(j["manifest"]["seed"] == 3);
  CHECK(j["manifest"]["tool_version"] == kToolVersion);
  CHECK(j["policy"] == "carbon-100");
  CHECK(j["totals"]["requests"] == result.summary.total_requests);
  CHECK(j["per_region"].size() == 6);
}

TEST_CASE("comparison JSON carries reductions only when a baseline ran") {
  TraceSet ts = testutil::bundled_traces();
  SimConfig config;
  config.hours = 2;
  config.seed = 3;
  config.policy.kind = PolicyKind::latency_baseline;
  config.policy.capacity_per_server = {100};
  config.policy.max_total_servers = 500;

  PolicySpec carbon;
  carbon.kind = PolicyKind::carbon_slo;
  carbon.slo_ms = 100.0;
  carbon.capacity_per_server = {100};
  carbon.max_total_servers = 500;

  RunManifest manifest;
  ComparisonReport with_baseline =
      run_sweep({config.policy, carbon}, config, ts);
  json j = comparison_to_json(with_baseline, ts.regions, manifest);
  REQUIRE(j["policies"].size() == 2);
  CHECK(j["policies"][1].contains("reduction_vs_baseline"));

  ComparisonReport without_baseline = run_sweep({carbon}, config, ts);
  json j2 = comparison_to_json(without_baseline, ts.regions, manifest);
  CHECK(!j2["policies"][0].contains("reduction_vs_baseline"));
}
