// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "carbonsched/report.hpp"

namespace py = pybind11;
using namespace carbonsched;

namespace {

PolicySpec policy_from_kwargs(const std::string& kind, double slo_ms,
                              double alpha, long long capacity,
                              long long max_servers) {
  PolicySpec spec;
  spec.kind = kind == "latency" ? PolicyKind::latency_baseline
                                : PolicyKind::carbon_slo;
  spec.slo_ms = slo_ms;
  spec.carbon_weight = alpha;
  spec.capacity_per_server = {capacity};
  spec.max_total_servers = max_servers;
  return spec;
}

py::dict summary_dict(const SummaryReport& s) {
  py::dict d;
  d["hours"] = s.hours;
  d["total_requests"] = s.total_requests;
  d["total_emissions_g"] = s.total_emissions_g;
  d["mean_latency_ms"] = s.mean_latency_ms;
  d["p95_latency_ms"] = s.p95_latency_ms;
  d["total_overloads"] = s.total_overloads;
  d["total_slo_violations"] = s.total_slo_violations;
  d["total_unserved_planned"] = s.total_unserved_planned;
  d["mean_servers"] = s.mean_servers;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "carbon-aware provisioning and request-routing simulator";

  py::register_exception<Error>(m, "CarbonschedError");

  py::class_<RegionSet>(m, "RegionSet")
      .def_property_readonly("names", &RegionSet::names)
      .def("__len__", &RegionSet::size)
      .def("index_of", [](const RegionSet& rs, const std::string& name) {
        return rs.index_of(name);
      });

  py::class_<TraceSet>(m, "TraceSet")
      .def_property_readonly(
          "regions", [](const TraceSet& ts) { return ts.regions; })
      .def_property_readonly(
          "hours", [](const TraceSet& ts) { return ts.carbon.hour_count(); })
      .def("carbon_at", [](const TraceSet& ts, int region,
                           long long hour) { return ts.carbon.at(region, hour); })
      .def("workload_at", [](const TraceSet& ts, int region, long long hour) {
        return ts.workload.at(region, hour);
      })
      .def("latency_ms", [](const TraceSet& ts, int from, int to) {
        return ts.latency.at(from, to);
      });

  py::class_<ProvisioningProblem>(m, "ProvisioningProblem")
      .def_readonly("intensity", &ProvisioningProblem::intensity)
      .def_readonly("demand", &ProvisioningProblem::demand)
      .def_readonly("slo_ms", &ProvisioningProblem::slo_ms)
      .def_readonly("carbon_weight", &ProvisioningProblem::carbon_weight);

  py::class_<ProvisioningPlan>(m, "ProvisioningPlan")
      .def_readonly("hour", &ProvisioningPlan::hour)
      .def_readonly("routed", &ProvisioningPlan::routed)
      .def_readonly("servers", &ProvisioningPlan::servers)
      .def_readonly("unserved", &ProvisioningPlan::unserved)
      .def_readonly("objective", &ProvisioningPlan::objective)
      .def_readonly("carbon_term", &ProvisioningPlan::carbon_term)
      .def_readonly("server_term", &ProvisioningPlan::server_term)
      .def("to_json", [](const ProvisioningPlan& plan) {
        return plan_to_json(plan).dump();
      });

  py::class_<RoutingWeights>(m, "RoutingWeights")
      .def_readonly("hour", &RoutingWeights::hour)
      .def_readonly("weights", &RoutingWeights::weights)
      .def_readonly("inbound_fraction", &RoutingWeights::inbound_fraction)
      .def_readonly("inbound_total", &RoutingWeights::inbound_total);

  m.def("load_traces", &load_trace_set, py::arg("regions"), py::arg("latency"),
        py::arg("carbon"), py::arg("workload"),
        "Load and cross-validate the four trace files.");

  m.def(
      "solve_hour",
      [](const TraceSet& traces, long long hour, double alpha, double slo_ms,
         long long capacity, long long max_servers) {
        const int n = traces.regions.size();
        std::vector<double> carbon_hat(n), workload_hat(n);
        for (int r = 0; r < n; ++r) {
          carbon_hat[r] = traces.carbon.at(r, hour);
          workload_hat[r] = traces.workload.at(r, hour);
        }
        PlanParams params{alpha, slo_ms, {capacity}, max_servers};
        return solve_plan(build_problem(traces.regions, carbon_hat,
                                        workload_hat, traces.latency, params));
      },
      py::arg("traces"), py::arg("hour"), py::arg("alpha") = 0.5,
      py::arg("slo_ms") = 100.0, py::arg("capacity") = 100,
      py::arg("max_servers") = 500,
      "Solve the provisioning problem for one hour with oracle forecasts.");

  m.def("derive_weights", &derive_weights, py::arg("plan"),
        "Per-origin routing weights from an hourly plan.");

  m.def(
      "run",
      [](const TraceSet& traces, long long hours, std::uint64_t seed,
         const std::string& policy, double slo_ms, double alpha,
         long long capacity, long long max_servers, int timesteps_per_hour,
         double energy_per_request_kwh) {
        SimConfig config;
        config.hours = hours;
        config.seed = seed;
        config.timesteps_per_hour = timesteps_per_hour;
        config.energy_per_request_kwh = energy_per_request_kwh;
        config.policy =
            policy_from_kwargs(policy, slo_ms, alpha, capacity, max_servers);
        SimulationResult result = run_simulation(config, traces);
        py::dict out = summary_dict(result.summary);
        py::list hourly;
        for (const HourlyReport& hr : result.hourly) {
          py::dict h;
          h["hour"] = hr.hour;
          h["mean_latency_ms"] = hr.mean_latency_ms;
          h["p95_latency_ms"] = hr.p95_latency_ms;
          py::list originated, served, emissions;
          for (const RegionHourStats& stats : hr.regions) {
            originated.append(stats.originated);
            served.append(stats.served);
            emissions.append(stats.emissions_g);
          }
          h["originated"] = originated;
          h["served"] = served;
          h["emissions_g"] = emissions;
          h["servers"] = hr.plan.servers;
          hourly.append(h);
        }
        out["hourly"] = hourly;
        return out;
      },
      py::arg("traces"), py::arg("hours") = 24, py::arg("seed") = 0,
      py::arg("policy") = "carbon", py::arg("slo_ms") = 100.0,
      py::arg("alpha") = 0.5, py::arg("capacity") = 100,
      py::arg("max_servers") = 500, py::arg("timesteps_per_hour") = 60,
      py::arg("energy_per_request_kwh") = 1e-4,
      "Run one trace-driven simulation and return its report.");

  m.def(
      "sweep",
      [](const TraceSet& traces, const std::vector<double>& slos,
         long long hours, std::uint64_t seed, double alpha, long long capacity,
         long long max_servers) {
        std::vector<PolicySpec> policies;
        policies.push_back(
            policy_from_kwargs("latency", 0.0, alpha, capacity, max_servers));
        for (double slo : slos)
          policies.push_back(
              policy_from_kwargs("carbon", slo, alpha, capacity, max_servers));
        SimConfig config;
        config.hours = hours;
        config.seed = seed;
        config.policy = policies.front();
        ComparisonReport report = run_sweep(policies, config, traces);
        py::list out;
        for (const PolicyRunSummary& entry : report.entries) {
          py::dict d;
          d["name"] = entry.name;
          d["total_emissions_g"] = entry.total_emissions_g;
          d["mean_latency_ms"] = entry.mean_latency_ms;
          d["p95_latency_ms"] = entry.p95_latency_ms;
          d["total_overloads"] = entry.total_overloads;
          if (entry.reduction_vs_baseline)
            d["reduction_vs_baseline"] = *entry.reduction_vs_baseline;
          out.append(d);
        }
        return out;
      },
      py::arg("traces"), py::arg("slos"), py::arg("hours") = 24,
      py::arg("seed") = 0, py::arg("alpha") = 0.5, py::arg("capacity") = 100,
      py::arg("max_servers") = 500,
      "Baseline-plus-carbon-policy comparison on identical workloads.");

  m.attr("__version__") = kToolVersion;
}
