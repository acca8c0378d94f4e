# Copyright 2026 the carbonsched authors
# SPDX-License-Identifier: Apache-2.0

import os

import pytest

carbonsched = pytest.importorskip("carbonsched")


def data_dir():
    d = os.environ.get("CARBONSCHED_DATA_DIR")
    if d:
        return d
    here = os.path.dirname(os.path.abspath(__file__))
    return os.path.normpath(os.path.join(here, os.pardir, os.pardir, "data"))


@pytest.fixture(scope="module")
def traces():
    d = data_dir()
    return carbonsched.load_traces(
        os.path.join(d, "regions.csv"),
        os.path.join(d, "latency.csv"),
        os.path.join(d, "carbon.csv"),
        os.path.join(d, "workload.csv"),
    )


def test_load_traces(traces):
    assert len(traces.regions) == 6
    assert traces.hours == 168
    de = traces.regions.index_of("eu-central-1")
    fr = traces.regions.index_of("eu-west-3")
    assert traces.latency_ms(de, fr) == 10.0


def test_solve_hour_respects_budget(traces):
    plan = carbonsched.solve_hour(traces, 0, slo_ms=100.0)
    assert sum(plan.servers) <= 500
    assert sum(plan.unserved) == 0
    weights = carbonsched.derive_weights(plan)
    for i, row in enumerate(weights.weights):
        total = sum(row)
        assert total == pytest.approx(1.0) or total == 0.0


def test_run_conserves_requests(traces):
    out = carbonsched.run(traces, hours=2, seed=7, policy="carbon", slo_ms=100.0)
    assert out["hours"] == 2
    for hour in out["hourly"]:
        assert sum(hour["originated"]) == sum(hour["served"])


def test_run_is_deterministic(traces):
    a = carbonsched.run(traces, hours=2, seed=11)
    b = carbonsched.run(traces, hours=2, seed=11)
    assert a == b


def test_sweep_orders_reductions(traces):
    entries = carbonsched.sweep(traces, [20.0, 500.0], hours=3, seed=42)
    assert [e["name"] for e in entries] == ["latency", "carbon-20", "carbon-500"]
    r20 = entries[1]["reduction_vs_baseline"]
    r500 = entries[2]["reduction_vs_baseline"]
    assert 0.0 < r20 < r500


def test_errors_surface_as_python_exceptions():
    with pytest.raises(carbonsched.CarbonschedError):
        carbonsched.load_traces("/nonexistent", "/nonexistent", "/nonexistent",
                                "/nonexistent")
