# Copyright 2026 the carbonsched authors
# SPDX-License-Identifier: Apache-2.0

"""Carbon-aware provisioning and request-routing simulator."""

from ._core import (
    CarbonschedError,
    ProvisioningPlan,
    ProvisioningProblem,
    RegionSet,
    RoutingWeights,
    TraceSet,
    __version__,
    derive_weights,
    load_traces,
    run,
    solve_hour,
    sweep,
)

__all__ = [
    "CarbonschedError",
    "ProvisioningPlan",
    "ProvisioningProblem",
    "RegionSet",
    "RoutingWeights",
    "TraceSet",
    "__version__",
    "derive_weights",
    "load_traces",
    "run",
    "solve_hour",
    "sweep",
]
