# Copyright 2026 the carbonsched authors
# SPDX-License-Identifier: Apache-2.0

"""Regenerates the bundled synthetic traces under data/.

Six regions with realistic inter-region latencies and a carbon-intensity
spread that keeps eu-central-1 at least 6x dirtier than eu-west-3 in every
hour. Workload rates are quantized to multiples of 1/36 req/s so hourly
demand lands on whole server blocks (capacity 100 req/h per server).
"""

import json
import math
import os

HOURS = 168
REGIONS = [
    "us-west-1",
    "us-east-1",
    "us-east-2",
    "eu-central-1",
    "eu-west-3",
    "ap-southeast-2",
]

LATENCY_MS = [
    #  usw1  use1  use2  euc1  euw3  apse2
    [3, 65, 55, 150, 145, 170],     # us-west-1
    [65, 2, 12, 90, 85, 230],       # us-east-1
    [55, 12, 2, 95, 92, 225],       # us-east-2
    [150, 90, 95, 2, 10, 160],      # eu-central-1
    [145, 85, 92, 10, 2, 280],      # eu-west-3
    [170, 230, 225, 160, 280, 4],   # ap-southeast-2
]

# base, amplitude, peak-hour phase (UTC)
CARBON = {
    "us-west-1": (300.0, 140.0, 2),
    "us-east-1": (400.0, 45.0, 4),
    "us-east-2": (430.0, 55.0, 4),
    "eu-central-1": (460.0, 85.0, 12),
    "eu-west-3": (45.0, 8.0, 10),
    "ap-southeast-2": (500.0, 8.0, 0),
}

WORKLOAD_RPS = {
    "us-west-1": (1.1, 0.6, 14),
    "us-east-1": (1.6, 0.9, 11),
    "us-east-2": (0.8, 0.45, 11),
    "eu-central-1": (1.9, 1.0, 6),
    "eu-west-3": (1.4, 0.7, 6),
    "ap-southeast-2": (1.0, 0.55, -2),
}


def diurnal(base, amp, phase, hour):
    return base + amp * math.sin(2.0 * math.pi * (hour - phase) / 24.0)


def main():
    out_dir = os.path.join(os.path.dirname(__file__), os.pardir, "data")
    out_dir = os.path.normpath(out_dir)
    os.makedirs(out_dir, exist_ok=True)

    with open(os.path.join(out_dir, "regions.csv"), "w") as f:
        f.write("\n".join(REGIONS) + "\n")

    with open(os.path.join(out_dir, "latency.csv"), "w") as f:
        f.write("origin," + ",".join(REGIONS) + "\n")
        for name, row in zip(REGIONS, LATENCY_MS):
            f.write(name + "," + ",".join(str(v) for v in row) + "\n")

    with open(os.path.join(out_dir, "carbon.csv"), "w") as f:
        f.write("region,hour,value\n")
        for name in REGIONS:
            base, amp, phase = CARBON[name]
            for h in range(HOURS):
                f.write(f"{name},{h},{diurnal(base, amp, phase, h):.3f}\n")

    peak_total = 0.0
    with open(os.path.join(out_dir, "workload.csv"), "w") as f:
        f.write("region,hour,value\n")
        totals = [0.0] * HOURS
        for name in REGIONS:
            base, amp, phase = WORKLOAD_RPS[name]
            for h in range(HOURS):
                steps = round(36.0 * diurnal(base, amp, phase, h))
                rate = steps / 36.0
                totals[h] += rate
                f.write(f"{name},{h},{rate:.6f}\n")
        peak_total = max(totals)

    # Sanity rails the acceptance scenarios rely on.
    for h in range(HOURS):
        dirty = diurnal(*CARBON["eu-central-1"], h)
        clean = diurnal(*CARBON["eu-west-3"], h)
        assert dirty / clean >= 6.0, f"hour {h}: carbon gap below 6x"
    assert peak_total * 3600.0 < 0.9 * 500 * 100, "peak demand too close to capacity"
    assert LATENCY_MS[3][4] == 10, "eu-central-1 -> eu-west-3 must stay at 10 ms"

    config = {
        "regions": "regions.csv",
        "latency": "latency.csv",
        "carbon": "carbon.csv",
        "workload": "workload.csv",
        "hours": 24,
        "timesteps_per_hour": 60,
        "seed": 42,
        "energy_per_request_kwh": 1e-4,
        "alpha": 0.5,
        "capacity_per_server": 100,
        "max_servers": 500,
        "carbon_forecaster": "oracle",
        "workload_forecaster": "oracle",
        "policy": {"kind": "carbon", "slo_ms": 100},
        "policies": [
            {"kind": "latency"},
            {"kind": "carbon", "slo_ms": 20},
            {"kind": "carbon", "slo_ms": 100},
            {"kind": "carbon", "slo_ms": 200},
            {"kind": "carbon", "slo_ms": 300},
            {"kind": "carbon", "slo_ms": 400},
            {"kind": "carbon", "slo_ms": 500},
        ],
        "out": "out",
    }
    with open(os.path.join(out_dir, "config.json"), "w") as f:
        json.dump(config, f, indent=2)
        f.write("\n")

    print(f"wrote {out_dir} ({HOURS} hours, {len(REGIONS)} regions, "
          f"peak {peak_total * 3600.0:.0f} req/h)")


if __name__ == "__main__":
    main()
