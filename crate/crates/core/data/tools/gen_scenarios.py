#!/usr/bin/env python3
"""Regenerate the synthetic 39-bus profiles and scenario configs.

Loads follow a daily shape scaled by each bus's nominal demand; local
renewable output is solar at some load buses and wind at others. All values
are per-unit on the case base. Deterministic: rerunning reproduces the
bundled files byte for byte.

    python3 gen_scenarios.py [output_dir]
"""

import json
import math
import os
import random
import re
import sys

STEPS = 24
SEED = 39

AREAS = {
    1: [4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 31, 32, 39],
    2: [1, 2, 3, 17, 18, 25, 26, 27, 30, 37],
    3: [15, 16, 19, 20, 21, 22, 23, 24, 28, 29, 33, 34, 35, 36, 38],
}

MEDIUM = [
    [4, 5, 14],
    [7, 8, 9, 39],
    [6, 10, 11, 12, 13, 31, 32],
    [1, 2, 25, 30, 37],
    [3, 17, 18],
    [26, 27],
    [15, 16, 19, 20, 33, 34],
    [28, 29, 38],
    [21, 22, 23, 24, 35, 36],
]

# Buses 28, 29 and 38 reach the rest of area 3 only through bus 26, so the
# high-aggregation sheds attach them to area 2 to keep every shed connected.
HIGH = [
    AREAS[1],
    sorted(AREAS[2] + [28, 29, 38]),
    [b for b in AREAS[3] if b not in (28, 29, 38)],
]



def read_case(path):
    text = open(path).read()
    base = float(re.search(r"mpc\.baseMVA\s*=\s*([\d.]+)", text).group(1))
    body = re.search(r"mpc\.bus\s*=\s*\[(.*?)\];", text, re.S).group(1)
    buses = []
    for line in body.strip().splitlines():
        fields = line.strip().rstrip(";").split()
        buses.append((int(fields[0]), float(fields[2])))
    return base, buses


def load_shape(t):
    hour = t + 0.5
    return 0.72 + 0.18 * math.exp(-((hour - 11.0) / 4.0) ** 2) + 0.28 * math.exp(-((hour - 19.0) / 3.0) ** 2)


def solar_shape(t):
    hour = t + 0.5
    return max(0.0, math.sin(math.pi * (hour - 6.0) / 13.0)) ** 1.5 if 6.0 < hour < 19.0 else 0.0


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..")
    base, buses = read_case(os.path.join(out, "case39.m"))
    rng = random.Random(SEED)
    load_buses = [b for b, pd in buses if pd > 0.0]
    area_of = {b: k for k, members in enumerate(HIGH) for b in members}

    rows = []
    alpha = {}
    for bus, pd in buses:
        if pd <= 0.0:
            continue
        nominal = pd / base
        jitter = [1.0 + 0.04 * (rng.random() - 0.5) for _ in range(STEPS)]
        load = [nominal * load_shape(t) * jitter[t] for t in range(STEPS)]
        kind = rng.choice(["solar", "wind", "wind"])
        share = rng.uniform(0.1, 0.7)
        if kind == "solar":
            raw = [solar_shape(t) for t in range(STEPS)]
        else:
            level = rng.uniform(0.3, 0.7)
            phase = rng.uniform(0.0, 2.0 * math.pi)
            raw = [max(0.0, level + 0.3 * math.sin(2.0 * math.pi * t / STEPS + phase) + 0.1 * (rng.random() - 0.5)) for t in range(STEPS)]
        scale = share * sum(load) / max(sum(raw), 1e-12)
        gen = [min(scale * r, 0.95 * l) for r, l in zip(raw, load)]
        rows.append((bus, "load", load))
        rows.append((bus, "gen", gen))
        alpha[bus] = rng.uniform(0.25, 4.0)

    # Scale each area's cost level so its share of cheap capacity matches its
    # share of the energy deficit; the control areas are then close to
    # self-sufficient at least cost.
    deficit = [0.0] * len(HIGH)
    inverse = [0.0] * len(HIGH)
    for bus, kind, values in rows:
        sign = 1.0 if kind == "load" else -1.0
        deficit[area_of[bus]] += sign * sum(values)
    for bus, a in alpha.items():
        inverse[area_of[bus]] += 1.0 / a
    level = [inverse[k] / deficit[k] for k in range(len(HIGH))]
    mean = sum(level) / len(level)
    for bus in alpha:
        alpha[bus] *= level[area_of[bus]] / mean

    with open(os.path.join(out, "profiles39.csv"), "w") as f:
        f.write("bus,kind," + ",".join(f"t{t + 1}" for t in range(STEPS)) + "\n")
        for bus, kind, values in sorted(rows, key=lambda r: (r[0], r[1] != "load")):
            f.write(f"{bus},{kind}," + ",".join(f"{v:.6f}" for v in values) + "\n")

    peak = {bus: max(r[2]) for r in rows if r[1] == "load" for bus in [r[0]]}
    common = {
        "case_file": "case39.m",
        "profiles_file": "profiles39.csv",
        "step_hours": 1.0,
        "reference_bus": 1,
        "alpha": {"default": 0.0, "buses": {str(b): round(alpha[b], 4) for b in load_buses}},
        "beta": {"default": 0.0, "buses": {str(b): 2.0 for b in load_buses}},
        "cap_plus": {"default": 0.0, "buses": {str(b): round(2.0 * peak[b], 4) for b in load_buses}},
        "cap_minus": {"default": 0.0, "buses": {str(b): round(1.0 * peak[b], 4) for b in load_buses}},
        "flex_only_at_load_buses": True,
        "zeta_grid": [round(10 ** (k / 4.0), 6) for k in range(-8, 17)],
    }
    partitions = {
        "low": [[b] for b in load_buses],
        "medium": MEDIUM,
        "high": HIGH,
    }
    for level, partition in partitions.items():
        config = {"name": f"ieee39-{level}", **common, "partition": partition}
        with open(os.path.join(out, f"scenario_{level}.json"), "w") as f:
            json.dump(config, f, indent=2)
            f.write("\n")


if __name__ == "__main__":
    main()
