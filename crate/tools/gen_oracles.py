#!/usr/bin/env python3
"""Regenerate crates/core/tests/data/formula_oracles.json.

Reference values are evaluated with mpmath at 50 significant digits from the
closed-form definitions, independently of the Rust code. Inputs are drawn from
a fixed seed so the file is reproducible.
"""

import json
import math
import random
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50
N = 1000
SEED = 20240917
OUT = Path(__file__).resolve().parent.parent / "crates/core/tests/data/formula_oracles.json"


def emotion(rng):
    while True:
        e = rng.uniform(-0.999, 0.999)
        if e != 0.0:
            return e


def pairwise(e, dist, a, b):
    e, dist, a, b = map(mp.mpf, (e, dist, a, b))
    weight = 1 - 1 / (1 + mp.exp(-dist))
    return weight * e * a * b


def mental(role, dbene, delta):
    dbene, delta = mp.mpf(dbene), mp.mpf(delta)
    if dbene >= delta:
        base = mp.mpf("0.1") / (delta + mp.exp(delta / dbene))
    else:
        base = -mp.mpf("0.1") / (delta + mp.exp(dbene / delta))
    return base if role == "cop" else -base


def force(e):
    return mp.sin(abs(mp.mpf(e)) * mp.pi / 2)


def text(x):
    return mp.nstr(x, 25, min_fixed=1, max_fixed=0)


def main():
    rng = random.Random(SEED)
    cases = {"pairwise_external_delta": [], "mental_increment": [], "deterrent_force": []}

    for i in range(N):
        if i % 2 == 0:
            # distances that occur on the grid: sqrt of a sum of two squares
            dr, dc = rng.randint(0, 14), rng.randint(0, 14)
            dist = math.sqrt(dr * dr + dc * dc)
        else:
            dist = rng.uniform(0.0, 40.0)
        e, a, b = emotion(rng), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)
        a = a if a > 0.0 else 1.0
        b = b if b > 0.0 else 1.0
        cases["pairwise_external_delta"].append(
            {"sender_emotion": e, "distance": dist, "a": a, "b": b, "expected": text(pairwise(e, dist, a, b))}
        )

    for _ in range(N):
        role = rng.choice(["cop", "activist"])
        delta = rng.uniform(0.01, 5.0)
        mag = delta * rng.uniform(1.0, 20.0)
        dbene = mag if rng.random() < 0.5 else -mag
        cases["mental_increment"].append(
            {"role": role, "dbene": dbene, "delta": delta, "expected": text(mental(role, dbene, delta))}
        )

    for _ in range(N):
        e = emotion(rng)
        cases["deterrent_force"].append({"emotion": e, "expected": text(force(e))})

    doc = {"seed": SEED, "digits": mp.mp.dps, **cases}
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
