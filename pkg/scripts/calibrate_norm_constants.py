#!/usr/bin/env python3
"""One-time calibration of the norm-estimation sample-count constants.

Procedure (documented in the library's design notes): over the grid
d in {4, 16, 64}, r in {0, eps/2, 1, sqrt(d), 5 sqrt(d)}, eps in {0.1, 0.2},
delta = 0.1, find the smallest power-of-two constants (c0, c1, C1) whose
Wilson 95% upper bound on the per-cell failure rate stays at or below delta.
The search doubles a uniform scale until the grid passes a quick screen,
then greedily halves each constant while the screen still passes, and
finally verifies the winner at full trial count.  The committed file also
records budget_factor: the observed grid-wide constant C with 25% headroom
such that per-trial samples stay below C * d * log(1/delta) / eps^2.

Usage: python scripts/calibrate_norm_constants.py [--screen-trials 150]
           [--verify-trials 500] [--seed 20240801]
           [--out src/linexplore/norm_constants.json]
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from linexplore.bandit_env import Environment  # noqa: E402
from linexplore.harness import wilson_interval  # noqa: E402
from linexplore.norm_estimation import NormConsts, estimate_norm  # noqa: E402
from linexplore.seeding import random_unit, stable_mix  # noqa: E402

DELTA = 0.1
GRID_D = (4, 16, 64)
GRID_EPS = (0.1, 0.2)


def grid_cells():
    for d in GRID_D:
        for eps in GRID_EPS:
            for r in (0.0, eps / 2.0, 1.0, math.sqrt(d), 5.0 * math.sqrt(d)):
                yield d, eps, r


def run_cell(consts: NormConsts, d: int, eps: float, r: float, trials: int, seed: int):
    fails = 0
    worst_ratio = 0.0
    for i in range(trials):
        rng = np.random.default_rng(stable_mix(seed, 2 * i))
        theta = r * random_unit(d, rng) if r > 0 else np.zeros(d)
        env = Environment(theta, seed=stable_mix(seed, 2 * i + 1))
        rep = estimate_norm(env, d, eps, DELTA, consts, rng=rng)
        fails += int(abs(rep.r_hat - r) > eps)
        worst_ratio = max(worst_ratio, rep.samples * eps**2 / (d * math.log(1.0 / DELTA)))
    return fails, worst_ratio


def grid_passes(consts: NormConsts, trials: int, seed: int, verbose: bool = False):
    worst = 0.0
    for d, eps, r in grid_cells():
        fails, ratio = run_cell(consts, d, eps, r, trials, stable_mix(seed, hash_cell(d, eps, r)))
        worst = max(worst, ratio)
        _, upper = wilson_interval(fails, trials)
        if verbose:
            print(f"  d={d:3d} eps={eps} r={r:7.3f}: fails={fails}/{trials} "
                  f"wilson_hi={upper:.3f} ratio={ratio:.1f}")
        if upper > DELTA:
            return False, worst
    return True, worst


def hash_cell(d: int, eps: float, r: float) -> int:
    return d * 1_000_003 + int(eps * 1000) * 1009 + int(r * 1000)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--screen-trials", type=int, default=150)
    ap.add_argument("--verify-trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=20240801)
    ap.add_argument("--out", type=str,
                    default=str(Path(__file__).resolve().parent.parent / "src/linexplore/norm_constants.json"))
    args = ap.parse_args()

    # Stage 1: double a uniform scale until the screen passes.
    scale = 1.0
    while True:
        consts = NormConsts(c0=scale, c1=scale, C0=4.0, C1=scale)
        t0 = time.time()
        ok, _ = grid_passes(consts, args.screen_trials, args.seed)
        print(f"scale={scale}: screen {'PASS' if ok else 'fail'} ({time.time() - t0:.0f}s)")
        if ok:
            break
        scale *= 2.0
        if scale > 64:
            print("no power-of-two scale up to 64 passed the screen", file=sys.stderr)
            return 1

    # Stage 2: greedily halve each constant while the screen still passes.
    best = NormConsts(c0=scale, c1=scale, C0=4.0, C1=scale)
    improved = True
    while improved:
        improved = False
        for name in ("c0", "c1", "C1"):
            value = getattr(best, name)
            if value <= 1.0:
                continue
            cand = dataclasses.replace(best, **{name: value / 2.0})
            ok, _ = grid_passes(cand, args.screen_trials, args.seed + 1)
            print(f"halve {name} -> {value / 2.0}: {'PASS' if ok else 'fail'}")
            if ok:
                best = cand
                improved = True

    # Stage 3: verify the winner at full trial count; bump the scale on failure.
    while True:
        print(f"verifying {best} at {args.verify_trials} trials")
        ok, worst = grid_passes(best, args.verify_trials, args.seed + 2, verbose=True)
        if ok:
            break
        best = NormConsts(c0=best.c0 * 2, c1=best.c1 * 2, C0=best.C0, C1=best.C1 * 2)

    budget_factor = math.ceil(worst * 1.25)
    payload = dict(c0=best.c0, c1=best.c1, C0=best.C0, C1=best.C1,
                   budget_factor=float(budget_factor))
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    print(f"committed {payload} to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
