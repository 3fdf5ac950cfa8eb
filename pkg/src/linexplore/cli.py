"""Command-line entry points.

Subcommands: width, design, bai, norm, gap, hard, report.  Exit codes:
0 on success, 2 on configuration errors, 3 on numerical failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .arm_sets import MultiTask, parse_set_spec
from .designs import estimate_width, g_optimal, mix, round_design, uniform_design, width_design
from .errors import ConfigError, LinExploreError
from .hard_instances import hard_family
from .harness import ExperimentConfig, report, run_trials
from .seeding import as_rng, stable_mix


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="master seed (64-bit)")
    p.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    p.add_argument("--out", type=str, default=None, help="output path")


def _cmd_width(args) -> int:
    arm_set = parse_set_spec(args.set)
    if args.design == "uniform" or isinstance(arm_set, MultiTask):
        design = uniform_design(arm_set)
    elif args.design == "g":
        design = g_optimal(arm_set)
    else:
        design = width_design(arm_set, seed=stable_mix(args.seed, 1), warm=g_optimal(arm_set))
    est = estimate_width(arm_set, design, args.draws, seed=stable_mix(args.seed, 2))
    payload = {"set": args.set, "design": args.design, "mean": est.mean,
               "stderr": est.stderr, "draws": est.draws}
    text = json.dumps(payload, sort_keys=True, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


def _cmd_design(args) -> int:
    arm_set = parse_set_spec(args.set)
    lam2 = g_optimal(arm_set)
    if args.kind == "g":
        design = lam2
    elif args.kind == "width":
        design = width_design(arm_set, seed=stable_mix(args.seed, 1), warm=lam2)
    else:  # mix
        lam1 = width_design(arm_set, seed=stable_mix(args.seed, 1), warm=lam2)
        design = mix([lam1, lam2], [0.5, 0.5])
    design = design.trimmed()
    fixed = round_design(design, args.T, arm_set=arm_set, seed=stable_mix(args.seed, 2))
    payload = {
        "set": args.set, "kind": args.kind, "T": fixed.budget, "delta": args.delta,
        "support": [list(map(float, row)) for row in fixed.support],
        "weights": list(map(float, design.weights)),
        "counts": list(map(int, fixed.counts)),
        "quality": fixed.quality,
    }
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def _config_from_args(args, experiment: str) -> ExperimentConfig:
    if getattr(args, "config", None):
        config = ExperimentConfig.from_json(args.config)
        config.experiment = experiment
        return config
    budget = {}
    if getattr(args, "budget_override", None) is not None:
        budget["budget_override"] = args.budget_override
        budget["enforce_min_budget"] = False
    if getattr(args, "budget_scale", None) is not None:
        budget["budget_scale"] = args.budget_scale
    consts = {}
    if getattr(args, "consts", None):
        consts = json.loads(Path(args.consts).read_text())
    return ExperimentConfig(
        experiment=experiment,
        set_spec=getattr(args, "set", "") or "",
        algo=getattr(args, "algo", "fixed"),
        theta=getattr(args, "theta", "gen:zeros"),
        eps=args.eps, delta=args.delta,
        trials=getattr(args, "trials", 1),
        master_seed=args.seed,
        consts=consts, budget=budget,
        out=args.out, workers=getattr(args, "workers", 1),
        d=getattr(args, "d", 0) or 0,
        r=getattr(args, "r", 0.0),
        sweep=[int(x) for x in getattr(args, "sweep", "2,4,8").split(",")] if experiment == "gap" else [2, 4, 8],
    )


def _cmd_bai(args) -> int:
    summary = run_trials(_config_from_args(args, "bai"))
    print(json.dumps(summary.to_json(), sort_keys=True, indent=2))
    return 0


def _cmd_norm(args) -> int:
    config = _config_from_args(args, "norm")
    config.r = "grid" if args.r == "grid" else float(args.r)
    summary = run_trials(config)
    print(json.dumps(summary.to_json(), sort_keys=True, indent=2))
    return 0


def _cmd_gap(args) -> int:
    summary = run_trials(_config_from_args(args, "gap"))
    print(json.dumps(summary.to_json(), sort_keys=True, indent=2))
    return 0


def _cmd_hard(args) -> int:
    family = hard_family(args.family, args.eps, args.delta)
    rows = [family.sample(as_rng(stable_mix(args.seed, i))).theta for i in range(args.count)]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for theta in rows:
                writer.writerow([repr(float(x)) for x in theta])
    else:
        for theta in rows:
            print(",".join(repr(float(x)) for x in theta))
    return 0


def _cmd_report(args) -> int:
    summary = report(args.infile)
    print(json.dumps(summary.to_json(), sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linexplore",
                                     description="Linear-bandit pure exploration simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("width", help="Monte Carlo Gaussian width of a set")
    p.add_argument("--set", required=True, help="set spec, e.g. ball:4 or mset:6:2")
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--design", choices=("width", "g", "uniform"), default="width")
    _add_common(p)
    p.set_defaults(fn=_cmd_width)

    p = sub.add_parser("design", help="compute and round a design distribution")
    p.add_argument("--set", required=True)
    p.add_argument("--kind", choices=("g", "width", "mix"), default="mix")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    _add_common(p)
    p.set_defaults(fn=_cmd_design)

    p = sub.add_parser("bai", help="best-arm identification trials")
    p.add_argument("--set", required=True)
    p.add_argument("--algo", choices=("fixed", "partitioned", "unionballs", "uniform"),
                   default="fixed")
    p.add_argument("--theta", default="gen:zeros",
                   help="file:<path>[#row] | gen:zeros | gen:vec:.. | gen:spike:<v>:<i> | "
                        "gen:block_spike:<norm> | gen:hard:<family>")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--budget-override", dest="budget_override", type=int, default=None)
    p.add_argument("--budget-scale", dest="budget_scale", type=float, default=None)
    p.add_argument("--config", type=str, default=None, help="JSON config file")
    _add_common(p)
    p.set_defaults(fn=_cmd_bai)

    p = sub.add_parser("norm", help="L2-norm estimation trials on a ball")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--r", default="grid", help='true norm, or "grid" for {0,1,sqrt d,5 sqrt d}')
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--consts", type=str, default=None, help="JSON constants override file")
    p.add_argument("--config", type=str, default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_norm)

    p = sub.add_parser("gap", help="adaptive vs non-adaptive scaling sweep (k = d)")
    p.add_argument("--sweep", default="2,4,8", help="comma-separated block dimensions")
    p.add_argument("--eps", type=float, default=0.02)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=60, help="trials per sweep point")
    p.add_argument("--r", type=float, default=1.0, help="planted block norm")
    p.add_argument("--config", type=str, default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_gap)

    p = sub.add_parser("hard", help="sample hard-family reward vectors to CSV")
    p.add_argument("--family", required=True,
                   help="multitask:<d1,..> | mset:<d>:<m> | cube_pm:<d> | cube_01:<d> | "
                        "unionballs:<k>:<d>:<per_block_budget>")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--count", type=int, default=1)
    _add_common(p)
    p.set_defaults(fn=_cmd_hard)

    p = sub.add_parser("report", help="recompute a summary from a records CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (LinExploreError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
