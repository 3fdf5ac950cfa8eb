"""Experiment orchestration: seeded trial streams, CSV records, summaries.

Three CSV schemas, all versioned in the sidecar summary JSON:

* run records (`bai` / `hard` experiments):
  trial,seed,algo,set,d,k,m,eps,delta,samples,success,estimate,true_value,branch,wall_ms
* norm records (`norm` experiment):
  trial,d,r_true,eps,delta,branch,r0,r_hat,abs_err,samples,success
* scaling tables (`gap` experiment): point rows plus one fit row per algorithm.

Trial i draws everything from stable_mix(master_seed, i), so re-running a
config reproduces the CSV byte for byte (wall_ms is recorded as 0 unless
record_timing is set, precisely to keep that contract).
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arm_sets import ArmSet, Ball, MSet, MultiTask, UnionOfBalls, parse_set_spec
from .bandit_env import Environment, hidden_theta, is_eps_best, optimal_value
from .errors import ConfigError, InsufficientPointsError
from .hard_instances import hard_family
from .norm_estimation import NormConsts, default_consts, estimate_norm
from .pure_exploration import (
    FixedDesignPlan,
    fixed_design_bai,
    partitioned_adaptive_bai,
    plan_fixed_design,
    union_ball_adaptive_bai,
)
from .seeding import as_rng, random_unit, stable_mix

RUN_HEADER = "trial,seed,algo,set,d,k,m,eps,delta,samples,success,estimate,true_value,branch,wall_ms"
NORM_HEADER = "trial,d,r_true,eps,delta,branch,r0,r_hat,abs_err,samples,success"
SCALING_HEADER = "row,algo,sweep_var,sweep_value,trials,successes,success_rate,budget,mean_samples,slope,intercept,r2"
SCHEMA_VERSION = "v1"

BAI_ALGOS = ("fixed", "partitioned", "unionballs", "uniform")
EXPERIMENTS = ("bai", "norm", "hard", "gap")


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not (0 <= successes <= trials):
        raise ValueError("need 0 <= successes <= trials, trials >= 1")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class RunRecord:
    trial: int
    seed: int
    algo: str
    set_spec: str
    d: int
    k: int | None
    m: int | None
    eps: float
    delta: float
    samples: int
    success: bool
    estimate: float
    true_value: float
    branch: str
    wall_ms: int
    theta_digest: str = ""

    def row(self) -> list:
        return [self.trial, self.seed, self.algo, self.set_spec, self.d,
                "" if self.k is None else self.k, "" if self.m is None else self.m,
                self.eps, self.delta, self.samples, int(self.success),
                self.estimate, self.true_value, self.branch, self.wall_ms]


@dataclass(frozen=True)
class ScalingFit:
    algo: str
    slope: float
    intercept: float
    r2: float


@dataclass(frozen=True)
class RunSummary:
    trials: int
    successes: int
    rate: float
    wilson_lo: float
    wilson_hi: float
    samples_mean: float
    samples_median: float
    samples_max: float
    fits: tuple[ScalingFit, ...] = ()

    def to_json(self) -> dict:
        payload = dataclasses.asdict(self)
        payload["fits"] = [dataclasses.asdict(f) for f in self.fits]
        return payload


def summarize(successes: list[int], samples: list[float],
              fits: tuple[ScalingFit, ...] = ()) -> RunSummary:
    n = len(successes)
    if n == 0:
        raise ValueError("no records to summarize")
    wins = int(sum(successes))
    lo, hi = wilson_interval(wins, n)
    arr = np.asarray(samples, dtype=float)
    return RunSummary(trials=n, successes=wins, rate=wins / n, wilson_lo=lo, wilson_hi=hi,
                      samples_mean=float(arr.mean()), samples_median=float(np.median(arr)),
                      samples_max=float(arr.max()), fits=fits)


# -- configuration -------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Mirror of the JSON config format (field names match exactly)."""

    experiment: str
    set_spec: str = ""
    algo: str = "fixed"
    theta: str = "gen:zeros"
    eps: float = 0.2
    delta: float = 0.1
    trials: int = 1
    master_seed: int = 0
    consts: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)
    out: str | None = None
    workers: int = 1
    record_timing: bool = False
    # norm experiment extras
    d: int = 0
    r: str | float = 0.0
    # gap experiment extras
    sweep: list = field(default_factory=lambda: [2, 4, 8])
    target_rate: float | None = None

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        try:
            payload = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"{path}: unknown config fields {sorted(unknown)}")
        return cls(**payload)

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.trials < 1:
            raise ConfigError(f"trials: must be >= 1, got {self.trials}")
        if not (0.0 < self.eps <= 1.0):
            raise ConfigError(f"eps: must be in (0, 1], got {self.eps}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"delta: must be in (0, 1), got {self.delta}")
        if self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers}")
        if self.experiment in ("bai", "hard"):
            if not self.set_spec:
                raise ConfigError("set_spec: required for bai/hard experiments")
            try:
                parse_set_spec(self.set_spec)
            except ValueError as exc:
                raise ConfigError(f"set_spec: {exc}") from exc
            if self.algo not in BAI_ALGOS:
                raise ConfigError(f"algo: must be one of {BAI_ALGOS}, got {self.algo!r}")
            if self.theta.startswith("file:"):
                path = self.theta.split(":", 1)[1].split("#")[0]
                if not Path(path).exists():
                    raise ConfigError(f"theta: file {path!r} does not exist")
        if self.experiment == "norm" and self.d < 1:
            raise ConfigError(f"d: must be >= 1 for norm experiments, got {self.d}")
        if self.experiment == "gap" and len(self.sweep) < 3:
            raise InsufficientPointsError(f"sweep: need >= 3 points, got {self.sweep}")


def _norm_consts(config: ExperimentConfig) -> NormConsts:
    base = default_consts()
    if config.consts:
        base = dataclasses.replace(base, **config.consts)
    return base


# -- theta sources ---------------------------------------------------------------

def load_theta_csv(path: str, row: int = 0) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    return np.asarray(data[row], dtype=float)


def resolve_theta_source(spec: str, arm_set: ArmSet, eps: float, delta: float):
    """Return fn(rng) -> theta for `file:<path>[#row]`, `gen:zeros`,
    `gen:vec:<floats>`, `gen:spike:<value>:<coord>`,
    `gen:block_spike:<norm>` (union sets), or `gen:hard:<family spec>`."""
    dim = arm_set.dim
    if spec.startswith("file:") or not spec.startswith("gen:"):
        path = spec.split(":", 1)[1] if spec.startswith("file:") else spec
        path, _, row = path.partition("#")
        theta = load_theta_csv(path, int(row) if row else 0)
        if theta.shape[0] != dim:
            raise ConfigError(f"theta: file vector has length {theta.shape[0]}, set needs {dim}")
        return lambda rng: theta
    body = spec[len("gen:"):]
    kind, _, rest = body.partition(":")
    if kind == "zeros":
        return lambda rng: np.zeros(dim)
    if kind == "vec":
        theta = np.array([float(x) for x in rest.split(",")])
        if theta.shape[0] != dim:
            raise ConfigError(f"theta: vec has length {theta.shape[0]}, set needs {dim}")
        return lambda rng: theta
    if kind == "spike":
        value, _, coord = rest.partition(":")
        theta = np.zeros(dim)
        theta[int(coord or 0)] = float(value)
        return lambda rng: theta
    if kind == "block_spike":
        if not isinstance(arm_set, UnionOfBalls):
            raise ConfigError("theta: gen:block_spike needs a unionballs set")
        norm = float(rest or 1.0)

        def sample(rng):
            block = 1 + int(rng.integers(0, arm_set.k))
            return arm_set.embed(norm * random_unit(arm_set.block_dim, rng), block)

        return sample
    if kind == "hard":
        family = hard_family(rest, eps, delta)
        return lambda rng: family.sample(rng).theta
    raise ConfigError(f"theta: unknown source {spec!r}")


# -- the bai/hard trial runner ----------------------------------------------------

def _set_columns(arm_set: ArmSet) -> tuple[int, int | None, int | None]:
    if isinstance(arm_set, UnionOfBalls):
        return arm_set.block_dim, arm_set.k, None
    if isinstance(arm_set, MSet):
        return arm_set.dim, None, arm_set.m
    if isinstance(arm_set, MultiTask):
        return arm_set.dim, None, len(arm_set.d_vec)
    return arm_set.dim, None, None


def _uniform_pool(arm_set: ArmSet, enum_cap: int = 10**6) -> np.ndarray:
    if isinstance(arm_set, (Ball, UnionOfBalls)):
        return np.eye(arm_set.dim)
    return arm_set.enumerate_arms(cap=enum_cap)


def uniform_baseline(arm_set: ArmSet, env, budget: int, pool: np.ndarray | None = None):
    """Round-robin allocation over a canonical pool, min-norm least squares,
    then the oracle argmax.  The non-adaptive strawman for hard families."""
    pool = _uniform_pool(arm_set) if pool is None else pool
    n = pool.shape[0]
    counts = np.full(n, budget // n, dtype=np.int64)
    counts[: budget % n] += 1
    d = arm_set.dim
    G = np.zeros((d, d))
    b = np.zeros(d)
    before = env.pulls
    for arm, count in zip(pool, counts):
        if count == 0:
            continue
        rewards = env.pull_many(arm, int(count))
        G += count * np.outer(arm, arm)
        b += arm * float(rewards.sum())
    theta_hat = np.linalg.pinv(G, rcond=1e-10) @ b
    from .pure_exploration import BaiResult

    return BaiResult(chosen=arm_set.linear_argmax(theta_hat), samples=env.pulls - before,
                     diagnostics={"budget": float(budget)}, theta_hat=theta_hat)


@dataclass
class _BaiContext:
    config: ExperimentConfig
    arm_set: ArmSet
    theta_fn: object
    plan: FixedDesignPlan | None
    block_plan: FixedDesignPlan | None
    consts: NormConsts


def _build_bai_context(config: ExperimentConfig) -> _BaiContext:
    arm_set = parse_set_spec(config.set_spec)
    theta_fn = resolve_theta_source(config.theta, arm_set, config.eps, config.delta)
    plan = None
    block_plan = None
    plan_seed = stable_mix(config.master_seed, 997)
    if config.algo in ("fixed", "partitioned"):
        plan = plan_fixed_design(arm_set, seed=plan_seed,
                                 width_draws=int(config.budget.get("width_draws", 4096)))
    elif config.algo == "unionballs":
        block_plan = plan_fixed_design(Ball(arm_set.block_dim), seed=plan_seed)
    return _BaiContext(config=config, arm_set=arm_set, theta_fn=theta_fn,
                       plan=plan, block_plan=block_plan, consts=_norm_consts(config))


def _default_uniform_budget(config: ExperimentConfig, arm_set: ArmSet) -> int:
    if "budget_override" in config.budget:
        return int(config.budget["budget_override"])
    if isinstance(arm_set, MultiTask):
        # The multi-task hard-family probe budget.
        total = sum(math.sqrt(dj) for dj in arm_set.d_vec) ** 2
        return max(1, math.ceil(total / (20000.0 * config.eps**2)))
    return max(arm_set.dim + 1, math.ceil(arm_set.dim / config.eps**2))


def _run_bai_trial(ctx: _BaiContext, trial: int) -> RunRecord:
    config = ctx.config
    trial_seed = stable_mix(config.master_seed, trial)
    theta = ctx.theta_fn(as_rng(stable_mix(trial_seed, 1)))
    env = Environment(theta, seed=stable_mix(trial_seed, 2))
    algo_rng = as_rng(stable_mix(trial_seed, 3))
    started = time.perf_counter()
    if config.algo == "fixed":
        result = fixed_design_bai(
            ctx.arm_set, config.eps, config.delta, env, plan=ctx.plan,
            budget_override=config.budget.get("budget_override"),
            enforce_min_budget=config.budget.get("enforce_min_budget", True))
    elif config.algo == "partitioned":
        result = partitioned_adaptive_bai(ctx.arm_set, config.eps, config.delta, env,
                                          seed=stable_mix(trial_seed, 4), plan=ctx.plan)
    elif config.algo == "unionballs":
        result = union_ball_adaptive_bai(
            ctx.arm_set, config.eps, config.delta, env, consts=ctx.consts, rng=algo_rng,
            budget_scale=float(config.budget.get("budget_scale", 1.0)),
            block_plan=ctx.block_plan)
    elif config.algo == "uniform":
        result = uniform_baseline(ctx.arm_set, env, _default_uniform_budget(config, ctx.arm_set))
    else:  # pragma: no cover - validated earlier
        raise ConfigError(f"algo: unknown {config.algo!r}")
    wall_ms = int(1000 * (time.perf_counter() - started)) if config.record_timing else 0

    truth = optimal_value(env, ctx.arm_set)
    achieved = float(result.chosen @ hidden_theta(env))
    d, k, m = _set_columns(ctx.arm_set)
    return RunRecord(
        trial=trial, seed=trial_seed, algo=config.algo, set_spec=config.set_spec,
        d=d, k=k, m=m, eps=config.eps, delta=config.delta, samples=result.samples,
        success=is_eps_best(env, ctx.arm_set, result.chosen, config.eps),
        estimate=achieved, true_value=truth, branch="", wall_ms=wall_ms,
        theta_digest=env.theta_digest)


# -- norm experiment ---------------------------------------------------------------

def norm_grid(d: int) -> list[float]:
    """The documented `--r grid` values: 0, 1, sqrt(d), 5 sqrt(d)."""
    return [0.0, 1.0, math.sqrt(d), 5.0 * math.sqrt(d)]


def _run_norm_trial(config: ExperimentConfig, consts: NormConsts, trial: int,
                    r_true: float) -> list:
    trial_seed = stable_mix(config.master_seed, trial)
    rng_theta = as_rng(stable_mix(trial_seed, 1))
    theta = r_true * random_unit(config.d, rng_theta) if r_true > 0 else np.zeros(config.d)
    env = Environment(theta, seed=stable_mix(trial_seed, 2))
    report = estimate_norm(env, config.d, config.eps, config.delta, consts,
                           rng=as_rng(stable_mix(trial_seed, 3)))
    abs_err = abs(report.r_hat - r_true)
    return [trial, config.d, r_true, config.eps, config.delta, report.branch,
            report.r0, report.r_hat, abs_err, report.samples, int(abs_err <= config.eps)]


# -- execution ---------------------------------------------------------------------

_WORKER_CTX: dict[str, object] = {}


def _config_key(config: ExperimentConfig) -> str:
    return json.dumps(dataclasses.asdict(config), sort_keys=True)


def _worker_bai(args):
    key, payload, trial = args
    if _WORKER_CTX.get("key") != key:
        _WORKER_CTX["key"] = key
        _WORKER_CTX["ctx"] = _build_bai_context(ExperimentConfig(**json.loads(payload)))
    return _run_bai_trial(_WORKER_CTX["ctx"], trial)


def _open_csv(path: str | None, header: str):
    if path is None:
        return None, None
    fh = open(path, "w", newline="")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header.split(","))
    return fh, writer


def _write_summary(path: str | None, schema: str, summary: RunSummary, config: ExperimentConfig):
    if path is None:
        return
    payload = {"schema": f"{schema}-{SCHEMA_VERSION}", "summary": summary.to_json(),
               "config": dataclasses.asdict(config)}
    Path(path + ".summary.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def run_trials(config: ExperimentConfig) -> RunSummary:
    """Execute config.trials seeded trials, streaming records to config.out."""
    config.validate()
    if config.experiment == "norm":
        return _run_norm_trials(config)
    if config.experiment == "gap":
        return scaling_experiment(config).summary
    ctx = _build_bai_context(config)
    fh, writer = _open_csv(config.out, RUN_HEADER)
    records: list[RunRecord] = []
    try:
        if config.workers > 1:
            key = _config_key(config)
            payload = json.dumps(dataclasses.asdict(config))
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                for record in pool.map(_worker_bai, [(key, payload, i) for i in range(config.trials)],
                                       chunksize=max(1, config.trials // (4 * config.workers))):
                    records.append(record)
                    if writer:
                        writer.writerow(record.row())
        else:
            for trial in range(config.trials):
                record = _run_bai_trial(ctx, trial)
                records.append(record)
                if writer:
                    writer.writerow(record.row())
    finally:
        if fh:
            fh.close()
    summary = summarize([int(r.success) for r in records], [float(r.samples) for r in records])
    _write_summary(config.out, "run", summary, config)
    return summary


def _run_norm_trials(config: ExperimentConfig) -> RunSummary:
    consts = _norm_consts(config)
    r_values = norm_grid(config.d) if config.r == "grid" else [float(config.r)]
    fh, writer = _open_csv(config.out, NORM_HEADER)
    rows = []
    try:
        trial = 0
        for r_true in r_values:
            for _ in range(config.trials):
                row = _run_norm_trial(config, consts, trial, r_true)
                rows.append(row)
                if writer:
                    writer.writerow(row)
                trial += 1
    finally:
        if fh:
            fh.close()
    summary = summarize([r[-1] for r in rows], [float(r[-2]) for r in rows])
    _write_summary(config.out, "norm", summary, config)
    return summary


# -- scaling / adaptivity gap -------------------------------------------------------

def fit_loglog(xs, ys) -> ScalingFit:
    """Least-squares fit of log(y) on log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(((ly - pred) ** 2).sum())
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(algo="", slope=float(slope), intercept=float(intercept), r2=r2)


@dataclass
class ScalingPoint:
    algo: str
    sweep_var: str
    sweep_value: float
    trials: int
    successes: int
    budget: float
    mean_samples: float

    @property
    def rate(self) -> float:
        return self.successes / self.trials


@dataclass
class ScalingResult:
    points: list[ScalingPoint]
    fits: tuple[ScalingFit, ...]
    summary: RunSummary


def _gap_trial(arm_set: UnionOfBalls, algo: str, knobs: tuple, config: ExperimentConfig,
               trial_seed: int, plans: dict) -> tuple[bool, int]:
    rng = as_rng(stable_mix(trial_seed, 1))
    block = 1 + int(rng.integers(0, arm_set.k))
    r_norm = float(config.r) if config.r else 1.0
    theta = arm_set.embed(r_norm * random_unit(arm_set.block_dim, rng), block)
    env = Environment(theta, seed=stable_mix(trial_seed, 2))
    if algo == "adaptive":
        result = union_ball_adaptive_bai(arm_set, config.eps, config.delta, env,
                                         consts=plans["consts"], rng=as_rng(stable_mix(trial_seed, 3)),
                                         budget_scale=knobs[0], phase2_scale=knobs[1],
                                         block_plan=plans["block"])
    else:
        result = fixed_design_bai(arm_set, config.eps, config.delta, env, plan=plans["full"],
                                  budget_override=max(int(knobs[0]), plans["full"].lam0.support.shape[0]),
                                  enforce_min_budget=False)
    return is_eps_best(env, arm_set, result.chosen, config.eps), result.samples


def _tune_point(arm_set: UnionOfBalls, algo: str, config: ExperimentConfig,
                plans: dict, start_knobs: tuple, target: float,
                max_doublings: int = 24, refinements: int = 2) -> ScalingPoint:
    """Tune every budget knob of the algorithm to the target success rate.

    Joint doubling brackets the target, a coordinate-halving descent then
    lets each knob fall back to its own minimum (this is what balances the
    two phases of the adaptive algorithm), and a short per-knob bisection
    shaves the remaining factor-2 quantization.  The recorded budget is
    the primary knob; mean_samples carries the measured cost.
    """
    algo_tag = {"adaptive": 1, "nonadaptive": 2}[algo]
    base = stable_mix(config.master_seed, algo_tag * 1000 + arm_set.k)
    step = 0

    def measure(knobs: tuple) -> ScalingPoint:
        nonlocal step
        wins = 0
        samples = []
        for i in range(config.trials):
            ok, used = _gap_trial(arm_set, algo, knobs, config,
                                  stable_mix(base, step * config.trials + i), plans)
            wins += int(ok)
            samples.append(used)
        step += 1
        return ScalingPoint(algo=algo, sweep_var="d", sweep_value=arm_set.block_dim,
                            trials=config.trials, successes=wins, budget=float(knobs[0]),
                            mean_samples=float(np.mean(samples)))

    knobs = tuple(start_knobs)
    point = measure(knobs)
    for _ in range(max_doublings):
        if point.rate >= target:
            break
        knobs = tuple(2.0 * k for k in knobs)
        point = measure(knobs)
    if point.rate < target:
        return point

    improved = True
    while improved:
        improved = False
        for i in range(len(knobs)):
            trial_knobs = tuple(k / 2.0 if j == i else k for j, k in enumerate(knobs))
            cand = measure(trial_knobs)
            if cand.rate >= target:
                knobs, point, improved = trial_knobs, cand, True

    for i in range(len(knobs)):
        lo = knobs[i] / 2.0  # the last rejected value for this knob
        for _ in range(refinements):
            mid = math.sqrt(lo * knobs[i])
            trial_knobs = tuple(mid if j == i else k for j, k in enumerate(knobs))
            cand = measure(trial_knobs)
            if cand.rate >= target:
                knobs, point = trial_knobs, cand
            else:
                lo = mid
    return point


def scaling_experiment(config: ExperimentConfig) -> ScalingResult:
    """Union-of-balls adaptivity-gap sweep with k = d over config.sweep.

    Budgets are auto-tuned by doubling to the target success rate
    (default 1 - delta) at every sweep point, then bisection-refined; the
    fitted log-log slopes of mean samples against d are written as fit rows.
    """
    config.validate()
    if len(config.sweep) < 3:
        raise InsufficientPointsError(f"need >= 3 sweep points, got {config.sweep}")
    target = config.target_rate if config.target_rate is not None else 1.0 - config.delta
    consts = _norm_consts(config)
    points: list[ScalingPoint] = []
    for d in config.sweep:
        d = int(d)
        arm_set = UnionOfBalls(d, d)
        plans = {
            "consts": consts,
            "block": plan_fixed_design(Ball(d), seed=stable_mix(config.master_seed, 11 + d)),
            "full": plan_fixed_design(arm_set, seed=stable_mix(config.master_seed, 211 + d)),
        }
        start_scale = float(config.budget.get("start_scale", 2.0**-14))
        start_budget = float(config.budget.get("start_override", 2 * arm_set.dim))
        points.append(_tune_point(arm_set, "adaptive", config, plans,
                                  (start_scale, start_scale), target))
        points.append(_tune_point(arm_set, "nonadaptive", config, plans,
                                  (start_budget,), target))

    fits = []
    for algo in ("adaptive", "nonadaptive"):
        mine = [p for p in points if p.algo == algo]
        fit = fit_loglog([p.sweep_value for p in mine], [p.mean_samples for p in mine])
        fits.append(ScalingFit(algo=algo, slope=fit.slope, intercept=fit.intercept, r2=fit.r2))

    fh, writer = _open_csv(config.out, SCALING_HEADER)
    try:
        if writer:
            for p in points:
                writer.writerow(["point", p.algo, p.sweep_var, p.sweep_value, p.trials,
                                 p.successes, p.rate, p.budget, p.mean_samples, "", "", ""])
            for f in fits:
                writer.writerow(["fit", f.algo, "d", "", "", "", "", "", "",
                                 f.slope, f.intercept, f.r2])
    finally:
        if fh:
            fh.close()
    all_wins = [1] * sum(p.successes for p in points) + \
               [0] * sum(p.trials - p.successes for p in points)
    summary = summarize(all_wins, [p.mean_samples for p in points], fits=tuple(fits))
    _write_summary(config.out, "scaling", summary, config)
    return ScalingResult(points=points, fits=tuple(fits), summary=summary)


# -- report -------------------------------------------------------------------------

def report(path: str) -> RunSummary:
    """Recompute the summary from a records CSV (run or norm schema)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty CSV") from None
        rows = list(reader)
    if not rows:
        raise ConfigError(f"{path}: no records")
    joined = ",".join(header)
    if joined == RUN_HEADER:
        s_idx, n_idx = header.index("success"), header.index("samples")
    elif joined == NORM_HEADER:
        s_idx, n_idx = header.index("success"), header.index("samples")
    else:
        raise ConfigError(f"{path}: unknown CSV schema header {joined!r}")
    return summarize([int(r[s_idx]) for r in rows], [float(r[n_idx]) for r in rows])
