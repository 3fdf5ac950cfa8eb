"""Adaptive L2-norm estimation from noisy linear measurements on the unit ball.

Four pieces: an additive-error estimator that needs a coarse scale r0, an
adaptive multi-scale test producing that coarse scale, a debiased
least-squares estimator for the large-norm regime, and the meta-estimator
dispatching between them.  Sample counts follow the count constants in
NormConsts; the shipped defaults come from the calibration script in
scripts/calibrate_norm_constants.py.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .errors import RegimeViolationError
from .seeding import as_rng

BRANCH_TINY = "tiny"
BRANCH_MID = "mid"
BRANCH_LARGE = "large"
BRANCH_LARGE_SINGULAR = "large_singular_fallback"

_EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class NormConsts:
    """Sample-count constants.

    c0 scales the per-direction repeat count, c1 the number of directions,
    C0 the row-count gate of the large-norm estimator, and C1 its sample
    scale.  budget_factor is the measured grid-wide constant C such that
    total samples stay below C * d * log(1/delta) / eps^2.
    """

    c0: float
    c1: float
    C0: float
    C1: float
    budget_factor: float = float("nan")

    def __post_init__(self):
        if min(self.c0, self.c1, self.C0, self.C1) <= 0:
            raise ValueError("all constants must be strictly positive")

    def scaled(self, factor: float) -> "NormConsts":
        """Scale every sample-count constant (c0, c1, C1) by `factor`.

        This is the budget knob the scaling harness doubles; the row-count
        gate C0 is a well-posedness floor and stays put.
        """
        if factor <= 0:
            raise ValueError("factor must be positive")
        return replace(self, c0=self.c0 * factor, c1=self.c1 * factor, C1=self.C1 * factor)


def default_consts() -> NormConsts:
    """Calibrated constants shipped with the package."""
    payload = json.loads(resources.files("linexplore").joinpath("norm_constants.json").read_text())
    return NormConsts(**payload)


def rademacher_direction(d: int, rng) -> np.ndarray:
    """Unit vector with iid +-1/sqrt(d) entries."""
    if d < 1:
        raise ValueError("d must be positive")
    rng = as_rng(rng)
    return (2.0 * rng.integers(0, 2, size=d) - 1.0) / math.sqrt(d)


@dataclass(frozen=True)
class NormReport:
    """Outcome of a norm-estimation run."""

    r_hat: float
    r0: float
    samples: int
    branch: str

    def __post_init__(self):
        if self.r_hat < 0 or self.samples < 0:
            raise ValueError("r_hat and samples must be nonnegative")


_CHUNK_ROWS = 1 << 16


def _direction_statistics(env, d: int, s: int, count: int, rng) -> np.ndarray:
    """Z_k = d (ybar_k^2 - 1/s) for `count` fresh Rademacher directions,
    each pulled s times.  Directions are processed in chunks so the pull
    matrices stay bounded; every sample is an individual environment pull."""
    out = np.empty(count)
    done = 0
    chunk = max(1, _CHUNK_ROWS // s)
    while done < count:
        c = min(chunk, count - done)
        X = (2.0 * rng.integers(0, 2, size=(c, d)) - 1.0) / math.sqrt(d)
        rewards = env.pull_batch(np.repeat(X, s, axis=0)).reshape(c, s)
        ybar = rewards.mean(axis=1)
        out[done : done + c] = d * (ybar * ybar - 1.0 / s)
        done += c
    return out


def additive_estimate(env, d: int, eps: float, delta: float, r0: float,
                      consts: NormConsts | None = None, rng=None) -> NormReport:
    """Additive-error estimate of ||theta||_2 given a coarse scale r0.

    Pulls exactly K*s samples with s = ceil(c0 d / r0^2) repeats along each
    of K = ceil(c1 r0^2 log(4/delta) / eps^2) Rademacher directions;
    averages the debiased squared means and takes the square root
    (0 when the average is negative).  The accuracy contract assumes
    r/2 < r0 <= 2r; the regime gate only checks eps < r0 < 2 sqrt(d).
    """
    consts = consts or default_consts()
    rng = as_rng(rng)
    if not (eps < r0 < 2.0 * math.sqrt(d)):
        raise RegimeViolationError(f"need eps < r0 < 2 sqrt(d), got eps={eps}, r0={r0}, d={d}")
    before = env.pulls
    s = math.ceil(consts.c0 * d / r0**2)
    K = math.ceil(consts.c1 * r0**2 * math.log(4.0 / delta) / eps**2)
    z_mean = float(_direction_statistics(env, d, s, K, rng).mean())
    r_hat = 0.0 if z_mean < 0 else math.sqrt(z_mean)
    samples = env.pulls - before
    assert samples == K * s
    return NormReport(r_hat=r_hat, r0=r0, samples=samples, branch=BRANCH_MID)


def multiscale_test(env, d: int, eps: float, delta: float,
                    consts: NormConsts | None = None, rng=None) -> tuple[float, int]:
    """Adaptive multi-scale test for the coarse scale r0.

    Walks t_j = 2^j eps while t_j < 2 sqrt(d), spending s_j = ceil(c0 d /
    t_j^2) repeats along each of K_j = ceil(c1 log(1/delta_j)) directions
    with delta_j = delta / 2^(j+2); stops at the first scale whose mean
    statistic falls below (3/2) t_j^2 and returns that t_j.  If every scale
    looks large the exhaust case returns exactly 2 sqrt(d), which routes
    the meta-estimator to the large-norm branch.
    """
    consts = consts or default_consts()
    rng = as_rng(rng)
    if not (0.0 < eps <= 1.0 and 0.0 < delta < 1.0):
        raise ValueError("need 0 < eps <= 1 and 0 < delta < 1")
    before = env.pulls
    j = 0
    while 2**j * eps < 2.0 * math.sqrt(d):
        t = 2**j * eps
        delta_j = delta / 2 ** (j + 2)
        s_j = math.ceil(consts.c0 * d / t**2)
        K_j = math.ceil(consts.c1 * math.log(1.0 / delta_j))
        u = float(_direction_statistics(env, d, s_j, K_j, rng).mean())
        if u < 1.5 * t * t:
            return t, env.pulls - before
        j += 1
    return 2.0 * math.sqrt(d), env.pulls - before


def large_norm_estimate(env, d: int, n: int, rng=None) -> NormReport:
    """Debiased least-squares estimate for the large-norm regime.

    Pulls n fresh Rademacher directions once each; when X^T X is invertible
    returns sqrt(max(||theta_hat||^2 - tr((X^T X)^{-1}), 0)), otherwise
    falls back to sqrt(d) (documented branch, not an error).
    """
    rng = as_rng(rng)
    if n < 1:
        raise ValueError("n must be positive")
    before = env.pulls
    X = (2.0 * rng.integers(0, 2, size=(int(n), d)) - 1.0) / math.sqrt(d)
    y = env.pull_batch(X)
    G = X.T @ X
    vals = np.linalg.eigvalsh(G)
    samples = env.pulls - before
    if vals[0] <= _EIG_FLOOR * max(vals[-1], _EIG_FLOOR):
        return NormReport(r_hat=math.sqrt(d), r0=float("nan"), samples=samples,
                          branch=BRANCH_LARGE_SINGULAR)
    theta_hat = np.linalg.solve(G, X.T @ y)
    sigma_trace = float(np.trace(np.linalg.inv(G)))
    debiased = float(theta_hat @ theta_hat) - sigma_trace
    return NormReport(r_hat=math.sqrt(max(debiased, 0.0)), r0=float("nan"),
                      samples=samples, branch=BRANCH_LARGE)


def large_norm_sample_size(d: int, eps: float, delta: float, consts: NormConsts) -> int:
    """n = max(ceil(C1 d log(4/delta) / eps^2), ceil(C0 (d + log(2/delta))))."""
    n_main = math.ceil(consts.C1 * d * math.log(4.0 / delta) / eps**2)
    n_gate = math.ceil(consts.C0 * (d + math.log(2.0 / delta)))
    return max(n_main, n_gate)


def estimate_norm(env, d: int, eps: float, delta: float,
                  consts: NormConsts | None = None, rng=None) -> NormReport:
    """Estimate ||theta||_2 to within eps with probability at least 1 - delta.

    Runs the multi-scale test at delta/2, then dispatches on its scale r0:
    exactly eps -> return eps (tiny branch); at least 2 sqrt(d) -> debiased
    least squares (large branch); otherwise the additive estimator at
    delta/2 (mid branch).  The report's sample count covers both stages.
    """
    consts = consts or default_consts()
    rng = as_rng(rng)
    if not (0.0 < eps <= 1.0):
        raise ValueError("need 0 < eps <= 1")
    if not (0.0 < delta < 1.0 / 3.0):
        raise ValueError("need 0 < delta < 1/3")
    half = delta / 2.0
    r0, scout_samples = multiscale_test(env, d, eps, half, consts, rng)
    if r0 == eps:
        return NormReport(r_hat=eps, r0=r0, samples=scout_samples, branch=BRANCH_TINY)
    if r0 >= 2.0 * math.sqrt(d):
        sub = large_norm_estimate(env, d, large_norm_sample_size(d, eps, half, consts), rng)
        return NormReport(r_hat=sub.r_hat, r0=r0, samples=scout_samples + sub.samples,
                          branch=sub.branch)
    sub = additive_estimate(env, d, eps, half, r0, consts, rng)
    return NormReport(r_hat=sub.r_hat, r0=r0, samples=scout_samples + sub.samples,
                      branch=BRANCH_MID)
