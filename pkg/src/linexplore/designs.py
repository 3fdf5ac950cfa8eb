"""Design distributions, Gaussian-width estimation, and integer rounding.

A design is a finitely supported probability distribution over arms with
moment matrix A(lambda) = sum_x w_x x x^T.  This module computes the
G-optimal design (max leverage d), the width-minimizing design (sample
average approximation over frozen Gaussian draws, optimized by Frank-Wolfe),
their mixture, Monte Carlo width / tau statistics, and proportional rounding
of a design into integer pull counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arm_sets import ArmSet, Ball, FiniteSet, MultiTask, UnionOfBalls, multitask_basis
from .errors import (
    BudgetTooSmallError,
    DimensionMismatchError,
    NotPSDError,
    NotSpanningError,
    SingularError,
)
from .seeding import as_rng

DESIGN_ENUM_CAP = 1 << 18
LEVERAGE_ENUM_CAP = 1 << 14
_EIG_FLOOR = 1e-12


@dataclass
class Design:
    """Probability distribution over finitely many arms."""

    support: np.ndarray  # (n, dim)
    weights: np.ndarray  # (n,)
    diagnostics: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.support.ndim != 2 or self.weights.shape != (self.support.shape[0],):
            raise ValueError("support must be (n, dim) with one weight per atom")
        if np.any(self.weights < -1e-15):
            raise ValueError("weights must be nonnegative")
        self.weights = np.clip(self.weights, 0.0, None)
        if abs(float(self.weights.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    def moment(self) -> np.ndarray:
        """A(lambda) = sum_x w_x x x^T, symmetrized."""
        A = (self.support * self.weights[:, None]).T @ self.support
        return 0.5 * (A + A.T)

    def trimmed(self, tol: float = 1e-9) -> "Design":
        keep = self.weights > tol
        if not np.any(keep):
            return self
        w = self.weights[keep]
        return Design(self.support[keep], w / w.sum(), diagnostics=self.diagnostics)


@dataclass
class FixedDesign:
    """Integer pull counts per support arm, summing to the budget T."""

    support: np.ndarray
    counts: np.ndarray
    quality: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")
        if int(self.counts.sum()) < 1:
            raise ValueError("budget must be positive")
        A = self.moment()
        vals = np.linalg.eigvalsh(A)
        if vals[0] <= _EIG_FLOOR * max(vals[-1], _EIG_FLOOR):
            raise SingularError("fixed design moment matrix is singular")

    @property
    def budget(self) -> int:
        return int(self.counts.sum())

    def moment(self) -> np.ndarray:
        """A_T = (1/T) sum counts_x x x^T."""
        A = (self.support * self.counts[:, None]).T @ self.support / self.budget
        return 0.5 * (A + A.T)


@dataclass(frozen=True)
class WidthEstimate:
    """Monte Carlo estimate of E max_x <x, A^{-1/2} eta>."""

    mean: float
    stderr: float
    draws: int

    def __post_init__(self):
        if self.stderr < 0 or self.draws < 1:
            raise ValueError("stderr must be >= 0 and draws >= 1")

    @property
    def ucb(self) -> float:
        """mean + 2 stderr; the conservative value plugged into budgets."""
        return self.mean + 2.0 * self.stderr


# -- matrix helpers -----------------------------------------------------------

def inv_sqrt_psd(M: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """(M + ridge I)^{-1/2} via symmetric eigendecomposition.

    Raises NotPSDError when an eigenvalue is below -1e-8 * ||M||, and
    SingularError when ridge is 0 and the smallest eigenvalue is at most
    1e-12 times the largest.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be square")
    if not np.allclose(M, M.T, atol=1e-10 * max(1.0, float(np.abs(M).max()))):
        raise ValueError("M must be symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    scale = max(float(np.abs(vals).max()), np.finfo(float).tiny)
    if vals[0] < -1e-8 * scale:
        raise NotPSDError(f"eigenvalue {vals[0]:.3e} below -1e-8 * ||M||")
    vals = np.clip(vals, 0.0, None)
    if ridge == 0.0 and vals[0] <= _EIG_FLOOR * scale:
        raise SingularError("matrix is singular and no ridge was supplied")
    R = (vecs * (vals + ridge) ** -0.5) @ vecs.T
    return 0.5 * (R + R.T)


def _range_decompose(A: np.ndarray):
    """Eigendecomposition split into range and null space."""
    A = 0.5 * (A + np.asarray(A, dtype=float).T)
    vals, vecs = np.linalg.eigh(A)
    scale = max(float(vals[-1]), np.finfo(float).tiny)
    keep = vals > _EIG_FLOOR * scale
    return vals[keep], vecs[:, keep]


def _check_set_in_range(arm_set: ArmSet, basis: np.ndarray):
    """Raise SingularError unless span(arm_set) lies in range(basis)."""
    P = basis @ basis.T
    if isinstance(arm_set, FiniteSet):
        arms = arm_set.arms
        resid = float(np.abs(arms - arms @ P).max())
        if resid > 1e-8:
            raise SingularError("moment matrix does not cover the span of the arms")
        return
    if isinstance(arm_set, MultiTask):
        U = multitask_basis(arm_set.d_vec)
        if basis.shape[1] == U.shape[1] and float(np.abs(U - P @ U).max()) <= 1e-8:
            return
        raise SingularError("moment matrix does not cover the multi-task span")
    raise SingularError("moment matrix is singular for a full-dimensional set")


def width_mc(arm_set: ArmSet, A: np.ndarray, draws: int, seed: int | np.random.Generator = 0) -> WidthEstimate:
    """Monte Carlo E max_x <x, A^{-1/2} eta>, eta ~ N(0, I).

    A may be rank deficient as long as its range contains span(arm_set)
    (one-hot multi-task designs); the Gaussian is then drawn in range
    coordinates, which leaves the width unchanged.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (arm_set.dim, arm_set.dim):
        raise DimensionMismatchError(f"A has shape {A.shape}, set dimension is {arm_set.dim}")
    rng = as_rng(seed)
    vals, basis = _range_decompose(A)
    if vals.size == 0:
        raise SingularError("moment matrix is zero")
    if basis.shape[1] < arm_set.dim:
        _check_set_in_range(arm_set, basis)
    eta = rng.standard_normal((int(draws), basis.shape[1]))
    dirs = (eta * vals**-0.5) @ basis.T
    samples = arm_set.max_inner(dirs)
    mean = float(samples.mean())
    stderr = float(samples.std(ddof=1) / math.sqrt(len(samples))) if len(samples) > 1 else 0.0
    return WidthEstimate(mean=mean, stderr=stderr, draws=int(draws))


def estimate_width(arm_set: ArmSet, design: Design, draws: int, seed: int | np.random.Generator = 0) -> WidthEstimate:
    """Width of the set under a design's moment matrix; deterministic given seed."""
    return width_mc(arm_set, design.moment(), draws, seed)


def max_leverage(arm_set: ArmSet, A: np.ndarray, probes: int = 10**4,
                 enum_cap: int = LEVERAGE_ENUM_CAP, seed: int = 0) -> float:
    """max_x x^T A^{-1} x over the set.

    Exact for finite sets (enumerating up to enum_cap arms), the ball
    (operator norm of A^{-1}), and unions of balls (per-block operator
    norms).  Larger discrete sets fall back to seeded probe arms plus the
    sign / indicator / top-m patterns of the eigenvectors of A^{-1}.
    """
    A = np.asarray(A, dtype=float)
    vals, basis = _range_decompose(A)
    if basis.shape[1] < arm_set.dim:
        _check_set_in_range(arm_set, basis)

    def lev(arms: np.ndarray) -> float:
        Z = arms @ basis  # range coordinates
        return float(((Z / vals) * Z).sum(axis=1).max())

    if isinstance(arm_set, Ball):
        return float(1.0 / vals.min())
    if isinstance(arm_set, UnionOfBalls):
        Ainv = (basis / vals) @ basis.T
        best = 0.0
        for i in range(arm_set.k):
            sl = arm_set.block_slice(i + 1)
            best = max(best, float(np.linalg.eigvalsh(Ainv[sl, sl])[-1]))
        return best
    if isinstance(arm_set, FiniteSet):
        return lev(arm_set.arms)
    count = arm_set.count()
    if count is not None and count <= enum_cap:
        return lev(arm_set.enumerate_arms(cap=enum_cap))
    # Probe fallback: eigenvector-shaped patterns plus random members.
    Ainv = (basis / vals) @ basis.T
    _, evecs = np.linalg.eigh(Ainv)
    candidates = [arm_set.linear_argmax(evecs[:, j]) for j in (-1, -2)]
    candidates += [arm_set.linear_argmax(-evecs[:, j]) for j in (-1, -2)]
    rng = as_rng(seed)
    dirs = rng.standard_normal((probes, arm_set.dim))
    arms = np.vstack([arm_set.argmax_inner_many(dirs), np.array(candidates)])
    return lev(arms)


def tau_statistic(arm_set: ArmSet, A: np.ndarray, delta: float, draws: int,
                  seed: int | np.random.Generator = 0) -> float:
    """(E max_x x^T A^{-1/2} eta)^2 + 2 max_x ||x||^2_{A^{-1}} log(2/delta)."""
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    w = width_mc(arm_set, A, draws, seed)
    return w.mean**2 + 2.0 * max_leverage(arm_set, A) * math.log(2.0 / delta)


# -- design construction -------------------------------------------------------

def uniform_design(arm_set: ArmSet, cap: int = DESIGN_ENUM_CAP) -> Design:
    """Uniform weights over the enumerated arms (product-uniform for multi-task)."""
    arms = arm_set.enumerate_arms(cap=cap)
    return Design(arms, np.full(arms.shape[0], 1.0 / arms.shape[0]))


def _atom_pool(arm_set: ArmSet, enum_cap: int) -> np.ndarray:
    if isinstance(arm_set, FiniteSet):
        return np.unique(arm_set.arms, axis=0)
    if isinstance(arm_set, (Ball, UnionOfBalls)):
        return np.eye(arm_set.dim)
    return arm_set.enumerate_arms(cap=enum_cap)


def _check_spanning(pool: np.ndarray, dim: int):
    if np.linalg.matrix_rank(pool, tol=1e-10 * max(1.0, float(np.abs(pool).max()))) < dim:
        raise NotSpanningError(f"arms span a {np.linalg.matrix_rank(pool)}-dimensional subspace of R^{dim}")


def _ridge_of(A: np.ndarray) -> float:
    return 1e-9 * float(np.trace(A)) / A.shape[0]


def _continuous_leverage_atom(arm_set: ArmSet, Ainv: np.ndarray):
    """Highest-leverage arm of a continuous set: top eigvec of A^{-1} for the
    ball, best block's top eigvec for a union of balls."""
    if isinstance(arm_set, Ball):
        vals, vecs = np.linalg.eigh(Ainv)
        return vecs[:, -1], float(vals[-1])
    if isinstance(arm_set, UnionOfBalls):
        best_lev, best_arm = -np.inf, None
        for i in range(arm_set.k):
            sl = arm_set.block_slice(i + 1)
            vals, vecs = np.linalg.eigh(Ainv[sl, sl])
            if vals[-1] > best_lev:
                best_lev = float(vals[-1])
                best_arm = arm_set.embed(vecs[:, -1], i + 1)
        return best_arm, best_lev
    return None, -np.inf


def g_optimal(arm_set: ArmSet, max_iters: int = 5000, tol: float = 1e-3,
              enum_cap: int = DESIGN_ENUM_CAP) -> Design:
    """G-optimal design by multiplicative leverage updates with a
    Frank-Wolfe exchange step for continuous sets.

    Stops when max_x ||x||^2_{A^{-1}} <= d (1 + tol); by the equivalence
    theorem the optimum value is exactly d.  The support is then reduced to
    at most d(d+1)/2 + 1 atoms by an exact Caratheodory step that preserves
    the moment matrix.  On non-convergence the best iterate is returned
    with diagnostics["converged"] = False.
    """
    d = arm_set.dim
    pool = _atom_pool(arm_set, enum_cap)
    _check_spanning(pool, d)
    w = np.full(pool.shape[0], 1.0 / pool.shape[0])
    continuous = isinstance(arm_set, (Ball, UnionOfBalls))

    iters = 0
    max_lev = np.inf
    for iters in range(max_iters + 1):
        A = (pool * w[:, None]).T @ pool
        ridge = _ridge_of(A)
        Ainv = np.linalg.inv(A + ridge * np.eye(d))
        levs = ((pool @ Ainv) * pool).sum(axis=1)
        max_lev = float(levs.max())
        cand = None
        if continuous:
            cand, cand_lev = _continuous_leverage_atom(arm_set, Ainv)
            max_lev = max(max_lev, cand_lev)
        if max_lev <= d * (1.0 + tol) or iters == max_iters:
            break
        if continuous and cand_lev > float(levs.max()):
            # Exchange toward the off-pool atom, exact D-optimal step size.
            gamma = (cand_lev / d - 1.0) / (cand_lev - 1.0)
            pool = np.vstack([pool, cand])
            w = np.append((1.0 - gamma) * w, gamma)
        else:
            w = w * levs / d
            w /= w.sum()
        keep = w > 1e-14
        if not np.all(keep):
            pool, w = pool[keep], w[keep] / w[keep].sum()

    keep = w > 1e-9
    pool, w = pool[keep], w[keep] / w[keep].sum()
    pool, w = _caratheodory_reduce(pool, w)
    return Design(pool, w, diagnostics={
        "converged": bool(max_lev <= d * (1.0 + tol)),
        "iterations": iters,
        "max_leverage": max_lev,
    })


def _caratheodory_reduce(support: np.ndarray, weights: np.ndarray):
    """Reduce a design to at most d(d+1)/2 + 1 atoms without changing its
    moment matrix: repeatedly move the weights along a null direction of the
    (moment entries, total mass) linear system until an atom hits zero."""
    d = support.shape[1]
    cap = d * (d + 1) // 2 + 1
    iu = np.triu_indices(d)
    support = support.copy()
    weights = weights.copy()
    while weights.shape[0] > cap:
        cols = np.einsum("ni,nj->nij", support, support)[:, iu[0], iu[1]].T
        M = np.vstack([cols, np.ones((1, weights.shape[0]))])
        v = np.linalg.svd(M)[2][-1]
        if not np.any(v < -1e-15):
            v = -v
        ratios = np.where(v < -1e-15, weights / np.where(v < -1e-15, -v, 1.0), np.inf)
        j = int(np.argmin(ratios))
        weights = weights + ratios[j] * v
        weights[j] = 0.0
        keep = weights > 1e-15
        support = support[keep]
        weights = np.clip(weights[keep], 0.0, None)
        weights /= weights.sum()
    return support, weights


class _SaaObjective:
    """Sample-average width objective over frozen Gaussian draws, with the
    envelope-theorem gradient in design-weight space.

    The gradient needs the Frechet derivative of A -> A^{-1/2}; in the
    eigenbasis this is the divided-difference (Daleckii-Krein) kernel
    K_ij = (s_i^{-1/2} - s_j^{-1/2}) / (s_i - s_j).
    """

    def __init__(self, arm_set: ArmSet, eta: np.ndarray):
        self.arm_set = arm_set
        self.eta = eta

    def moment(self, pool, w):
        A = (pool * w[:, None]).T @ pool
        return 0.5 * (A + A.T)

    def value(self, pool, w) -> float:
        A = self.moment(pool, w)
        R = inv_sqrt_psd(A, ridge=_ridge_of(A))
        return float(self.arm_set.max_inner(self.eta @ R).mean())

    def value_and_grad(self, pool, w):
        A = self.moment(pool, w)
        vals, vecs = np.linalg.eigh(A + _ridge_of(A) * np.eye(A.shape[0]))
        vals = np.clip(vals, np.finfo(float).tiny, None)
        inv_sqrt = vals**-0.5
        R = (vecs * inv_sqrt) @ vecs.T
        dirs = self.eta @ R
        X = self.arm_set.argmax_inner_many(dirs)
        value = float((X * dirs).sum(axis=1).mean())
        # Divided differences of s -> s^{-1/2} on the eigenvalues.
        diff = vals[:, None] - vals[None, :]
        num = inv_sqrt[:, None] - inv_sqrt[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            K = np.where(np.abs(diff) > 1e-14 * vals.max(), num / diff, 0.0)
        np.fill_diagonal(K, -0.5 * vals**-1.5)
        P = X @ vecs
        Q = self.eta @ vecs
        G = K * (P.T @ Q / self.eta.shape[0])
        W = vecs @ (0.5 * (G + G.T)) @ vecs.T
        grad = ((pool @ W) * pool).sum(axis=1)
        return value, grad, W


def width_design(arm_set: ArmSet, gaussian_draws: int = 512, max_iters: int = 300,
                 seed: int = 0, warm: Design | None = None, rel_tol: float = 1e-5,
                 enum_cap: int = DESIGN_ENUM_CAP) -> Design:
    """Design minimizing the sample-average width over frozen Gaussian draws.

    Frank-Wolfe over the weight simplex, warm-started at the G-optimal
    design; steps are accepted only when they lower the SAA objective, so
    the result is never worse than the warm start on the same draws.
    """
    if warm is None:
        warm = g_optimal(arm_set, enum_cap=enum_cap)
    d = arm_set.dim
    rng = as_rng(seed)
    obj = _SaaObjective(arm_set, rng.standard_normal((int(gaussian_draws), d)))

    pool = warm.support.copy()
    w = warm.weights.copy()
    warm_value = obj.value(pool, w)
    current = warm_value
    continuous = isinstance(arm_set, (Ball, UnionOfBalls))
    stall = 0
    iters = 0
    for iters in range(1, max_iters + 1):
        value, grad, W = obj.value_and_grad(pool, w)
        j = int(np.argmin(grad))
        target = float(grad[j])
        if continuous:
            # Vertex search over the whole set: minimize x^T W x.
            if isinstance(arm_set, Ball):
                vals, vecs = np.linalg.eigh(W)
                cand, cand_val = vecs[:, 0], float(vals[0])
            else:
                cand, cand_val, ub = None, np.inf, arm_set
                for i in range(ub.k):
                    sl = ub.block_slice(i + 1)
                    vals, vecs = np.linalg.eigh(W[sl, sl])
                    if vals[0] < cand_val:
                        cand_val = float(vals[0])
                        cand = ub.embed(vecs[:, 0], i + 1)
            if cand_val < target - 1e-15:
                pool = np.vstack([pool, cand])
                w = np.append(w, 0.0)
                grad = np.append(grad, cand_val)
                j, target = pool.shape[0] - 1, cand_val
        gap = float(w @ grad) - target
        if gap <= rel_tol * max(abs(value), 1e-12):
            break
        base = min(1.0, 2.0 / (iters + 2.0))
        best_gamma, best_value = 0.0, current
        for gamma in (base, base / 2, base / 4, base / 8, base / 16):
            w_try = (1.0 - gamma) * w
            w_try[j] += gamma
            v_try = obj.value(pool, w_try)
            if v_try < best_value - 1e-15:
                best_gamma, best_value = gamma, v_try
        if best_gamma == 0.0:
            stall += 1
            if stall >= 3:
                break
            continue
        stall = 0
        w = (1.0 - best_gamma) * w
        w[j] += best_gamma
        current = best_value

    design = Design(pool, w, diagnostics={
        "objective": current,
        "warm_objective": warm_value,
        "iterations": iters,
    }).trimmed()
    if obj.value(design.support, design.weights) > warm_value:
        # Trimming dust must never break the warm-start contract.
        return Design(warm.support, warm.weights, diagnostics={
            "objective": warm_value, "warm_objective": warm_value, "iterations": iters,
        })
    return design


def mix(designs: list[Design], coeffs) -> Design:
    """Convex combination of designs, merging duplicate support arms."""
    coeffs = np.asarray(coeffs, dtype=float)
    if len(designs) != coeffs.shape[0] or len(designs) == 0:
        raise ValueError("need one coefficient per design")
    if np.any(coeffs < -1e-15) or abs(float(coeffs.sum()) - 1.0) > 1e-12:
        raise ValueError("coefficients must be a probability vector")
    dim = designs[0].dim
    merged: dict[bytes, tuple[np.ndarray, float]] = {}
    for design, c in zip(designs, coeffs):
        if design.dim != dim:
            raise DimensionMismatchError("designs live in different dimensions")
        for arm, weight in zip(design.support, design.weights):
            key = arm.tobytes()
            prev = merged.get(key)
            merged[key] = (arm, (prev[1] if prev else 0.0) + float(c) * float(weight))
    support = np.array([v[0] for v in merged.values()])
    weights = np.array([v[1] for v in merged.values()])
    return Design(support, weights / weights.sum())


# -- rounding ------------------------------------------------------------------

def _proportional_counts(weights: np.ndarray, budget: int, force_one: bool) -> np.ndarray:
    """Floor T*w, then hand out the remainder by largest fractional part,
    ties to the lowest support index."""
    n = weights.shape[0]
    base = np.ones(n, dtype=np.int64) if force_one else np.zeros(n, dtype=np.int64)
    spare = budget - int(base.sum())
    target = spare * weights
    floors = np.floor(target).astype(np.int64)
    frac = target - floors
    counts = base + floors
    remainder = budget - int(counts.sum())
    order = np.lexsort((np.arange(n), -frac))
    counts[order[:remainder]] += 1
    return counts


def round_design(design: Design, budget: int, arm_set: ArmSet | None = None,
                 enforce_min_budget: bool = True, quality_draws: int = 2048,
                 seed: int = 0, with_quality: bool = True) -> FixedDesign:
    """Round a design to integer pull counts summing to `budget`.

    Proportional floor rounding with largest-fraction remainders.  The
    budget must cover the support and, unless `enforce_min_budget` is
    False (test/benchmark mode), be at least 180 d.  If flooring zeroes a
    spanning atom the rounding retries with one forced pull per atom.  The
    attached quality report compares the Monte Carlo width functional of
    the rounded moment matrix against the target design's on shared draws.
    """
    design = design.trimmed()
    n, d = design.support.shape
    budget = int(budget)
    if budget < n:
        raise BudgetTooSmallError(f"budget {budget} cannot cover {n} support atoms")
    if enforce_min_budget and budget < 180 * d:
        raise BudgetTooSmallError(f"budget {budget} is below 180 d = {180 * d}")

    counts = _proportional_counts(design.weights, budget, force_one=False)
    fixed = None
    for force_one in (False, True):
        if force_one:
            counts = _proportional_counts(design.weights, budget, force_one=True)
        try:
            fixed = FixedDesign(design.support, counts)
            break
        except SingularError:
            continue
    if fixed is None:
        raise SingularError("rounding zeroed a spanning atom and the forced-pull retry is still singular")

    if with_quality:
        probe_set = arm_set if arm_set is not None else FiniteSet(design.support)
        f_target = width_mc(probe_set, design.moment(), quality_draws, seed).mean
        f_rounded = width_mc(probe_set, fixed.moment(), quality_draws, seed).mean
        fixed.quality = {
            "f_target": f_target,
            "f_rounded": f_rounded,
            "ratio": f_rounded / f_target if f_target > 0 else float("nan"),
            "draws": quality_draws,
        }
    return fixed
