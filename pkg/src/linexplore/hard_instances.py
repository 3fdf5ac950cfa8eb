"""Hard reward-vector families for lower-bound probes.

Each sampler returns the planted vector together with the planted arm and
the closed-form optimal value, so the harness can verify optima exactly and
measure empirical failure rates of concrete algorithms under the family.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .arm_sets import ArmSet, Hypercube01, HypercubePM, MSet, MultiTask, UnionOfBalls
from .errors import RegimeViolationError
from .seeding import as_rng, random_unit


@dataclass(frozen=True)
class HardInstance:
    theta: np.ndarray
    planted_arm: np.ndarray | None
    optimal_value: float


def multitask_hard(d_vec, eps: float, rng, zero_block: int | None = None) -> HardInstance:
    """Spiked multi-task instance: one uniformly random coordinate per block
    raised to 10 eps_j with eps_j = eps sqrt(d_j) / sum_s sqrt(d_s), so the
    block spikes sum to eps and the optimal value is 10 eps.

    zero_block (1-based) leaves that block all-zero: the alternative
    instance used by KL probes.  Its optimal value drops by 10 eps_j.
    """
    rng = as_rng(rng)
    ms = MultiTask(d_vec)
    denom = sum(math.sqrt(dj) for dj in ms.d_vec)
    theta = np.zeros(ms.dim)
    planted = np.zeros(ms.dim)
    optimal = 0.0
    for j, ((lo, hi), dj) in enumerate(zip(ms.blocks(), ms.d_vec), start=1):
        pos = lo + int(rng.integers(0, dj))
        planted[pos] = 1.0
        if zero_block is not None and j == zero_block:
            continue
        eps_j = eps * math.sqrt(dj) / denom
        theta[pos] = 10.0 * eps_j
        optimal += 10.0 * eps_j
    return HardInstance(theta=theta, planted_arm=planted, optimal_value=optimal)


def mset_hard(d: int, m: int, eps: float, rng) -> HardInstance:
    """Spiked m-set instance: Delta = 10 eps / m on a uniformly random
    support of size m.  Requires d - m + 1 >= 20 m."""
    if d - m + 1 < 20 * m:
        raise RegimeViolationError(f"need d - m + 1 >= 20 m; d={d}, m={m} requires d >= {21 * m - 1}")
    rng = as_rng(rng)
    delta = 10.0 * eps / m
    support = rng.choice(d, size=m, replace=False)
    theta = np.zeros(d)
    theta[support] = delta
    planted = np.zeros(d)
    planted[support] = 1.0
    return HardInstance(theta=theta, planted_arm=planted, optimal_value=m * delta)


def hypercube_hard(d: int, eps: float, variant: str, rng) -> HardInstance:
    """Signed hypercube instances.

    variant "zeroone": coordinates are +10 eps/d where the random pattern
    has a 1 and -10 eps/d where it has a 0.  variant "pm": coordinates are
    the pattern's sign times 5 eps/d.
    """
    rng = as_rng(rng)
    bits = rng.integers(0, 2, size=d)
    if variant == "zeroone":
        theta = np.where(bits == 1, 10.0 * eps / d, -10.0 * eps / d)
        planted = bits.astype(float)
        optimal = float(bits.sum()) * 10.0 * eps / d
    elif variant == "pm":
        signs = 2.0 * bits - 1.0
        theta = signs * 5.0 * eps / d
        planted = signs
        optimal = 5.0 * eps
    else:
        raise ValueError(f"variant must be 'pm' or 'zeroone', got {variant!r}")
    return HardInstance(theta=theta, planted_arm=planted, optimal_value=optimal)


def unionball_hard(k: int, d: int, per_block_budget: int, delta: float, rng,
                   c0: float = 0.5) -> HardInstance:
    """Single-block spiked instance for the union of balls: a random unit
    direction in a random block, scaled to c0 sqrt(delta) d / sqrt(T_block).

    Surrogate for the per-block prior construction used by the
    block-allocation lower bound; the norm matches that scale exactly.
    """
    if k < 1 or d < 1 or per_block_budget < 1:
        raise ValueError("k, d, per_block_budget must be positive")
    rng = as_rng(rng)
    ub = UnionOfBalls(k, d)
    block = 1 + int(rng.integers(0, k))
    direction = random_unit(d, rng)
    scale = c0 * math.sqrt(delta) * d / math.sqrt(per_block_budget)
    theta = ub.embed(scale * direction, block)
    planted = ub.embed(direction, block)
    return HardInstance(theta=theta, planted_arm=planted, optimal_value=scale)


@dataclass(frozen=True)
class HardFamily:
    """A named, seeded distribution over reward vectors."""

    kind: str
    arm_set: ArmSet
    sampler: Callable[[np.random.Generator], HardInstance]

    def sample(self, rng) -> HardInstance:
        return self.sampler(as_rng(rng))


def hard_family(spec: str, eps: float, delta: float = 0.1) -> HardFamily:
    """Build a family from `multitask:<d1,d2,...>`, `mset:<d>:<m>`,
    `cube_pm:<d>`, `cube_01:<d>`, or `unionballs:<k>:<d>:<per_block_budget>`."""
    kind, _, rest = spec.partition(":")
    if kind == "multitask":
        d_vec = tuple(int(x) for x in rest.split(","))
        return HardFamily("MultiTaskSpiked", MultiTask(d_vec),
                          lambda rng: multitask_hard(d_vec, eps, rng))
    if kind == "mset":
        d, m = (int(x) for x in rest.split(":"))
        mset_hard(d, m, eps, np.random.default_rng(0))  # fail fast on the regime gate
        return HardFamily("MSetSpiked", MSet(d, m), lambda rng: mset_hard(d, m, eps, rng))
    if kind == "cube_pm":
        d = int(rest)
        return HardFamily("HypercubePMSigned", HypercubePM(d),
                          lambda rng: hypercube_hard(d, eps, "pm", rng))
    if kind == "cube_01":
        d = int(rest)
        return HardFamily("Hypercube01Signed", Hypercube01(d),
                          lambda rng: hypercube_hard(d, eps, "zeroone", rng))
    if kind == "unionballs":
        k, d, budget = (int(x) for x in rest.split(":"))
        return HardFamily("UnionBlockSpiked", UnionOfBalls(k, d),
                          lambda rng: unionball_hard(k, d, budget, delta, rng))
    raise ValueError(f"unknown hard family {spec!r}")
