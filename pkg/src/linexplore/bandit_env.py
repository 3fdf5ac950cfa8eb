"""Observation model: y = <x, theta> + N(0,1) noise, with pull accounting.

Ground truth lives behind the referee functions at the bottom of the module;
algorithm code should only ever touch `pull`, `pull_many`, and `pull_batch`.
"""
from __future__ import annotations

import hashlib

import numpy as np

from .arm_sets import ArmSet, UnionOfBalls
from .errors import DimensionMismatchError
from .seeding import as_rng


class Environment:
    """A single-trial environment with a hidden reward vector.

    Noise comes from numpy's PCG64 generator (ziggurat normals), which is
    deterministic given the seed and draws identical values whether normals
    are requested one at a time or in batches, so replays are exact for any
    pull sequence.  One environment is single-writer: do not pull from
    several threads at once.
    """

    def __init__(self, theta, seed: int | np.random.Generator | None = 0, log_cap: int | None = None):
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1 or not np.all(np.isfinite(theta)):
            raise ValueError("theta must be a finite vector")
        self._theta = theta.copy()
        self._theta.setflags(write=False)
        self._rng = as_rng(seed)
        self._pulls = 0
        self._log_cap = log_cap
        self._log: list[np.ndarray] = []

    @property
    def dim(self) -> int:
        return self._theta.shape[0]

    @property
    def pulls(self) -> int:
        """Cumulative number of samples taken; nondecreasing."""
        return self._pulls

    @property
    def pull_log(self) -> list[np.ndarray]:
        """First `log_cap` pulled arms, when logging was requested."""
        return list(self._log)

    @property
    def theta_digest(self) -> str:
        """Short stable digest of the hidden vector, for run records."""
        return hashlib.sha256(self._theta.tobytes()).hexdigest()[:12]

    def _record(self, x: np.ndarray, n: int):
        self._pulls += n
        if self._log_cap is not None and len(self._log) < self._log_cap:
            self._log.append(np.array(x))

    def pull(self, x) -> float:
        """One noisy reward <x, theta> + N(0,1)."""
        x = np.asarray(x, dtype=float)
        if x.shape != self._theta.shape:
            raise DimensionMismatchError(f"arm shape {x.shape} vs theta {self._theta.shape}")
        y = float(x @ self._theta) + float(self._rng.standard_normal())
        self._record(x, 1)
        return y

    def pull_many(self, x, n: int) -> np.ndarray:
        """n independent rewards for the same arm (counts as n pulls)."""
        x = np.asarray(x, dtype=float)
        if x.shape != self._theta.shape:
            raise DimensionMismatchError(f"arm shape {x.shape} vs theta {self._theta.shape}")
        y = float(x @ self._theta) + self._rng.standard_normal(int(n))
        self._record(x, int(n))
        return y

    def pull_batch(self, X) -> np.ndarray:
        """One reward per row of X (counts as len(X) pulls)."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self._theta.shape[0]:
            raise DimensionMismatchError(f"batch shape {X.shape} vs theta {self._theta.shape}")
        y = X @ self._theta + self._rng.standard_normal(X.shape[0])
        self._pulls += X.shape[0]
        if self._log_cap is not None:
            for row in X[: max(0, self._log_cap - len(self._log))]:
                self._log.append(row.copy())
        return y


class BlockView:
    """Environment adapter that pins pulls to one block of a union-of-balls
    set, so block-local algorithms see a plain d-dimensional ball problem.

    The underlying environment observes full ambient arms (zeros outside the
    block) and never reveals the block structure to the algorithm.
    """

    def __init__(self, env: Environment, arm_set: UnionOfBalls, block: int):
        self._env = env
        self._set = arm_set
        self._block = int(block)
        self._slice = arm_set.block_slice(block)

    @property
    def pulls(self) -> int:
        return self._env.pulls

    def _lift(self, x) -> np.ndarray:
        return self._set.embed(np.asarray(x, dtype=float), self._block)

    def pull(self, x) -> float:
        return self._env.pull(self._lift(x))

    def pull_many(self, x, n: int) -> np.ndarray:
        return self._env.pull_many(self._lift(x), n)

    def pull_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        lifted = np.zeros((X.shape[0], self._set.dim))
        lifted[:, self._slice] = X
        return self._env.pull_batch(lifted)


# -- referee facade ----------------------------------------------------------
# Only the experiment harness may call these; they read the hidden theta.

def hidden_theta(env: Environment) -> np.ndarray:
    return env._theta


def best_arm(env: Environment, arm_set: ArmSet) -> np.ndarray:
    return arm_set.linear_argmax(env._theta)


def optimal_value(env: Environment, arm_set: ArmSet) -> float:
    """max_x <x, theta>, exact via the linear maximization oracle."""
    return float(best_arm(env, arm_set) @ env._theta)


def simple_regret(env: Environment, arm_set: ArmSet, x) -> float:
    x = np.asarray(x, dtype=float)
    return optimal_value(env, arm_set) - float(x @ env._theta)


def is_eps_best(env: Environment, arm_set: ArmSet, x, eps: float) -> bool:
    """True iff the simple regret of x is at most eps (closed inequality)."""
    return simple_regret(env, arm_set, x) <= eps
