"""Action sets and their geometric oracles.

Each set kind exposes the same small interface: ambient dimension, a linear
maximization oracle (closed form per kind), membership testing, enumeration
for the discrete kinds, and vectorized variants used by the Monte Carlo
width estimators.

Arms are plain 1-D float numpy arrays.
"""
from __future__ import annotations

import csv
import itertools
import math

import numpy as np

from .errors import (
    CapExceededError,
    DimensionMismatchError,
    MixedSupportError,
    NotEnumerableError,
)

DEFAULT_ENUM_CAP = 10**6
DEFAULT_TOL = 1e-9


def _check_dim(v: np.ndarray, dim: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != dim:
        raise DimensionMismatchError(f"expected a vector of length {dim}, got shape {v.shape}")
    return v


def _lexsorted(arms: np.ndarray) -> np.ndarray:
    """Rows sorted lexicographically by coordinate 0, then 1, ..."""
    # np.lexsort treats the last key as primary, so feed columns reversed.
    order = np.lexsort(tuple(arms[:, j] for j in range(arms.shape[1] - 1, -1, -1)))
    return arms[order]


class ArmSet:
    """Base class for all action sets.

    Immutable after construction; instances may be shared freely across
    concurrent workers.
    """

    kind: str = "abstract"

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("ambient dimension must be positive")
        self._dim = int(dim)

    @property
    def dim(self) -> int:
        return self._dim

    def dimension(self) -> int:
        """Ambient dimension (kd for a union of balls, sum d_j for multi-task)."""
        return self._dim

    # -- oracles -----------------------------------------------------------
    def linear_argmax(self, v: np.ndarray) -> np.ndarray:
        """An arm maximizing <x, v> over the set; ties break deterministically."""
        raise NotImplementedError

    def max_inner(self, V: np.ndarray) -> np.ndarray:
        """max_x <x, v> for every row v of V, vectorized."""
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return np.array([float(np.dot(self.linear_argmax(v), v)) for v in V])

    def argmax_inner_many(self, V: np.ndarray) -> np.ndarray:
        """Stacked linear_argmax for every row of V."""
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return np.stack([self.linear_argmax(v) for v in V])

    def contains(self, x: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
        raise NotImplementedError

    def count(self) -> int | None:
        """Number of arms, or None for continuous sets."""
        return None

    def enumerate_arms(self, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
        """All arms, duplicate-free, in lexicographic coordinate order.

        Raises NotEnumerableError for continuous kinds and CapExceededError
        (carrying the exact count) when the listing would exceed `cap`.
        """
        raise NotEnumerableError(f"{self.kind} sets cannot be enumerated")

    def spec(self) -> str:
        """The set-specification string this set round-trips through."""
        raise NotImplementedError

    def __repr__(self) -> str:  # pragma: no cover
        return f"{type(self).__name__}({self.spec()!r})"

    def _guard_cap(self, cap: int) -> int:
        n = self.count()
        assert n is not None
        if n > cap:
            raise CapExceededError(n, cap)
        return n


class FiniteSet(ArmSet):
    kind = "finite"

    def __init__(self, arms, path: str | None = None):
        arms = np.asarray(arms, dtype=float)
        if arms.ndim != 2 or arms.shape[0] < 1:
            raise ValueError("a finite set needs at least one arm of common dimension")
        if not np.all(np.isfinite(arms)):
            raise ValueError("arms must have finite entries")
        super().__init__(arms.shape[1])
        self._arms = arms.copy()
        self._arms.setflags(write=False)
        self._path = path

    @property
    def arms(self) -> np.ndarray:
        return self._arms

    def linear_argmax(self, v):
        v = _check_dim(v, self._dim)
        return self._arms[int(np.argmax(self._arms @ v))].copy()

    def max_inner(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return (V @ self._arms.T).max(axis=1)

    def argmax_inner_many(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return self._arms[np.argmax(V @ self._arms.T, axis=1)]

    def contains(self, x, tol=DEFAULT_TOL):
        x = _check_dim(x, self._dim)
        return bool(np.any(np.max(np.abs(self._arms - x), axis=1) <= tol))

    def count(self):
        return self._arms.shape[0]

    def enumerate_arms(self, cap=DEFAULT_ENUM_CAP):
        self._guard_cap(cap)
        return _lexsorted(np.unique(self._arms, axis=0))

    def spec(self):
        return f"finite:{self._path or '<memory>'}"


class Ball(ArmSet):
    """Unit l2 ball in R^d."""

    kind = "ball"

    def linear_argmax(self, v):
        v = _check_dim(v, self._dim)
        n = float(np.linalg.norm(v))
        if n == 0.0:
            return np.zeros(self._dim)  # the zero vector is a valid arm
        return v / n

    def max_inner(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return np.linalg.norm(V, axis=1)

    def argmax_inner_many(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        n = np.linalg.norm(V, axis=1)
        safe = np.where(n > 0, n, 1.0)
        return V / safe[:, None]

    def contains(self, x, tol=DEFAULT_TOL):
        x = _check_dim(x, self._dim)
        return bool(np.linalg.norm(x) <= 1.0 + tol)

    def spec(self):
        return f"ball:{self._dim}"


class HypercubePM(ArmSet):
    """{-1,+1}^d.  Argmax sign convention: coordinates with v_i = 0 get +1."""

    kind = "cube_pm"

    def linear_argmax(self, v):
        v = _check_dim(v, self._dim)
        return np.where(v >= 0.0, 1.0, -1.0)

    def max_inner(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return np.abs(V).sum(axis=1)

    def argmax_inner_many(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return np.where(V >= 0.0, 1.0, -1.0)

    def contains(self, x, tol=DEFAULT_TOL):
        x = _check_dim(x, self._dim)
        return bool(np.all(np.abs(np.abs(x) - 1.0) <= tol))

    def count(self):
        return 2**self._dim

    def enumerate_arms(self, cap=DEFAULT_ENUM_CAP):
        self._guard_cap(cap)
        return np.array(list(itertools.product((-1.0, 1.0), repeat=self._dim)))

    def spec(self):
        return f"cube_pm:{self._dim}"


class Hypercube01(ArmSet):
    """{0,1}^d.  Argmax includes exactly the strictly positive coordinates."""

    kind = "cube_01"

    def linear_argmax(self, v):
        v = _check_dim(v, self._dim)
        return (v > 0.0).astype(float)

    def max_inner(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return np.clip(V, 0.0, None).sum(axis=1)

    def argmax_inner_many(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return (V > 0.0).astype(float)

    def contains(self, x, tol=DEFAULT_TOL):
        x = _check_dim(x, self._dim)
        return bool(np.all(np.minimum(np.abs(x), np.abs(x - 1.0)) <= tol))

    def count(self):
        return 2**self._dim

    def enumerate_arms(self, cap=DEFAULT_ENUM_CAP):
        self._guard_cap(cap)
        return np.array(list(itertools.product((0.0, 1.0), repeat=self._dim)))

    def spec(self):
        return f"cube_01:{self._dim}"


class MSet(ArmSet):
    """Binary vectors with exactly m ones.  Argmax picks the top-m coordinates,
    ties to the lowest index."""

    kind = "mset"

    def __init__(self, d: int, m: int):
        if not (1 <= m <= d):
            raise ValueError("need 1 <= m <= d")
        super().__init__(d)
        self.m = int(m)

    def linear_argmax(self, v):
        v = _check_dim(v, self._dim)
        top = np.argsort(-v, kind="stable")[: self.m]
        x = np.zeros(self._dim)
        x[top] = 1.0
        return x

    def max_inner(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return np.sort(V, axis=1)[:, self._dim - self.m :].sum(axis=1)

    def argmax_inner_many(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        idx = np.argsort(-V, axis=1, kind="stable")[:, : self.m]
        out = np.zeros_like(V)
        np.put_along_axis(out, idx, 1.0, axis=1)
        return out

    def contains(self, x, tol=DEFAULT_TOL):
        x = _check_dim(x, self._dim)
        binary = np.all(np.minimum(np.abs(x), np.abs(x - 1.0)) <= tol)
        return bool(binary and int(np.sum(np.abs(x) > tol)) == self.m)

    def count(self):
        return math.comb(self._dim, self.m)

    def enumerate_arms(self, cap=DEFAULT_ENUM_CAP):
        self._guard_cap(cap)
        arms = np.zeros((self.count(), self._dim))
        for i, support in enumerate(itertools.combinations(range(self._dim), self.m)):
            arms[i, list(support)] = 1.0
        return _lexsorted(arms)

    def spec(self):
        return f"mset:{self._dim}:{self.m}"


class MultiTask(ArmSet):
    """One arm from every problem: binary vectors with exactly one 1 per block.

    Block j holds coordinates block_starts[j] .. block_starts[j]+d_vec[j]-1.
    """

    kind = "multitask"

    def __init__(self, d_vec):
        d_vec = tuple(int(d) for d in d_vec)
        if len(d_vec) < 1 or any(d < 2 for d in d_vec):
            raise ValueError("every block needs at least 2 arms")
        super().__init__(sum(d_vec))
        self.d_vec = d_vec
        self.block_starts = tuple(int(s) for s in np.cumsum((0,) + d_vec[:-1]))

    def blocks(self):
        for start, d in zip(self.block_starts, self.d_vec):
            yield start, start + d

    def linear_argmax(self, v):
        v = _check_dim(v, self._dim)
        x = np.zeros(self._dim)
        for lo, hi in self.blocks():
            x[lo + int(np.argmax(v[lo:hi]))] = 1.0
        return x

    def max_inner(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        total = np.zeros(V.shape[0])
        for lo, hi in self.blocks():
            total += V[:, lo:hi].max(axis=1)
        return total

    def argmax_inner_many(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        out = np.zeros_like(V)
        for lo, hi in self.blocks():
            idx = lo + np.argmax(V[:, lo:hi], axis=1)
            out[np.arange(V.shape[0]), idx] = 1.0
        return out

    def contains(self, x, tol=DEFAULT_TOL):
        x = _check_dim(x, self._dim)
        if not np.all(np.minimum(np.abs(x), np.abs(x - 1.0)) <= tol):
            return False
        return all(int(np.sum(np.abs(x[lo:hi]) > tol)) == 1 for lo, hi in self.blocks())

    def count(self):
        return math.prod(self.d_vec)

    def enumerate_arms(self, cap=DEFAULT_ENUM_CAP):
        self._guard_cap(cap)
        arms = np.zeros((self.count(), self._dim))
        choices = itertools.product(*(range(d) for d in self.d_vec))
        for i, pos in enumerate(choices):
            for start, p in zip(self.block_starts, pos):
                arms[i, start + p] = 1.0
        return _lexsorted(arms)

    def spec(self):
        return "multitask:" + ",".join(str(d) for d in self.d_vec)


class UnionOfBalls(ArmSet):
    """Union of k unit l2 balls, each living in its own d-dimensional
    coordinate block of R^{kd}."""

    kind = "unionballs"

    def __init__(self, k: int, d: int):
        if k < 1 or d < 1:
            raise ValueError("need k >= 1 and d >= 1")
        super().__init__(k * d)
        self.k = int(k)
        self.block_dim = int(d)

    def block_slice(self, block: int) -> slice:
        """Coordinate slice of 1-based block index."""
        if not (1 <= block <= self.k):
            raise ValueError(f"block must be in 1..{self.k}")
        lo = (block - 1) * self.block_dim
        return slice(lo, lo + self.block_dim)

    def embed(self, z: np.ndarray, block: int) -> np.ndarray:
        """Lift a block-local vector into ambient coordinates."""
        z = _check_dim(z, self.block_dim)
        x = np.zeros(self._dim)
        x[self.block_slice(block)] = z
        return x

    def linear_argmax(self, v):
        v = _check_dim(v, self._dim)
        blocks = v.reshape(self.k, self.block_dim)
        norms = np.linalg.norm(blocks, axis=1)
        best = int(np.argmax(norms))  # ties to the lowest index
        if norms[best] == 0.0:
            return np.zeros(self._dim)
        x = np.zeros(self._dim)
        x[best * self.block_dim : (best + 1) * self.block_dim] = blocks[best] / norms[best]
        return x

    def max_inner(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        blocks = V.reshape(V.shape[0], self.k, self.block_dim)
        return np.linalg.norm(blocks, axis=2).max(axis=1)

    def argmax_inner_many(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        n = V.shape[0]
        blocks = V.reshape(n, self.k, self.block_dim)
        norms = np.linalg.norm(blocks, axis=2)
        best = np.argmax(norms, axis=1)
        out = np.zeros_like(V)
        rows = np.arange(n)
        chosen = blocks[rows, best]
        nb = norms[rows, best]
        safe = np.where(nb > 0, nb, 1.0)
        for i in range(n):
            out[i, best[i] * self.block_dim : (best[i] + 1) * self.block_dim] = chosen[i] / safe[i]
        return out

    def contains(self, x, tol=DEFAULT_TOL):
        x = _check_dim(x, self._dim)
        if np.linalg.norm(x) > 1.0 + tol:
            return False
        hot = {i // self.block_dim for i in np.flatnonzero(np.abs(x) > tol)}
        return len(hot) <= 1

    def block_of(self, x, tol: float = DEFAULT_TOL) -> int:
        """1-based index of the block carrying supp(x); the zero arm maps to 1.

        Raises MixedSupportError when the support straddles blocks.
        """
        x = _check_dim(x, self._dim)
        hot = sorted({i // self.block_dim for i in np.flatnonzero(np.abs(x) > tol)})
        if len(hot) == 0:
            return 1
        if len(hot) > 1:
            raise MixedSupportError(f"support touches blocks {[h + 1 for h in hot]}")
        return hot[0] + 1

    def spec(self):
        return f"unionballs:{self.k}:{self.block_dim}"


def block_of(arm_set: UnionOfBalls, x: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    if not isinstance(arm_set, UnionOfBalls):
        raise TypeError("block_of is defined for union-of-balls sets only")
    return arm_set.block_of(x, tol)


# -- multi-task geometry ----------------------------------------------------

def helmert_matrix(n: int) -> np.ndarray:
    """The n x (n-1) Helmert matrix: orthonormal columns, all orthogonal to 1_n."""
    if n < 2:
        raise ValueError("need n >= 2")
    H = np.zeros((n, n - 1))
    for k in range(1, n):
        c = 1.0 / math.sqrt(k * (k + 1))
        H[:k, k - 1] = c
        H[k, k - 1] = -k * c
    return H


def multitask_basis(d_vec) -> np.ndarray:
    """Orthonormal basis U (dim x r, r = d - m + 1) of the span of a
    multi-task action set.

    The first column is the normalized vector that is 1/d_j on block j; the
    remaining columns embed per-block Helmert matrices, so U^T U = I_r and
    U U^T x = x for every multi-task arm x.
    """
    ms = MultiTask(d_vec)
    d = ms.dim
    m = len(ms.d_vec)
    r = d - m + 1
    mu = np.zeros(d)
    for (lo, hi), dj in zip(ms.blocks(), ms.d_vec):
        mu[lo:hi] = 1.0 / dj
    U = np.zeros((d, r))
    U[:, 0] = mu / np.linalg.norm(mu)
    col = 1
    for (lo, hi), dj in zip(ms.blocks(), ms.d_vec):
        U[lo:hi, col : col + dj - 1] = helmert_matrix(dj)
        col += dj - 1
    return U


# -- set specification grammar ----------------------------------------------

def load_finite_csv(path: str) -> FiniteSet:
    """Finite set from a CSV file with one arm per row."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if row:
                rows.append([float(c) for c in row])
    return FiniteSet(np.array(rows), path=path)


def parse_set_spec(spec: str) -> ArmSet:
    """Parse `finite:<path>`, `ball:<d>`, `cube_pm:<d>`, `cube_01:<d>`,
    `mset:<d>:<m>`, `multitask:<d1,d2,...>`, or `unionballs:<k>:<d>`."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "finite":
            return load_finite_csv(rest)
        if kind == "ball":
            return Ball(int(rest))
        if kind == "cube_pm":
            return HypercubePM(int(rest))
        if kind == "cube_01":
            return Hypercube01(int(rest))
        if kind == "mset":
            d, m = rest.split(":")
            return MSet(int(d), int(m))
        if kind == "multitask":
            return MultiTask(int(d) for d in rest.split(","))
        if kind == "unionballs":
            k, d = rest.split(":")
            return UnionOfBalls(int(k), int(d))
    except (ValueError, OSError) as exc:
        raise ValueError(f"bad set spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown set kind {kind!r} in spec {spec!r}")
