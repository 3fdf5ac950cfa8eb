"""Seed derivation and RNG plumbing.

Every Monte Carlo loop in the library derives its stream from an explicit
64-bit seed so that runs are reproducible across processes and machines.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# SplitMix64 constants (Steele, Lea & Flood), written out so that any other
# implementation can derive bit-identical substream seeds.
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def stable_mix(seed: int, index: int) -> int:
    """Derive the 64-bit substream seed for trial `index` from a master seed.

    This is the SplitMix64 output function applied to
    ``seed + (index + 1) * gamma`` with gamma = 0x9E3779B97F4A7C15 and the
    two multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB.  All
    arithmetic is mod 2**64; the index shift keeps (0, 0) away from the
    mixer's zero fixed point.
    """
    z = (seed + (index + 1) * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    """Accept a Generator, an integer seed, or None (fresh entropy)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def random_unit(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random direction on the unit sphere in R^d."""
    while True:
        v = rng.standard_normal(d)
        n = float(np.linalg.norm(v))
        if n > 1e-12:
            return v / n
