import math

import numpy as np
import pytest

from linexplore.arm_sets import Hypercube01, HypercubePM, MSet, MultiTask, UnionOfBalls
from linexplore.errors import RegimeViolationError
from linexplore.hard_instances import (
    hard_family,
    hypercube_hard,
    mset_hard,
    multitask_hard,
    unionball_hard,
)


class TestMultitaskHard:
    def test_equal_blocks_split_eps(self):
        inst = multitask_hard((2, 2), 0.1, np.random.default_rng(0))
        spikes = inst.theta[inst.theta != 0]
        assert np.allclose(spikes, 0.5)  # 10 * eps_j with eps_j = 0.05
        assert inst.optimal_value == pytest.approx(1.0)

    def test_spikes_sum_to_eps(self):
        rng = np.random.default_rng(1)
        for d_vec in [(2, 3), (4, 4, 4), (2, 5, 9, 3)]:
            inst = multitask_hard(d_vec, 0.2, rng)
            assert inst.theta.sum() == pytest.approx(10 * 0.2)  # sum 10 eps_j = 10 eps

    def test_zeroed_block_alternative(self):
        rng = np.random.default_rng(2)
        inst = multitask_hard((3, 3), 0.2, rng, zero_block=2)
        ms = MultiTask((3, 3))
        lo, hi = list(ms.blocks())[1]
        assert np.all(inst.theta[lo:hi] == 0.0)
        assert np.any(inst.theta[:lo] != 0.0)

    def test_lmo_matches_closed_form(self):
        rng = np.random.default_rng(3)
        ms = MultiTask((2, 4, 3))
        for _ in range(20):
            inst = multitask_hard((2, 4, 3), 0.15, rng)
            best = ms.linear_argmax(inst.theta)
            assert abs(best @ inst.theta - inst.optimal_value) <= 1e-12
            assert ms.contains(inst.planted_arm)

    def test_deterministic_given_seed(self):
        a = multitask_hard((4, 4), 0.1, np.random.default_rng(9))
        b = multitask_hard((4, 4), 0.1, np.random.default_rng(9))
        assert np.array_equal(a.theta, b.theta)


class TestMSetHard:
    def test_regime_gate(self):
        with pytest.raises(RegimeViolationError):
            mset_hard(4, 2, 0.1, np.random.default_rng(0))
        with pytest.raises(RegimeViolationError):
            mset_hard(40, 2, 0.1, np.random.default_rng(0))
        mset_hard(41, 2, 0.1, np.random.default_rng(0))  # d = 41 is the edge

    def test_delta_and_optimum(self):
        inst = mset_hard(64, 3, 0.2, np.random.default_rng(1))
        assert np.allclose(inst.theta[inst.theta != 0], 2.0 / 3.0)
        assert inst.optimal_value == pytest.approx(2.0)

    def test_off_support_value(self):
        rng = np.random.default_rng(2)
        inst = mset_hard(64, 3, 0.2, rng)
        delta = 10 * 0.2 / 3
        mset = MSet(64, 3)
        support = set(np.flatnonzero(inst.planted_arm))
        for _ in range(100):
            x = np.zeros(64)
            idx = rng.choice(64, 3, replace=False)
            x[idx] = 1.0
            if set(idx) != support:
                assert x @ inst.theta <= 2 * delta + 1e-12
        best = mset.linear_argmax(inst.theta)
        assert abs(best @ inst.theta - inst.optimal_value) <= 1e-12


class TestHypercubeHard:
    def test_zeroone_magnitudes(self):
        inst = hypercube_hard(2, 0.1, "zeroone", np.random.default_rng(4))
        assert np.allclose(np.abs(inst.theta), 0.5)
        signs = set(np.sign(inst.theta))
        assert signs <= {-1.0, 1.0}

    def test_zeroone_lmo_optimum(self):
        rng = np.random.default_rng(5)
        cube = Hypercube01(6)
        for _ in range(20):
            inst = hypercube_hard(6, 0.3, "zeroone", rng)
            best = cube.linear_argmax(inst.theta)
            assert abs(best @ inst.theta - inst.optimal_value) <= 1e-12

    def test_pm_magnitudes_and_optimum(self):
        rng = np.random.default_rng(6)
        cube = HypercubePM(4)
        for _ in range(20):
            inst = hypercube_hard(4, 0.2, "pm", rng)
            assert np.allclose(np.abs(inst.theta), 5 * 0.2 / 4)
            best = cube.linear_argmax(inst.theta)
            assert abs(best @ inst.theta - 5 * 0.2) <= 1e-12
            assert inst.optimal_value == pytest.approx(5 * 0.2)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            hypercube_hard(3, 0.1, "signed", np.random.default_rng(0))


class TestUnionBallHard:
    def test_norm_matches_formula(self):
        inst = unionball_hard(4, 3, per_block_budget=100, delta=0.1, rng=np.random.default_rng(7))
        expect = 0.5 * math.sqrt(0.1) * 3 / math.sqrt(100)
        assert np.linalg.norm(inst.theta) == pytest.approx(expect, abs=1e-12)
        assert inst.optimal_value == pytest.approx(expect, abs=1e-12)

    def test_support_in_one_block(self):
        ub = UnionOfBalls(4, 3)
        rng = np.random.default_rng(8)
        for _ in range(20):
            inst = unionball_hard(4, 3, 50, 0.1, rng)
            block = ub.block_of(inst.theta / max(np.linalg.norm(inst.theta), 1e-12))
            assert 1 <= block <= 4
            best = ub.linear_argmax(inst.theta)
            assert abs(best @ inst.theta - inst.optimal_value) <= 1e-12

    def test_uniform_allocation_fails_at_family_scale(self):
        # A uniform non-adaptive allocation of T = k * per_block_budget pulls
        # misses an eps-best arm often when eps = 0.6 * ||theta||.
        from linexplore.bandit_env import Environment, is_eps_best
        from linexplore.harness import uniform_baseline
        from linexplore.seeding import stable_mix

        k, d, per_block = 4, 4, 100
        ub = UnionOfBalls(k, d)
        fails = 0
        trials = 500
        for trial in range(trials):
            rng = np.random.default_rng(stable_mix(9000, 2 * trial))
            inst = unionball_hard(k, d, per_block, 0.1, rng)
            eps = 0.6 * inst.optimal_value
            env = Environment(inst.theta, seed=stable_mix(9000, 2 * trial + 1))
            res = uniform_baseline(ub, env, budget=k * per_block)
            fails += int(not is_eps_best(env, ub, res.chosen, eps))
        assert fails / trials >= 0.2


class TestHardFamily:
    def test_family_specs(self):
        for spec, kind in [("multitask:2,2", "MultiTaskSpiked"),
                           ("mset:64:3", "MSetSpiked"),
                           ("cube_pm:4", "HypercubePMSigned"),
                           ("cube_01:4", "Hypercube01Signed"),
                           ("unionballs:3:2:100", "UnionBlockSpiked")]:
            family = hard_family(spec, eps=0.2)
            assert family.kind == kind
            inst = family.sample(np.random.default_rng(0))
            assert inst.theta.shape[0] == family.arm_set.dim

    def test_family_regime_gate_fails_fast(self):
        with pytest.raises(RegimeViolationError):
            hard_family("mset:10:2", eps=0.2)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            hard_family("simplex:3", eps=0.1)
