import math

import numpy as np
import pytest

from linexplore.arm_sets import Ball, FiniteSet, UnionOfBalls
from linexplore.bandit_env import Environment, is_eps_best
from linexplore.designs import width_mc
from linexplore.errors import BudgetTooSmallError, TooFewArmsError
from linexplore.pure_exploration import (
    BAYES_FLOOR_CONST,
    bayes_regret_floor,
    fixed_design_bai,
    fixed_design_budget,
    make_partition,
    median_elimination,
    median_elimination_rounds,
    partitioned_adaptive_bai,
    partitioned_width,
    plan_fixed_design,
    sample_gaussian_prior,
    union_ball_adaptive_bai,
)
from linexplore.seeding import stable_mix

CANON2_WIDTH = math.sqrt(2.0 / math.pi)
BALL4_CHI_MEAN = math.sqrt(2.0) * math.gamma(2.5) / math.gamma(2.0)


def canonical(d):
    return FiniteSet(np.eye(d))


class TestMakePartition:
    def test_even_split(self):
        part = make_partition(8, 4, seed=0)
        assert sorted(len(r) for r in part.regions) == [2, 2, 2, 2]

    def test_remainder_goes_last(self):
        part = make_partition(9, 4, seed=0)
        assert [len(r) for r in part.regions] == [2, 2, 2, 3]

    def test_deterministic(self):
        a = make_partition(10, 3, seed=5)
        b = make_partition(10, 3, seed=5)
        assert all(np.array_equal(x, y) for x, y in zip(a.regions, b.regions))

    def test_too_few_arms(self):
        with pytest.raises(TooFewArmsError):
            make_partition(3, 4, seed=0)

    def test_covers_everything(self):
        part = make_partition(11, 4, seed=2)
        assert sorted(int(i) for r in part.regions for i in r) == list(range(11))


class TestMedianElimination:
    def test_single_arm_zero_pulls(self):
        env = Environment(np.array([1.0]), seed=0)
        assert median_elimination([np.array([1.0])], 0.1, 0.1, env) == 0
        assert env.pulls == 0

    def test_two_separated_arms(self):
        wins = 0
        for trial in range(200):
            env = Environment(np.array([0.0, 1.0]), seed=stable_mix(1, trial))
            idx = median_elimination([np.array([1.0, 0.0]), np.array([0.0, 1.0])],
                                     0.1, 0.1, env)
            wins += int(idx == 1)
        assert wins / 200 >= 0.9

    def test_round_count_formula(self):
        assert median_elimination_rounds(8) == 3
        assert median_elimination_rounds(9) == 4
        assert median_elimination_rounds(1) == 0

    def test_equal_means_schedule_is_exact(self):
        # 8 identical arms: three halving rounds with the documented pull
        # counts; any survivor is eps-best.
        d = 8
        arms = [np.eye(d)[i] for i in range(d)]
        env = Environment(np.zeros(d), seed=3)
        idx = median_elimination(arms, 0.2, 0.1, env)
        assert 0 <= idx < 8
        eps_l, delta_l, expect, n = 0.05, 0.05, 0, 8
        for _ in range(3):
            expect += n * math.ceil(16.0 / eps_l**2 * math.log(3.0 / delta_l))
            n = math.ceil(n / 2)
            eps_l *= 0.75
            delta_l /= 2.0
        assert env.pulls == expect


class TestFixedDesignBai:
    def test_budget_formula(self):
        arm_set = canonical(2)
        plan = plan_fixed_design(arm_set, seed=1)
        env = Environment(np.array([0.5, 0.0]), seed=2)
        res = fixed_design_bai(arm_set, 0.3, 0.1, env, plan=plan)
        expect = fixed_design_budget(2, 0.3, 0.1, plan.width.ucb)
        assert res.samples == expect == int(res.diagnostics["budget"])
        assert expect == max(math.ceil(360.0 * (2 * math.log(10.0) + plan.width.ucb**2) / 0.09), 360)

    def test_normal_equations_residual(self):
        arm_set = canonical(3)
        plan = plan_fixed_design(arm_set, seed=3)
        env = Environment(np.array([0.2, -0.1, 0.4]), seed=4)
        res = fixed_design_bai(arm_set, 0.5, 0.1, env, plan=plan, budget_override=1000)
        assert res.diagnostics["lsq_residual_rel"] <= 1e-8
        assert res.theta_hat is not None

    def test_chosen_is_member(self):
        arm_set = Ball(3)
        plan = plan_fixed_design(arm_set, seed=5)
        env = Environment(np.array([0.5, 0.1, -0.2]), seed=6)
        res = fixed_design_bai(arm_set, 0.4, 0.1, env, plan=plan)
        assert arm_set.contains(res.chosen, tol=1e-9)

    def test_canonical_success_rate(self):
        arm_set = canonical(2)
        plan = plan_fixed_design(arm_set, seed=7)
        wins = 0
        for trial in range(50):
            env = Environment(np.array([0.5, 0.0]), seed=stable_mix(8, trial))
            res = fixed_design_bai(arm_set, 0.3, 0.1, env, plan=plan)
            wins += int(is_eps_best(env, arm_set, res.chosen, 0.3))
        assert wins / 50 >= 0.9

    def test_min_budget_enforced(self):
        arm_set = canonical(2)
        plan = plan_fixed_design(arm_set, seed=9)
        env = Environment(np.zeros(2), seed=10)
        with pytest.raises(BudgetTooSmallError):
            fixed_design_bai(arm_set, 0.3, 0.1, env, plan=plan, budget_override=100)
        res = fixed_design_bai(arm_set, 0.3, 0.1, env, plan=plan, budget_override=100,
                               enforce_min_budget=False)
        assert res.samples == 100


class TestPartitionedAdaptive:
    def test_degenerate_partition_uses_all_arms(self):
        # |X| = d: every region is a singleton, so phase-1 candidates are
        # the arms themselves and the run reduces to fixed design plus
        # Median Elimination over the full set.
        arm_set = canonical(3)
        plan = plan_fixed_design(arm_set, seed=11)
        env = Environment(np.array([0.6, 0.0, 0.0]), seed=12)
        res = partitioned_adaptive_bai(arm_set, 0.4, 0.1, env, seed=13, plan=plan)
        assert arm_set.contains(res.chosen, tol=1e-9)
        assert res.samples == env.pulls
        assert res.diagnostics["phase2_samples"] > 0

    def test_partitioned_width_below_full_width(self):
        rng = np.random.default_rng(0)
        arms = rng.standard_normal((64, 4))
        arms /= np.linalg.norm(arms, axis=1, keepdims=True)
        arm_set = FiniteSet(arms)
        plan = plan_fixed_design(arm_set, seed=14)
        part = make_partition(64, 4, seed=15)
        region, full = partitioned_width(arm_set, arms, part, plan.lam1.moment(),
                                         draws=4096, seed=16)
        assert region.mean <= full.mean + 3.0 * (region.stderr + full.stderr)

    def test_spiked_success_rate(self):
        rng = np.random.default_rng(1)
        arms = rng.standard_normal((64, 4))
        arms /= np.linalg.norm(arms, axis=1, keepdims=True)
        arm_set = FiniteSet(arms)
        plan = plan_fixed_design(arm_set, seed=17)
        theta = 0.9 * arms[5]
        wins = 0
        for trial in range(200):
            env = Environment(theta, seed=stable_mix(18, trial))
            res = partitioned_adaptive_bai(arm_set, 0.3, 0.1, env,
                                           seed=stable_mix(19, trial), plan=plan)
            wins += int(is_eps_best(env, arm_set, res.chosen, 0.3))
        assert wins / 200 >= 0.9

    def test_too_few_arms(self):
        arm_set = FiniteSet(np.eye(4)[:2])
        env = Environment(np.zeros(4), seed=0)
        with pytest.raises(TooFewArmsError):
            partitioned_adaptive_bai(arm_set, 0.3, 0.1, env, seed=0)


class TestUnionBallAdaptive:
    def test_planted_block_found(self):
        ub = UnionOfBalls(4, 4)
        block_plan = plan_fixed_design(Ball(4), seed=20)
        theta = ub.embed(np.array([1.0, 0.0, 0.0, 0.0]), 3)
        wins = blocks = 0
        for trial in range(200):
            env = Environment(theta, seed=stable_mix(21, trial))
            res = union_ball_adaptive_bai(ub, 0.4, 0.1, env, rng=stable_mix(22, trial),
                                          block_plan=block_plan)
            wins += int(is_eps_best(env, ub, res.chosen, 0.4))
            blocks += int(res.diagnostics["chosen_block"] == 3)
        assert wins / 200 >= 0.9
        assert blocks / 200 >= 0.9

    def test_zero_theta_always_succeeds(self):
        ub = UnionOfBalls(3, 2)
        block_plan = plan_fixed_design(Ball(2), seed=23)
        env = Environment(np.zeros(6), seed=24)
        res = union_ball_adaptive_bai(ub, 0.5, 0.1, env, rng=25, block_plan=block_plan)
        assert is_eps_best(env, ub, res.chosen, 0.5)
        assert res.samples == env.pulls
        assert res.diagnostics["phase1_samples"] + res.diagnostics["phase2_samples"] == res.samples

    def test_budget_scale_shrinks_samples(self):
        ub = UnionOfBalls(3, 3)
        block_plan = plan_fixed_design(Ball(3), seed=26)
        theta = ub.embed(np.array([1.0, 0.0, 0.0]), 1)
        env1 = Environment(theta, seed=27)
        full = union_ball_adaptive_bai(ub, 0.4, 0.1, env1, rng=28, block_plan=block_plan)
        env2 = Environment(theta, seed=27)
        small = union_ball_adaptive_bai(ub, 0.4, 0.1, env2, rng=28, block_plan=block_plan,
                                        budget_scale=0.25)
        assert small.samples < full.samples


class TestBayesFloor:
    def test_constant(self):
        tau = math.sqrt(2.0) - 1.0
        assert BAYES_FLOOR_CONST == pytest.approx(tau * (1 - tau) / (1 + tau * tau), abs=1e-15)
        assert BAYES_FLOOR_CONST == pytest.approx(0.207107, abs=1e-6)

    def test_canonical_value(self):
        floor = bayes_regret_floor(canonical(2), np.eye(2) / 2.0, draws=100_000, seed=29)
        assert floor == pytest.approx(BAYES_FLOOR_CONST * CANON2_WIDTH, rel=0.02)

    def test_ball_value(self):
        floor = bayes_regret_floor(Ball(4), np.eye(4), draws=100_000, seed=30)
        assert floor == pytest.approx(BAYES_FLOOR_CONST * BALL4_CHI_MEAN, rel=0.02)


class TestGaussianPrior:
    def test_identity_covariance(self):
        rng = np.random.default_rng(0)
        draws = np.stack([sample_gaussian_prior(np.eye(2), 1.0, rng) for _ in range(100_000)])
        cov = draws.T @ draws / draws.shape[0]
        assert np.abs(cov - np.eye(2)).max() <= 0.02

    def test_diagonal_scaling(self):
        rng = np.random.default_rng(1)
        A = np.diag([4.0, 1.0])
        draws = np.stack([sample_gaussian_prior(A, 1.0, rng) for _ in range(100_000)])
        cov = draws.T @ draws / draws.shape[0]
        assert np.abs(cov - np.diag([0.25, 1.0])).max() <= 0.02

    def test_tau_zero(self):
        rng = np.random.default_rng(2)
        assert np.array_equal(sample_gaussian_prior(np.eye(3), 0.0, rng), np.zeros(3))

    def test_empirical_bayes_floor_respected(self):
        # Any non-adaptive rule's average simple regret under the prior is
        # at least the floor; checked for the fixed-design pipeline itself.
        T, d, trials = 1000, 2, 400
        arm_set = canonical(d)
        A = np.eye(d) * (T / d)
        tau = math.sqrt(2.0) - 1.0
        plan = plan_fixed_design(arm_set, seed=31)
        rng = np.random.default_rng(32)
        regrets = []
        for trial in range(trials):
            theta = sample_gaussian_prior(A, tau, rng)
            env = Environment(theta, seed=stable_mix(33, trial))
            res = fixed_design_bai(arm_set, 0.5, 0.1, env, plan=plan, budget_override=T)
            regrets.append(max(theta) - float(res.chosen @ theta))
        regrets = np.array(regrets)
        floor_est = width_mc(arm_set, A, 100_000, seed=34)
        floor = BAYES_FLOOR_CONST * floor_est.mean
        stderr = math.sqrt((regrets.std(ddof=1) / math.sqrt(trials)) ** 2
                           + (BAYES_FLOOR_CONST * floor_est.stderr) ** 2)
        assert regrets.mean() >= floor - 3.0 * stderr
