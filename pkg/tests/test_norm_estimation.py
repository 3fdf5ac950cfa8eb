import math

import numpy as np
import pytest

from linexplore.bandit_env import Environment
from linexplore.errors import RegimeViolationError
from linexplore.harness import wilson_interval
from linexplore.norm_estimation import (
    BRANCH_LARGE,
    BRANCH_LARGE_SINGULAR,
    BRANCH_MID,
    BRANCH_TINY,
    NormConsts,
    _direction_statistics,
    additive_estimate,
    default_consts,
    estimate_norm,
    large_norm_estimate,
    large_norm_sample_size,
    multiscale_test,
    rademacher_direction,
)
from linexplore.seeding import random_unit, stable_mix

CONSTS = default_consts()


def make_env(d, r, trial, seed=0):
    rng = np.random.default_rng(stable_mix(seed, 2 * trial))
    theta = r * random_unit(d, rng) if r > 0 else np.zeros(d)
    return Environment(theta, seed=stable_mix(seed, 2 * trial + 1)), rng


class TestRademacherDirection:
    def test_unit_norm(self):
        rng = np.random.default_rng(0)
        for d in (1, 3, 17):
            x = rademacher_direction(d, rng)
            assert abs(np.linalg.norm(x) - 1.0) <= 1e-12

    def test_d_one_is_sign(self):
        rng = np.random.default_rng(1)
        assert rademacher_direction(1, rng)[0] in (-1.0, 1.0)

    def test_coordinate_covariance(self):
        d, n = 4, 100_000
        rng = np.random.default_rng(2)
        X = np.stack([rademacher_direction(d, rng) for _ in range(n)])
        cov = X.T @ X / n
        # per-entry Monte Carlo sd is 1/(d sqrt(n)) off-diagonal, 0 on the
        # diagonal (entries are exactly 1/d)
        assert np.allclose(np.diag(cov), 1.0 / d, atol=1e-12)
        off = cov - np.diag(np.diag(cov))
        assert np.abs(off).max() <= 4.0 / (d * math.sqrt(n))


class TestAdditiveEstimate:
    def test_exact_sample_count(self):
        env, rng = make_env(8, 1.0, 0)
        report = additive_estimate(env, 8, 0.25, 0.1, r0=1.0, consts=CONSTS, rng=rng)
        s = math.ceil(CONSTS.c0 * 8 / 1.0)
        K = math.ceil(CONSTS.c1 * 1.0 * math.log(40.0) / 0.25**2)
        assert report.samples == K * s == env.pulls

    def test_regime_gate(self):
        env, rng = make_env(4, 1.0, 0)
        with pytest.raises(RegimeViolationError):
            additive_estimate(env, 4, 0.5, 0.1, r0=0.4, consts=CONSTS, rng=rng)
        with pytest.raises(RegimeViolationError):
            additive_estimate(env, 4, 0.5, 0.1, r0=4.5, consts=CONSTS, rng=rng)

    def test_zero_theta_concentrates_near_zero(self):
        # Adversarial misuse: r0 breaks its contract, but E[Zbar] = 0 so the
        # estimate stays small; this is a report, not an accuracy claim.
        values = []
        for trial in range(20):
            env, rng = make_env(8, 0.0, trial, seed=3)
            report = additive_estimate(env, 8, 0.2, 0.1, r0=0.3, consts=CONSTS, rng=rng)
            values.append(report.r_hat)
        assert np.mean(values) <= 0.15

    def test_failure_rate_with_calibrated_constants(self):
        d, r, eps, delta, trials = 16, 1.0, 0.2, 0.1, 500
        fails = 0
        for trial in range(trials):
            env, rng = make_env(d, r, trial, seed=4)
            report = additive_estimate(env, d, eps, delta, r0=1.0, consts=CONSTS, rng=rng)
            fails += int(abs(report.r_hat - r) > eps)
        assert wilson_interval(fails, trials)[1] <= 0.1


class TestStatisticUnbiasedness:
    def test_regression_on_r_squared(self):
        # E[Z | direction] = d mu^2, so E[Zbar] = r^2: regressing the mean
        # statistic on r^2 must give slope 1 and intercept 0.
        d, s, K, trials = 16, 32, 8, 200
        r_values = [0.0, 0.5, 1.0, 2.0]
        means, ses = [], []
        for idx, r in enumerate(r_values):
            z_trials = []
            for trial in range(trials):
                env, rng = make_env(d, r, trial, seed=100 + idx)
                z_trials.append(float(_direction_statistics(env, d, s, K, rng).mean()))
            z_trials = np.array(z_trials)
            means.append(z_trials.mean())
            ses.append(z_trials.std(ddof=1) / math.sqrt(trials))
        x = np.array([r * r for r in r_values])
        y = np.array(means)
        wts = 1.0 / np.array(ses) ** 2
        xbar = (wts * x).sum() / wts.sum()
        slope = (wts * (x - xbar) * y).sum() / (wts * (x - xbar) ** 2).sum()
        intercept = (wts * (y - slope * x)).sum() / wts.sum()
        se_slope = math.sqrt(1.0 / (wts * (x - xbar) ** 2).sum())
        se_intercept = math.sqrt(1.0 / wts.sum() + xbar**2 / (wts * (x - xbar) ** 2).sum())
        assert abs(slope - 1.0) <= 4.0 * se_slope
        assert abs(intercept) <= 4.0 * se_intercept


class TestMultiscaleTest:
    def test_zero_theta_returns_eps(self):
        hits = 0
        trials = 300
        for trial in range(trials):
            env, rng = make_env(16, 0.0, trial, seed=5)
            r0, _ = multiscale_test(env, 16, 0.25, 0.1, CONSTS, rng)
            hits += int(r0 == 0.25)
        assert hits / trials >= 0.97  # theory: >= 1 - 3 delta/16

    def test_mid_range_constant_factor(self):
        hits = 0
        trials = 300
        d, r = 16, 1.0
        for trial in range(trials):
            env, rng = make_env(d, r, trial, seed=6)
            r0, _ = multiscale_test(env, d, 0.1, 0.1, CONSTS, rng)
            hits += int(r / 2 < r0 <= 2 * r)
        assert hits / trials >= 0.95  # theory: >= 1 - 3 delta/8

    def test_huge_norm_exhausts_to_large(self):
        hits = 0
        trials = 100
        d = 16
        r = 4.0 * math.sqrt(d)
        for trial in range(trials):
            env, rng = make_env(d, r, trial, seed=7)
            r0, _ = multiscale_test(env, d, 0.2, 0.1, CONSTS, rng)
            hits += int(r0 >= 2.0 * math.sqrt(d))
        assert hits / trials >= 0.95

    def test_samples_accounted(self):
        env, rng = make_env(8, 1.0, 0, seed=8)
        _, samples = multiscale_test(env, 8, 0.2, 0.1, CONSTS, rng)
        assert samples == env.pulls


class TestLargeNormEstimate:
    def test_singular_fallback(self):
        d = 8
        env, rng = make_env(d, 3.0 * math.sqrt(d), 0, seed=9)
        report = large_norm_estimate(env, d, n=d - 1, rng=rng)
        assert report.branch == BRANCH_LARGE_SINGULAR
        assert report.r_hat == pytest.approx(math.sqrt(d))
        assert report.samples == d - 1

    def test_debiased_estimator_is_unbiased(self):
        d, n, trials = 8, 400, 500
        r = 3.0 * math.sqrt(d)
        values = []
        for trial in range(trials):
            env, rng = make_env(d, r, trial, seed=10)
            report = large_norm_estimate(env, d, n, rng=rng)
            assert report.branch == BRANCH_LARGE
            values.append(report.r_hat**2)
        values = np.array(values)
        se = values.std(ddof=1) / math.sqrt(trials)
        assert abs(values.mean() - r * r) <= 4.0 * se

    def test_failure_rate_at_calibrated_n(self):
        d, eps, delta, trials = 16, 0.2, 0.1, 500
        r = 5.0 * math.sqrt(d)
        n = math.ceil(CONSTS.C1 * d * math.log(4.0 / delta) / eps**2)
        fails = 0
        for trial in range(trials):
            env, rng = make_env(d, r, trial, seed=11)
            report = large_norm_estimate(env, d, n, rng=rng)
            fails += int(abs(report.r_hat - r) > eps)
        assert fails / trials <= delta


class TestEstimateNorm:
    def test_zero_theta_returns_eps_exactly(self):
        env, rng = make_env(16, 0.0, 0, seed=12)
        report = estimate_norm(env, 16, 0.25, 0.1, CONSTS, rng)
        assert report.branch == BRANCH_TINY
        assert report.r_hat == 0.25

    def test_mid_norm_failure_rate(self):
        d, eps, delta, trials = 16, 0.2, 0.1, 150
        fails = 0
        for trial in range(trials):
            env, rng = make_env(d, 2.0, trial, seed=13)
            report = estimate_norm(env, d, eps, delta, CONSTS, rng)
            fails += int(abs(report.r_hat - 2.0) > eps)
        assert wilson_interval(fails, trials)[1] <= 0.1

    def test_large_norm_routes_to_large_branch(self):
        d = 16
        r = 5.0 * math.sqrt(d)
        fails = 0
        trials = 100
        for trial in range(trials):
            env, rng = make_env(d, r, trial, seed=14)
            report = estimate_norm(env, d, 0.2, 0.1, CONSTS, rng)
            assert report.branch in (BRANCH_LARGE, BRANCH_LARGE_SINGULAR)
            fails += int(abs(report.r_hat - r) > 0.2)
        assert fails / trials <= 0.1

    def test_sample_accounting_every_branch(self):
        for d, r in [(4, 0.0), (4, 1.0), (16, 4.0), (16, 20.0)]:
            for trial in range(3):
                env, rng = make_env(d, r, trial, seed=15)
                report = estimate_norm(env, d, 0.2, 0.1, CONSTS, rng)
                assert report.samples == env.pulls

    def test_dispatch_partition(self):
        # tiny iff r0 == eps, large iff r0 >= 2 sqrt(d), mid otherwise
        d, eps = 16, 0.2
        for r in (0.0, 0.3, 1.0, 4.0, 20.0):
            for trial in range(5):
                env, rng = make_env(d, r, trial, seed=16)
                report = estimate_norm(env, d, eps, 0.1, CONSTS, rng)
                if report.r0 == eps:
                    assert report.branch == BRANCH_TINY
                elif report.r0 >= 2.0 * math.sqrt(d):
                    assert report.branch in (BRANCH_LARGE, BRANCH_LARGE_SINGULAR)
                else:
                    assert report.branch == BRANCH_MID

    def test_monotone_budget_in_eps(self):
        # Halving eps multiplies the mid-branch total by about 4.
        d, r, trials = 16, 1.0, 20
        totals = {}
        for eps in (0.2, 0.1):
            total = 0
            for trial in range(trials):
                env, rng = make_env(d, r, trial, seed=17)
                total += estimate_norm(env, d, eps, 0.1, CONSTS, rng).samples
            totals[eps] = total / trials
        ratio = totals[0.1] / totals[0.2]
        assert 3.5 <= ratio <= 4.5

    def test_parameter_validation(self):
        env, rng = make_env(4, 0.0, 0)
        with pytest.raises(ValueError):
            estimate_norm(env, 4, 1.5, 0.1, CONSTS, rng)
        with pytest.raises(ValueError):
            estimate_norm(env, 4, 0.2, 0.5, CONSTS, rng)


class TestConsts:
    def test_defaults_are_calibrated(self):
        assert CONSTS.c0 > 0 and CONSTS.c1 > 0 and CONSTS.C0 > 0 and CONSTS.C1 > 0
        assert math.isfinite(CONSTS.budget_factor)

    def test_budget_knob_scales_counts(self):
        scaled = CONSTS.scaled(2.0)
        assert scaled.c0 == 2 * CONSTS.c0
        assert scaled.c1 == 2 * CONSTS.c1
        assert scaled.C1 == 2 * CONSTS.C1
        assert scaled.C0 == CONSTS.C0
        with pytest.raises(ValueError):
            CONSTS.scaled(0.0)

    def test_positivity_enforced(self):
        with pytest.raises(ValueError):
            NormConsts(c0=0.0, c1=1.0, C0=1.0, C1=1.0)

    def test_large_norm_sample_size_gate(self):
        n = large_norm_sample_size(8, 0.9, 0.4, NormConsts(c0=1, c1=1, C0=50, C1=0.1))
        assert n >= 50 * (8 + math.log(5.0))
