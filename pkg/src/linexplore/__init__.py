"""Pure exploration in linear bandits: designs, widths, norm estimation,
adaptive identification, hard instances, and a seeded experiment harness."""

from .arm_sets import (
    ArmSet,
    Ball,
    FiniteSet,
    Hypercube01,
    HypercubePM,
    MSet,
    MultiTask,
    UnionOfBalls,
    multitask_basis,
    parse_set_spec,
)
from .bandit_env import Environment, is_eps_best, optimal_value, simple_regret
from .designs import (
    Design,
    FixedDesign,
    WidthEstimate,
    estimate_width,
    g_optimal,
    inv_sqrt_psd,
    mix,
    round_design,
    tau_statistic,
    width_design,
    width_mc,
)
from .hard_instances import hypercube_hard, mset_hard, multitask_hard, unionball_hard
from .harness import ExperimentConfig, run_trials, scaling_experiment, wilson_interval
from .norm_estimation import (
    NormConsts,
    NormReport,
    additive_estimate,
    default_consts,
    estimate_norm,
    large_norm_estimate,
    multiscale_test,
    rademacher_direction,
)
from .pure_exploration import (
    BaiResult,
    bayes_regret_floor,
    fixed_design_bai,
    make_partition,
    median_elimination,
    partitioned_adaptive_bai,
    sample_gaussian_prior,
    union_ball_adaptive_bai,
)
from .seeding import stable_mix

__version__ = "0.1.0"
