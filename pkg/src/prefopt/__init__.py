"""Preference-based stochastic optimization from noisy pairwise comparisons."""

__version__ = "0.1.0"

from .diagnostics import (  # noqa: E402
    Metric,
    cost_error_metric,
    estimate_cd,
    grad_norm_metric,
    param_error_metric,
    rate_slope,
)
from .estimators import (  # noqa: E402
    EstimatorConfig,
    EstimatorKind,
    GradientEstimate,
    estimate,
    estimate_psgd_g,
    estimate_psgd_u,
    estimate_zo_two_point,
)
from .lqg import (  # noqa: E402
    LqgSystem,
    expected_cost,
    lqg_objective,
    perturbed_init,
    riccati_optimal_gain,
    rollout_cost,
)
from .optimizer import OptimizerConfig, TrialTrace, run, theorem_schedule  # noqa: E402
from .oracles import (  # noqa: E402
    InteractiveOracle,
    StochasticObjective,
    compare,
    interactive_oracle,
    nonconvex_objective,
    quadratic_objective,
)
from .rng import make_stream, sample_gaussian, sample_unit_sphere, trial_streams  # noqa: E402
