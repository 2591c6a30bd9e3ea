"""Sums of independent geometric Lévy processes: regimes, limits and checks."""

from .errors import (
    BudgetExceededError,
    ClassificationError,
    ConfigError,
    DomainError,
    GeolevyError,
    NumericalError,
    UnsupportedMethodError,
)
from .levy_models import BrownianMotion, CompoundPoissonGauss, LevyModel, tilt
from .rate_function import (
    RateProfile,
    critical_points,
    rate_eval,
    rate_inverse,
    solve_alpha,
    tilted_rate,
)
from .regimes import (
    Constant,
    CriticalRule,
    ExplicitTable,
    Proportional,
    RegimeClass,
    centering_A,
    classify,
    moments_exact,
    scaling_B,
    truncated_exp_moment,
)
from .limit_processes import (
    PoissonSeriesConfig,
    residual_bound,
    sample_clt_gaussian,
    sample_ou,
    sample_poisson_points,
    sample_stable_series,
)
from .montecarlo import EnsembleSpec, simulate_ensemble

__all__ = [
    "BudgetExceededError",
    "ClassificationError",
    "ConfigError",
    "DomainError",
    "GeolevyError",
    "NumericalError",
    "UnsupportedMethodError",
    "BrownianMotion",
    "CompoundPoissonGauss",
    "LevyModel",
    "tilt",
    "RateProfile",
    "critical_points",
    "rate_eval",
    "rate_inverse",
    "solve_alpha",
    "tilted_rate",
    "Constant",
    "CriticalRule",
    "ExplicitTable",
    "Proportional",
    "RegimeClass",
    "centering_A",
    "classify",
    "moments_exact",
    "scaling_B",
    "truncated_exp_moment",
    "PoissonSeriesConfig",
    "residual_bound",
    "sample_clt_gaussian",
    "sample_ou",
    "sample_poisson_points",
    "sample_stable_series",
    "EnsembleSpec",
    "simulate_ensemble",
]

__version__ = "0.1.0"
