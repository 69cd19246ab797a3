"""Budget-constrained algorithmic bidding for two-settlement markets."""

from .benchmarks import (
    SaConfig,
    SaPolicy,
    SvmGrConfig,
    SvmGrPolicy,
    UcbidGrPolicy,
    project_to_feasible,
)
from .dpds import DpdsPolicy, DpSolution, GridSchedule, grid_size, solve
from .market_model import (
    BidVector,
    MarketDay,
    OptionId,
    PriceBounds,
    Side,
    enumerate_options,
    settle,
    translate,
    untranslate,
)
from .models import UniformBernoulliModel, UniformSpreadModel, UnsupportedModelError
from .payoff_stats import BreakpointTable, PayoffBounds, mean_variance_combine
from .policies import ConstantPolicy, OraclePolicy, Policy, ZeroPolicy
from .simulator import (
    RegretTrajectory,
    lower_bound_family,
    run_experiment,
    sample_day,
    slope_check,
)

__version__ = "0.1.0"

__all__ = [
    "BidVector",
    "BreakpointTable",
    "ConstantPolicy",
    "DpSolution",
    "DpdsPolicy",
    "GridSchedule",
    "MarketDay",
    "OptionId",
    "OraclePolicy",
    "PayoffBounds",
    "Policy",
    "PriceBounds",
    "RegretTrajectory",
    "SaConfig",
    "SaPolicy",
    "Side",
    "SvmGrConfig",
    "SvmGrPolicy",
    "UcbidGrPolicy",
    "UniformBernoulliModel",
    "UniformSpreadModel",
    "UnsupportedModelError",
    "ZeroPolicy",
    "enumerate_options",
    "grid_size",
    "lower_bound_family",
    "mean_variance_combine",
    "project_to_feasible",
    "run_experiment",
    "sample_day",
    "settle",
    "slope_check",
    "solve",
    "translate",
    "untranslate",
]
