"""Optimal investment allocation and maximal NPV for stochastic project portfolios.

The package computes, for N projects with noisy cash flows under a budget
and an investment-concentration cap:

* realized portfolio NPVs for a given noise world (:mod:`npvmax.npv`),
* the exact finite-N optimal allocation, by closed form and by an
  independent iterative oracle (:mod:`npvmax.allocation`),
* the large-portfolio closed forms, quenched and annealed, with internal
  rates and sign regions (:mod:`npvmax.asymptotic`),
* reproducible ensemble and noise sampling (:mod:`npvmax.sampling`),
* deterministic CSV experiment drivers and a CLI (:mod:`npvmax.experiments`).
"""

from .allocation import (
    Allocation,
    UnitReturnStats,
    feasibility_residuals,
    h_stats,
    max_npv_per_project,
    oracle_allocation,
    portfolio_objective,
    solve_allocation,
)
from .asymptotic import (
    REGIONS,
    LimitResult,
    MomentSet,
    classify_region,
    internal_rate,
    limit_summary,
    max_expected_npv_limit,
    max_npv_limit,
    order_parameters,
    payoff_variance,
    unit_return_mean,
    unit_return_variance,
)
from .discounting import (
    DiscountFactors,
    MarketSpec,
    annuity_factor,
    discount_vector,
    squared_annuity_factor,
    unit_terminal_payoff,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    EnsembleFormatError,
    InternalCheckError,
    NoRootError,
)
from .npv import (
    CashFlowMatrix,
    ProjectEnsemble,
    npv_single,
    realized_unit_return,
    total_npv,
    unit_returns,
)
from .sampling import (
    NOISE_FAMILIES,
    ParamDistributions,
    analytic_moments,
    read_ensemble_csv,
    sample_ensemble,
    sample_noise,
    write_ensemble_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "CashFlowMatrix",
    "ConfigError",
    "ConvergenceError",
    "DiscountFactors",
    "EnsembleFormatError",
    "InternalCheckError",
    "LimitResult",
    "MarketSpec",
    "MomentSet",
    "NOISE_FAMILIES",
    "NoRootError",
    "ParamDistributions",
    "ProjectEnsemble",
    "REGIONS",
    "UnitReturnStats",
    "analytic_moments",
    "annuity_factor",
    "classify_region",
    "discount_vector",
    "feasibility_residuals",
    "h_stats",
    "internal_rate",
    "limit_summary",
    "max_expected_npv_limit",
    "max_npv_limit",
    "max_npv_per_project",
    "npv_single",
    "oracle_allocation",
    "order_parameters",
    "payoff_variance",
    "portfolio_objective",
    "read_ensemble_csv",
    "realized_unit_return",
    "sample_ensemble",
    "sample_noise",
    "solve_allocation",
    "squared_annuity_factor",
    "total_npv",
    "unit_return_mean",
    "unit_return_variance",
    "unit_returns",
    "unit_terminal_payoff",
    "write_ensemble_csv",
    "__version__",
]
