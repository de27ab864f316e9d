"""Deterministic experiment drivers emitting CSV tables.

Each driver resolves a small config into a table whose rows are a pure
function of the config (all randomness is seed-derived), so re-running a
command reproduces its output byte for byte. Rows from parallel workers
are collected in input order, never completion order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Callable, Mapping, Sequence

from .allocation import (
    feasibility_residuals,
    h_stats,
    max_npv_per_project,
    oracle_allocation,
    portfolio_objective,
    solve_allocation,
)
from .asymptotic import classify_region, internal_rate, max_npv_limit
from .discounting import MarketSpec
from .errors import InternalCheckError, NoRootError
from .npv import unit_returns
from .sampling import (
    NOISE_FAMILIES,
    ParamDistributions,
    analytic_moments,
    read_ensemble_csv,
    sample_ensemble,
    sample_noise,
)

__all__ = [
    "Figure1Config",
    "RegionConfig",
    "ConvergeConfig",
    "AllocateConfig",
    "ExperimentTable",
    "internal_rate_curves",
    "region_map",
    "convergence_study",
    "allocation_report",
    "render_csv",
]

# Defaults reproduce the reference experiment: beta(2, 5) coupons,
# exponential(0.9) attenuations, unit noise variance, normalized cap 3.
_ALPHA, _BETA, _GAMMA, _V, _TAU_NORM = 2.0, 5.0, 0.9, 1.0, 3.0


@dataclass(frozen=True)
class Figure1Config:
    """Internal-rate curves versus maturity."""

    t_max: int = 30
    alpha: float = _ALPHA
    beta: float = _BETA
    gamma: float = _GAMMA
    v: float = _V
    tau_norm: float = _TAU_NORM
    workers: int = 1

    def __post_init__(self) -> None:
        _check_positive_int("t-max", self.t_max)
        _check_positive_int("workers", self.workers)


@dataclass(frozen=True)
class RegionConfig:
    """Sign-region classification over an (r, T) grid."""

    r_min: float = 0.005
    r_max: float = 1.6
    r_step: float = 0.005
    t_max: int = 30
    alpha: float = _ALPHA
    beta: float = _BETA
    gamma: float = _GAMMA
    v: float = _V
    tau_norm: float = _TAU_NORM
    workers: int = 1

    def __post_init__(self) -> None:
        _check_positive_int("t-max", self.t_max)
        _check_positive_int("workers", self.workers)
        if not (0.0 < self.r_min <= self.r_max):
            raise ValueError(f"need 0 < r-min <= r-max, got {self.r_min!r}, {self.r_max!r}")
        if not self.r_step > 0.0:
            raise ValueError(f"r-step must be positive, got {self.r_step!r}")


@dataclass(frozen=True)
class ConvergeConfig:
    """Self-averaging study: finite-N optimum versus its analytic limit."""

    n_list: tuple[int, ...] = (100, 1_000, 10_000, 100_000)
    seeds: int = 32
    base_seed: int = 0
    r: float = 0.1
    t_mat: int = 10
    m: float = 1.0
    tau_norm: float = _TAU_NORM
    alpha: float = _ALPHA
    beta: float = _BETA
    gamma: float = _GAMMA
    v: float = _V
    noise_family: str = "gaussian"
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise ValueError(f"n-list must contain positive sizes, got {self.n_list!r}")
        _check_positive_int("seeds", self.seeds)
        _check_positive_int("t-mat", self.t_mat)
        _check_positive_int("workers", self.workers)
        if self.base_seed < 0:
            raise ValueError(f"base-seed must be non-negative, got {self.base_seed!r}")
        if self.noise_family not in NOISE_FAMILIES:
            raise ValueError(
                f"unknown noise family {self.noise_family!r}; choose from {NOISE_FAMILIES}"
            )


@dataclass(frozen=True)
class AllocateConfig:
    """Optimal allocation report for one sampled or loaded ensemble."""

    ensemble: str | None = None
    n: int = 10
    alpha: float = _ALPHA
    beta: float = _BETA
    gamma: float = _GAMMA
    v: float = _V
    seed: int = 0
    r: float = 0.1
    t_mat: int = 10
    m: float = 1.0
    tau_norm: float = _TAU_NORM
    noise_family: str = "gaussian"
    verify: bool = False

    def __post_init__(self) -> None:
        _check_positive_int("t-mat", self.t_mat)
        if self.ensemble is None:
            _check_positive_int("n", self.n)
        if self.noise_family not in NOISE_FAMILIES:
            raise ValueError(
                f"unknown noise family {self.noise_family!r}; choose from {NOISE_FAMILIES}"
            )


@dataclass(frozen=True)
class ExperimentTable:
    """A rendered-ready result: metadata, column header, rows, footer."""

    command: str
    config: Mapping[str, object]
    header: tuple[str, ...]
    rows: tuple[tuple, ...]
    footer: tuple[tuple[str, object], ...] = ()


def _check_positive_int(name: str, value) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")


def _config_mapping(cfg) -> dict[str, object]:
    """Resolved config as flag-style keys; execution details are omitted."""
    out = {}
    for field in fields(cfg):
        if field.name == "workers":
            continue
        out[field.name.replace("_", "-")] = getattr(cfg, field.name)
    return out


def _ordered_map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _distributions(cfg, noise_family: str = "gaussian") -> ParamDistributions:
    return ParamDistributions(
        alpha=cfg.alpha, beta=cfg.beta, gamma=cfg.gamma, v=cfg.v, noise_family=noise_family
    )


def internal_rate_curves(cfg: Figure1Config) -> ExperimentTable:
    """Internal rates of both limit values for every maturity up to t_max."""
    moments = analytic_moments(_distributions(cfg))

    def row(T: int) -> tuple:
        try:
            quenched = internal_rate("quenched", moments, T, cfg.tau_norm)
            annealed = internal_rate("annealed", moments, T, cfg.tau_norm)
        except NoRootError as exc:
            raise NoRootError(f"T={T}: {exc}") from exc
        if not quenched >= annealed:
            raise InternalCheckError(f"T={T}: quenched root {quenched!r} < annealed {annealed!r}")
        return (T, quenched, annealed)

    rows = _ordered_map(row, range(1, cfg.t_max + 1), cfg.workers)
    return ExperimentTable(
        command="figure1",
        config=_config_mapping(cfg),
        header=("T", "r_c", "r_c_or"),
        rows=tuple(rows),
    )


def region_map(cfg: RegionConfig) -> ExperimentTable:
    """Classify the sign region of every (r, T) grid point."""
    moments = analytic_moments(_distributions(cfg))
    count = int(math.floor((cfg.r_max - cfg.r_min) / cfg.r_step + 1e-9)) + 1
    rates = [cfg.r_min + i * cfg.r_step for i in range(count)]

    def rows_for(T: int) -> list[tuple]:
        return [(T, r, classify_region(r, T, moments, cfg.tau_norm)) for r in rates]

    groups = _ordered_map(rows_for, range(1, cfg.t_max + 1), cfg.workers)
    rows = [row for group in groups for row in group]
    return ExperimentTable(
        command="region",
        config=_config_mapping(cfg),
        header=("T", "r", "region"),
        rows=tuple(rows),
    )


def convergence_study(cfg: ConvergeConfig) -> ExperimentTable:
    """Mean and spread of the finite-N optimum against the analytic limit."""
    dist = _distributions(cfg, cfg.noise_family)
    moments = analytic_moments(dist)
    market = MarketSpec.from_normalized(r=cfg.r, T=cfg.t_mat, m=cfg.m, tau_norm=cfg.tau_norm)
    analytic = max_npv_limit(moments, market)
    seeds = range(cfg.base_seed, cfg.base_seed + cfg.seeds)
    tasks = [(n, seed) for n in cfg.n_list for seed in seeds]

    def one(task: tuple[int, int]) -> float:
        n, seed = task
        ensemble = sample_ensemble(dist, n, seed)
        noise = sample_noise(ensemble, cfg.t_mat, dist.noise_family, seed)
        return max_npv_per_project(ensemble, noise, market)

    values = _ordered_map(one, tasks, cfg.workers)
    rows = []
    for idx, n in enumerate(cfg.n_list):
        chunk = values[idx * cfg.seeds : (idx + 1) * cfg.seeds]
        mean = math.fsum(chunk) / cfg.seeds
        std = math.sqrt(math.fsum((val - mean) ** 2 for val in chunk) / cfg.seeds)
        rows.append((n, mean, std, analytic))
    return ExperimentTable(
        command="converge",
        config=_config_mapping(cfg),
        header=("N", "mean_kappa_N", "std_kappa_N", "kappa_analytic"),
        rows=tuple(rows),
    )


def allocation_report(cfg: AllocateConfig) -> ExperimentTable:
    """Per-project optimal investments plus multipliers and residuals."""
    if cfg.ensemble is not None:
        ensemble = read_ensemble_csv(cfg.ensemble)
    else:
        ensemble = sample_ensemble(_distributions(cfg, cfg.noise_family), cfg.n, cfg.seed)
    market = MarketSpec.from_normalized(r=cfg.r, T=cfg.t_mat, m=cfg.m, tau_norm=cfg.tau_norm)
    noise = sample_noise(ensemble, cfg.t_mat, cfg.noise_family, cfg.seed)
    h = unit_returns(ensemble, noise, market)
    alloc = solve_allocation(h_stats(h), market)
    objective = portfolio_objective(alloc.w, h)
    budget_res, concentration_res = feasibility_residuals(alloc.w, market)

    rows = [
        (i + 1, ensemble.c[i], ensemble.lam[i], h[i], alloc.w[i]) for i in range(ensemble.n)
    ]
    footer = [
        ("k", alloc.k),
        ("theta", alloc.theta),
        ("binding", alloc.binding),
        ("objective_per_project", objective),
        ("budget_residual", budget_res),
        ("concentration_residual", concentration_res),
    ]
    if cfg.verify:
        reference = oracle_allocation(h, market)
        gap = abs(objective - portfolio_objective(reference.w, h))
        footer.append(("oracle_objective_gap", gap))
        if gap >= 1e-8:
            raise InternalCheckError(
                f"closed-form objective differs from the iterative oracle by {gap:.3e}"
            )
    return ExperimentTable(
        command="allocate",
        config=_config_mapping(cfg),
        header=("i", "c", "lambda", "h", "w"),
        rows=tuple(rows),
        footer=tuple(footer),
    )


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (tuple, list)):
        return ",".join(_format_value(item) for item in value)
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return str(value)


def render_csv(table: ExperimentTable) -> str:
    """Render a table as CSV text with a ``#``-prefixed metadata header.

    The metadata block records the full resolved config, so identical
    configs always produce byte-identical files.
    """
    lines = [f"# npvmax {table.command}"]
    for key, value in table.config.items():
        lines.append(f"# {key} = {_format_value(value)}")
    lines.append(",".join(table.header))
    for row in table.rows:
        lines.append(",".join(_format_value(value) for value in row))
    for key, value in table.footer:
        lines.append(f"# {key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"
