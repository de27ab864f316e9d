"""Realized net present values for portfolios of stochastic-cash-flow projects.

A project paying coupon ``c * w * (1 + x_t)`` each period and returning
``lam * w`` at maturity has NPV ``w * h`` where ``h`` is the realized
discounted return per unit invested:

    h = -1 + c * sum_t (1 + x_t) / (1+r)^t + lam / (1+r)^T

The portfolio NPV is the sum of ``w_i * h_i`` over projects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discounting import MarketSpec, discount_vector

__all__ = [
    "ProjectEnsemble",
    "CashFlowMatrix",
    "realized_unit_return",
    "unit_returns",
    "npv_single",
    "total_npv",
]


def _as_param_vector(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(arr < 0.0):
        raise ValueError(f"{name} contains negative entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProjectEnsemble:
    """Per-project parameters: coupon rates, attenuation rates, noise variances.

    All three vectors must have the same length and non-negative entries.
    """

    c: np.ndarray
    lam: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        c = _as_param_vector("coupon rates", self.c)
        lam = _as_param_vector("attenuation rates", self.lam)
        v = _as_param_vector("noise variances", self.v)
        if not (c.size == lam.size == v.size):
            raise ValueError(
                f"parameter vectors must share one length, got "
                f"{c.size}, {lam.size}, {v.size}"
            )
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        """Number of projects."""
        return self.c.size


@dataclass(frozen=True)
class CashFlowMatrix:
    """One realized noise matrix, a row per project and a column per period."""

    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2 or x.size == 0:
            raise ValueError(f"noise matrix must be 2-D and non-empty, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("noise matrix contains non-finite entries")
        x = x.copy()
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @classmethod
    def zeros(cls, n_projects: int, n_periods: int) -> "CashFlowMatrix":
        """The deterministic (noise-free) cash-flow world."""
        return cls(x=np.zeros((n_projects, n_periods)))

    @property
    def n_projects(self) -> int:
        return self.x.shape[0]

    @property
    def n_periods(self) -> int:
        return self.x.shape[1]


def realized_unit_return(c: float, lam: float, x_row, market: MarketSpec) -> float:
    """Discounted return per unit invested for one project and noise path."""
    if not (c >= 0):
        raise ValueError(f"coupon rate must be non-negative, got {c!r}")
    if not (lam >= 0):
        raise ValueError(f"attenuation rate must be non-negative, got {lam!r}")
    x = np.asarray(x_row, dtype=float)
    if x.shape != (market.T,):
        raise ValueError(f"noise path has shape {x.shape}, expected ({market.T},)")
    disc = discount_vector(market.r, market.T)
    coupons = float(np.dot(1.0 + x, disc))
    return -1.0 + c * coupons + lam * (1.0 + market.r) ** -market.T


def npv_single(w: float, c: float, lam: float, x_row, market: MarketSpec) -> float:
    """Realized NPV of one project at investment ``w``.

    Computed as ``w`` times the unit return, so it is exactly linear in the
    invested amount (short positions included; the feasible set never
    forbids negative ``w``).
    """
    if not math.isfinite(w):
        raise ValueError(f"invested amount must be finite, got {w!r}")
    return w * realized_unit_return(c, lam, x_row, market)


def unit_returns(ensemble: ProjectEnsemble, X: CashFlowMatrix, market: MarketSpec) -> np.ndarray:
    """Per-unit discounted returns of every project, as one vector."""
    x = X.x
    if x.shape != (ensemble.n, market.T):
        raise ValueError(
            f"noise matrix shape {x.shape} does not match "
            f"{ensemble.n} projects x {market.T} periods"
        )
    disc = discount_vector(market.r, market.T)
    terminal = (1.0 + market.r) ** -market.T
    return -1.0 + ensemble.c * ((1.0 + x) @ disc) + ensemble.lam * terminal


def total_npv(w, ensemble: ProjectEnsemble, X: CashFlowMatrix, market: MarketSpec) -> float:
    """Portfolio NPV ``sum_i w_i * h_i`` for one realized noise matrix.

    The accumulation over projects uses error-free compensated summation
    so that float error stays far below Monte Carlo error even at N ~ 1e5.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (ensemble.n,):
        raise ValueError(f"investment vector has shape {w.shape}, expected ({ensemble.n},)")
    if not np.all(np.isfinite(w)):
        raise ValueError("investment vector contains non-finite entries")
    h = unit_returns(ensemble, X, market)
    return math.fsum(w * h)
