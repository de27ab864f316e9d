"""Discount-factor algebra for level cash flows at a constant per-period rate.

Everything downstream (realized NPVs, the finite-N optimizer, the
large-portfolio closed forms) is expressed in terms of three quantities:
the annuity factor ``A1 = sum_{t=1..T} (1+r)^-t``, its squared-discount
counterpart ``A2 = sum_{t=1..T} (1+r)^-2t``, and the terminal discount
``(1+r)^-T``.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MarketSpec",
    "DiscountFactors",
    "annuity_factor",
    "squared_annuity_factor",
    "unit_terminal_payoff",
    "discount_vector",
]

# Below this rate the closed forms divide two near-zero quantities; the
# direct sums are exact in the r -> 0 limit, so switch over.
_DIRECT_SUM_RATE = 1e-8


def _check_rate_and_maturity(r: float, T) -> int:
    try:
        T = operator.index(T)
    except TypeError:
        raise ValueError(
            f"maturity must be an integer number of periods, got {T!r}"
        ) from None
    if T < 1:
        raise ValueError(f"maturity must be at least one period, got {T}")
    if not (isinstance(r, (int, float)) and math.isfinite(r) and r > 0):
        raise ValueError(f"interest rate must be finite and positive, got {r!r}")
    return T


def annuity_factor(r: float, T: int) -> float:
    """Present value of one unit paid at the end of each period 1..T.

    Closed form ``(1 - (1+r)^-T) / r``; falls back to the direct sum for
    rates below 1e-8 where the closed form becomes 0/0.
    """
    T = _check_rate_and_maturity(r, T)
    if r < _DIRECT_SUM_RATE:
        return float(np.sum((1.0 + r) ** -np.arange(1, T + 1, dtype=float)))
    return (1.0 - (1.0 + r) ** -T) / r


def squared_annuity_factor(r: float, T: int) -> float:
    """Present value sum with squared discounting, ``sum_t (1+r)^-2t``.

    Closed form ``(1 - (1+r)^-2T) / (r^2 + 2r)``, with the same low-rate
    fallback as :func:`annuity_factor`.
    """
    T = _check_rate_and_maturity(r, T)
    if r < _DIRECT_SUM_RATE:
        return float(np.sum((1.0 + r) ** (-2.0 * np.arange(1, T + 1, dtype=float))))
    return (1.0 - (1.0 + r) ** (-2 * T)) / (r * r + 2.0 * r)


def unit_terminal_payoff(c: float, lam: float, r: float, T: int) -> float:
    """Discounted payoff per unit invested: coupons plus terminal recovery.

    Equals ``c * A1 + lam * (1+r)^-T`` for coupon rate ``c`` and
    attenuation rate ``lam``.
    """
    if not (c >= 0):
        raise ValueError(f"coupon rate must be non-negative, got {c!r}")
    if not (lam >= 0):
        raise ValueError(f"attenuation rate must be non-negative, got {lam!r}")
    a1 = annuity_factor(r, T)
    return c * a1 + lam * (1.0 + r) ** -T


def discount_vector(r: float, T: int) -> np.ndarray:
    """Vector of per-period discount factors ``(1+r)^-t`` for t = 1..T."""
    T = _check_rate_and_maturity(r, T)
    return (1.0 + r) ** -np.arange(1, T + 1, dtype=float)


@dataclass(frozen=True)
class MarketSpec:
    """Market-wide parameters shared by all projects.

    Parameters
    ----------
    r : float
        Interest rate per period, strictly positive.
    T : int
        Maturity in whole periods, at least 1. Fractional maturities are
        rejected rather than interpolated.
    m : float
        Budget per project, strictly positive. The portfolio budget
        constraint is ``sum(w) = N * m``.
    tau : float
        Investment-concentration cap, at least ``m ** 2``. The portfolio
        concentration constraint is ``sum(w**2) <= N * tau``.
    """

    r: float
    T: int
    m: float
    tau: float

    def __post_init__(self) -> None:
        T = _check_rate_and_maturity(self.r, self.T)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "tau", float(self.tau))
        if not (math.isfinite(self.m) and self.m > 0):
            raise ValueError(f"budget per project must be positive, got {self.m!r}")
        if not (math.isfinite(self.tau) and self.tau >= self.m * self.m):
            raise ValueError(
                f"concentration cap tau={self.tau!r} must be at least m**2={self.m**2!r}"
            )

    @classmethod
    def from_normalized(
        cls, r: float, T: int, m: float = 1.0, tau_norm: float = 1.0
    ) -> "MarketSpec":
        """Build a spec from the budget-normalized concentration cap tau/m**2."""
        if not tau_norm >= 1.0:
            raise ValueError(f"normalized concentration must be >= 1, got {tau_norm!r}")
        m = float(m)
        return cls(r=r, T=T, m=m, tau=float(tau_norm) * m * m)

    @property
    def tau_norm(self) -> float:
        """Concentration cap normalized by the squared per-project budget."""
        return self.tau / (self.m * self.m)


@dataclass(frozen=True)
class DiscountFactors:
    """The annuity factors and terminal discount for one market.

    Invariants ``0 < a2 < a1`` and ``0 < terminal < 1`` hold for every
    positive rate and maturity; violations indicate corrupted inputs.
    """

    a1: float
    a2: float
    terminal: float

    def __post_init__(self) -> None:
        if not (0.0 < self.a2 < self.a1):
            raise ValueError(f"need 0 < a2 < a1, got a1={self.a1!r}, a2={self.a2!r}")
        if not (0.0 < self.terminal < 1.0):
            raise ValueError(f"terminal discount must lie in (0, 1), got {self.terminal!r}")

    @classmethod
    def from_market(cls, market: MarketSpec) -> "DiscountFactors":
        return cls(
            a1=annuity_factor(market.r, market.T),
            a2=squared_annuity_factor(market.r, market.T),
            terminal=(1.0 + market.r) ** -market.T,
        )
