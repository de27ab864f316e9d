"""Exact finite-N maximization of portfolio NPV over the feasible set.

The feasible set is the budget hyperplane ``sum(w) = N m`` intersected with
the concentration ball ``sum(w**2) <= N tau``. Inside the hyperplane that
intersection is a disk of radius ``sqrt(N (tau - m^2))`` centered on the
uniform allocation, and the objective ``sum(w_i h_i)`` is linear, so the
maximizer tilts the uniform allocation toward projects with above-average
unit returns until the disk boundary is reached:

    w_i = m + sqrt(tau - m^2) * (h_i - mean(h)) / sqrt(var(h))

with KKT multipliers ``theta = sqrt(var(h) / (tau - m^2))`` for the ball
and ``k = theta m - mean(h)`` for the hyperplane, i.e. ``w_i = (k + h_i) / theta``.

:func:`oracle_allocation` solves the same problem iteratively without the
closed form and exists to cross-check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discounting import MarketSpec
from .errors import ConvergenceError, InternalCheckError
from .npv import CashFlowMatrix, ProjectEnsemble, unit_returns

__all__ = [
    "UnitReturnStats",
    "h_stats",
    "Allocation",
    "solve_allocation",
    "oracle_allocation",
    "portfolio_objective",
    "max_npv_per_project",
    "feasibility_residuals",
]

# Tolerances for the iterative oracle; far below every acceptance tolerance.
_KKT_TOL = 1e-10
_MULTIPLIER_TOL = 1e-12
_MAX_ITER = 100_000


@dataclass(frozen=True)
class UnitReturnStats:
    """Population-convention (divisor N) mean and variance of unit returns."""

    h: np.ndarray
    mean: float
    var: float


def h_stats(h) -> UnitReturnStats:
    """Compute population mean and variance of a unit-return vector.

    Divisor is N, not N - 1: these are plain averages over projects.
    Sums are compensated so the statistics stay exact to the last few ulps
    even for very large portfolios.
    """
    arr = np.asarray(h, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("unit-return vector must be non-empty and 1-D")
    if not np.all(np.isfinite(arr)):
        raise ValueError("unit-return vector contains non-finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    n = arr.size
    mean = math.fsum(arr) / n
    var = math.fsum((arr - mean) ** 2) / n
    return UnitReturnStats(h=arr, mean=mean, var=var)


@dataclass(frozen=True)
class Allocation:
    """An investment vector together with its Lagrange parameters.

    ``k`` multiplies the budget constraint and ``theta`` the concentration
    constraint; ``binding`` records whether ``sum(w**2) = N tau`` at the
    optimum. The multipliers are meaningful KKT data only on non-degenerate
    instances (``var(h) > 0`` and ``tau > m**2``); both degenerate cases
    report ``theta = 0`` and the uniform allocation.
    """

    w: np.ndarray
    k: float
    theta: float
    binding: bool


def feasibility_residuals(w, market: MarketSpec) -> tuple[float, float]:
    """Relative budget and concentration residuals of an investment vector.

    Returns ``(|sum(w) - N m| / (N m), max(0, sum(w^2) - N tau) / (N tau))``.
    """
    w = np.asarray(w, dtype=float)
    n = w.size
    budget = abs(math.fsum(w) - n * market.m) / (n * market.m)
    concentration = max(0.0, math.fsum(w * w) - n * market.tau) / (n * market.tau)
    return budget, concentration


def _checked(alloc: Allocation, market: MarketSpec) -> Allocation:
    """Enforce the feasibility invariants on every solver output."""
    n = alloc.w.size
    budget = math.fsum(alloc.w)
    if abs(budget - n * market.m) > 1e-9 * n * market.m:
        raise InternalCheckError(f"budget violated: sum(w) = {budget!r}, N m = {n * market.m!r}")
    sq = math.fsum(alloc.w * alloc.w)
    cap = n * market.tau
    if sq > cap * (1.0 + 1e-9):
        raise InternalCheckError(f"concentration cap violated: sum(w^2) = {sq!r} > {cap!r}")
    if alloc.binding and abs(sq - cap) > 1e-9 * cap:
        raise InternalCheckError(f"cap flagged binding but sum(w^2) = {sq!r} != {cap!r}")
    if not alloc.theta >= 0.0:
        raise InternalCheckError(f"negative concentration multiplier {alloc.theta!r}")
    return alloc


def solve_allocation(stats: UnitReturnStats, market: MarketSpec) -> Allocation:
    """Closed-form maximizer of the mean NPV per project.

    Degenerate cases: when ``tau = m**2`` the feasible set is the single
    point ``w = m``; when the unit returns are all equal every feasible
    point is optimal and the minimum-norm point ``w = m`` is returned with
    ``binding=False`` so the two cases stay distinguishable.
    """
    n = stats.h.size
    m = market.m
    excess = market.tau - m * m
    if excess <= 0.0:
        # Single feasible point; multipliers are undefined (the constraint
        # gradients are collinear), reported as theta = 0 by convention.
        return _checked(
            Allocation(w=np.full(n, m), k=-stats.mean, theta=0.0, binding=True), market
        )
    # Scrub the rounding residue of the mean out of the deviations: the
    # tilt below amplifies any leftover by sqrt(excess / var), which would
    # breach the budget invariant when |mean| dwarfs the spread.
    dev = stats.h - stats.mean
    dev = dev - math.fsum(dev) / n
    var = math.fsum(dev * dev) / n
    if var <= 0.0:
        alloc = Allocation(w=np.full(n, m), k=-stats.mean, theta=0.0, binding=False)
    else:
        theta = math.sqrt(var / excess)
        k = theta * m - stats.mean
        w = m + math.sqrt(excess) * dev / math.sqrt(var)
        alloc = Allocation(w=w, k=k, theta=theta, binding=True)
    return _checked(alloc, market)


def portfolio_objective(w, h) -> float:
    """Average realized NPV per project, ``mean(w * h)``."""
    w = np.asarray(w, dtype=float)
    h = np.asarray(h, dtype=float)
    if w.shape != h.shape:
        raise ValueError(f"shape mismatch: w {w.shape} vs h {h.shape}")
    return math.fsum(w * h) / w.size


def max_npv_per_project(
    ensemble: ProjectEnsemble, X: CashFlowMatrix, market: MarketSpec
) -> float:
    """Best attainable portfolio NPV per project for one noise realization.

    Equals ``m * mean(h) + sqrt(tau - m^2) * sqrt(var(h))`` with the
    empirical (divisor N) statistics of the realized unit returns.
    """
    stats = h_stats(unit_returns(ensemble, X, market))
    excess = market.tau - market.m * market.m
    if excess <= 0.0 or stats.var <= 0.0:
        return market.m * stats.mean
    return market.m * stats.mean + math.sqrt(excess) * math.sqrt(stats.var)


def _project_feasible(y: np.ndarray, n: int, m: float, tau: float) -> np.ndarray:
    """Euclidean projection onto the budget hyperplane and concentration ball.

    Projects onto the hyperplane first; if the ball is violated the point
    is pulled toward the uniform allocation as ``m + dev / (1 + theta)``,
    with the ball multiplier ``theta`` found by bisection (the squared norm
    is strictly decreasing in ``theta``).
    """
    dev = y - math.fsum(y) / n
    w = m + dev
    cap = n * tau
    if float(np.dot(w, w)) <= cap:
        return w

    def excess_norm(theta: float) -> float:
        u = m + dev / (1.0 + theta)
        return float(np.dot(u, u)) - cap

    lo, hi = 0.0, 1.0
    while excess_norm(hi) > 0.0:
        lo = hi
        hi *= 2.0
    while hi - lo > _MULTIPLIER_TOL:
        mid = 0.5 * (lo + hi)
        if excess_norm(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    # The upper endpoint is on the feasible side of the cap.
    return m + dev / (1.0 + hi)


def _fit_multipliers(h: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    """Least-squares (theta, k) for the stationarity system h - theta w + k = 0."""
    n = h.size
    w_mean = float(np.mean(w))
    h_mean = float(np.mean(h))
    sww = float(np.dot(w - w_mean, w - w_mean))
    if sww <= 0.0:
        return 0.0, -h_mean
    swh = float(np.dot(w - w_mean, h - h_mean))
    theta = max(swh / sww, 0.0)
    k = theta * w_mean - h_mean
    return theta, k


def oracle_allocation(h, market: MarketSpec, *, max_iter: int = _MAX_ITER) -> Allocation:
    """Maximize the mean NPV per project without using the closed form.

    Projected gradient ascent: each step moves along the unit returns and
    projects back onto the feasible set (hyperplane projection, then
    scaling into the ball via bisection on the ball multiplier). The loop
    stops once the KKT stationarity residual ``max|h - theta w + k|``
    drops below 1e-10. On this problem the iteration contracts linearly,
    so the cap is generous; hitting it raises :class:`ConvergenceError`.
    """
    arr = np.asarray(h, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("unit-return vector must be non-empty and 1-D")
    if not np.all(np.isfinite(arr)):
        raise ValueError("unit-return vector contains non-finite entries")
    n = arr.size
    m = market.m
    tau = market.tau
    excess = tau - m * m
    mean = math.fsum(arr) / n

    if excess <= 0.0:
        return _checked(
            Allocation(w=np.full(n, m), k=-mean, theta=0.0, binding=True), market
        )
    dev = arr - mean
    tangent = math.sqrt(float(np.dot(dev, dev)))
    if tangent == 0.0:
        return _checked(
            Allocation(w=np.full(n, m), k=-mean, theta=0.0, binding=False), market
        )

    # Ascend along the centered unit direction: the hyperplane projection
    # would cancel the mean component of h anyway, and normalizing keeps
    # the step finite for any input scale. The step is long enough that
    # each projection contracts the angle to the optimal direction by
    # roughly an order of magnitude.
    direction = dev / tangent
    gain = 8.0 * math.sqrt(n * excess)
    # 1e-10 absolute for unit-scale returns, relative beyond that (the
    # stationarity residual cannot beat float noise of order |h| * eps).
    tol = _KKT_TOL * max(1.0, float(np.max(np.abs(arr))))
    w = np.full(n, m)
    for _ in range(max_iter):
        w = _project_feasible(w + gain * direction, n, m, tau)
        theta, k = _fit_multipliers(arr, w)
        residual = float(np.max(np.abs(arr - theta * w + k)))
        if residual < tol:
            binding = math.fsum(w * w) >= n * tau * (1.0 - 1e-10)
            return _checked(Allocation(w=w, k=k, theta=theta, binding=binding), market)
    raise ConvergenceError(
        f"projected ascent did not reach KKT residual {tol:.3e} in {max_iter} iterations"
    )
