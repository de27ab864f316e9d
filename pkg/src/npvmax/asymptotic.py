"""Large-portfolio closed forms for the maximal net present value.

As the number of projects grows, the per-project optimum self-averages:
it concentrates around a deterministic value determined by the population
moments of the project parameters. Two limits matter:

* the quenched value (optimize after the cash-flow noise is realized),
      m * mean(h) + sqrt(tau - m^2) * sqrt(var(h)),
* the annealed bound (optimize the expected NPV before anything is
  realized), which is just ``m * mean(h)``.

Here ``mean(h) = -1 + A1 <c> + <lam> (1+r)^-T`` and
``var(h) = A2 <c^2 v> + V`` with ``V`` the ensemble variance of the
deterministic unit payoff. The quenched value always dominates the
annealed bound; the premium ``sqrt(tau - m^2) sqrt(var(h))`` is what the
expected-value route cannot see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .discounting import DiscountFactors, MarketSpec
from .errors import InternalCheckError, NoRootError
from .npv import ProjectEnsemble

__all__ = [
    "MomentSet",
    "LimitResult",
    "payoff_variance",
    "unit_return_mean",
    "unit_return_variance",
    "max_npv_limit",
    "max_expected_npv_limit",
    "order_parameters",
    "limit_summary",
    "internal_rate",
    "classify_region",
    "REGIONS",
]

REGIONS = ("a", "b", "c")

_RATE_FLOOR = 1e-6
_RATE_CEIL = 1e6
_RATE_TOL = 1e-12
_VALUE_TOL = 1e-10


@dataclass(frozen=True)
class MomentSet:
    """Population moments of the project-parameter distribution.

    ``mean_c2v`` is the mixed moment ``<c^2 v>`` coupling squared coupon
    rates to noise variances. Variances must be non-negative and the
    covariance must satisfy Cauchy-Schwarz.
    """

    mean_c: float
    mean_lambda: float
    mean_c2v: float
    var_c: float = 0.0
    var_lambda: float = 0.0
    cov_c_lambda: float = 0.0

    def __post_init__(self) -> None:
        for name in ("mean_c", "mean_lambda", "mean_c2v", "var_c", "var_lambda", "cov_c_lambda"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.var_c < 0.0 or self.var_lambda < 0.0:
            raise ValueError("variances must be non-negative")
        if self.mean_c2v < 0.0:
            raise ValueError("mean_c2v must be non-negative")
        bound = math.sqrt(self.var_c * self.var_lambda)
        if abs(self.cov_c_lambda) > bound + 1e-12 * max(1.0, bound):
            raise ValueError(
                f"covariance {self.cov_c_lambda!r} violates Cauchy-Schwarz bound {bound!r}"
            )

    @classmethod
    def from_ensemble(cls, ensemble: ProjectEnsemble) -> "MomentSet":
        """Empirical population moments (divisor N) of a sampled ensemble."""
        c = ensemble.c
        lam = ensemble.lam
        n = ensemble.n
        mean_c = math.fsum(c) / n
        mean_lam = math.fsum(lam) / n
        return cls(
            mean_c=mean_c,
            mean_lambda=mean_lam,
            mean_c2v=math.fsum(c * c * ensemble.v) / n,
            var_c=math.fsum((c - mean_c) ** 2) / n,
            var_lambda=math.fsum((lam - mean_lam) ** 2) / n,
            cov_c_lambda=math.fsum((c - mean_c) * (lam - mean_lam)) / n,
        )


def payoff_variance(moments: MomentSet, market: MarketSpec) -> float:
    """Ensemble variance of the deterministic unit payoff ``c A1 + lam (1+r)^-T``.

    Expands to ``A1^2 var(c) + (1+r)^-2T var(lam) + 2 A1 (1+r)^-T cov(c, lam)``;
    clamped at zero against rounding when the covariance term nearly cancels
    the others.
    """
    f = DiscountFactors.from_market(market)
    value = (
        f.a1 * f.a1 * moments.var_c
        + f.terminal * f.terminal * moments.var_lambda
        + 2.0 * f.a1 * f.terminal * moments.cov_c_lambda
    )
    return max(value, 0.0)


def unit_return_mean(moments: MomentSet, market: MarketSpec) -> float:
    """Population mean of the unit return, ``-1 + A1 <c> + <lam> (1+r)^-T``."""
    f = DiscountFactors.from_market(market)
    return -1.0 + f.a1 * moments.mean_c + f.terminal * moments.mean_lambda


def unit_return_variance(moments: MomentSet, market: MarketSpec) -> float:
    """Population variance of the unit return, ``A2 <c^2 v> + V``."""
    f = DiscountFactors.from_market(market)
    return f.a2 * moments.mean_c2v + payoff_variance(moments, market)


def max_npv_limit(moments: MomentSet, market: MarketSpec) -> float:
    """Quenched large-portfolio maximum of the NPV per project.

    ``m * mean(h) + sqrt(tau - m^2) * sqrt(var(h))``; proportional to the
    per-project budget m once the concentration cap is expressed in its
    normalized form tau / m^2.
    """
    excess = market.tau - market.m * market.m
    base = market.m * unit_return_mean(moments, market)
    if excess <= 0.0:
        return base
    return base + math.sqrt(excess) * math.sqrt(unit_return_variance(moments, market))


def max_expected_npv_limit(moments: MomentSet, market: MarketSpec) -> float:
    """Annealed bound: the maximum of the expected NPV per project.

    Averaging first makes all projects exchangeable, so the objective is
    constant on the feasible set and the value is ``m * mean(h)``. It
    depends on neither the noise variances nor the concentration cap.
    """
    return market.m * unit_return_mean(moments, market)


def order_parameters(moments: MomentSet, market: MarketSpec) -> tuple[float, float]:
    """Limiting Lagrange multipliers (theta, k) of the two constraints.

    ``theta = sqrt(var(h) / (tau - m^2))`` and ``k = theta m - mean(h)``,
    matching the finite-N optimizer's multipliers as N grows. Degenerate
    inputs (``tau = m^2`` or ``var(h) = 0``) have no well-defined
    multipliers and raise ``ValueError``.
    """
    excess = market.tau - market.m * market.m
    var_h = unit_return_variance(moments, market)
    if excess <= 0.0 or var_h <= 0.0:
        raise ValueError(
            "order parameters are undefined on degenerate inputs "
            f"(tau - m^2 = {excess!r}, var(h) = {var_h!r})"
        )
    theta = math.sqrt(var_h / excess)
    return theta, theta * market.m - unit_return_mean(moments, market)


@dataclass(frozen=True)
class LimitResult:
    """All large-portfolio quantities for one (moments, market) pair."""

    max_npv: float
    max_expected_npv: float
    theta: float
    k: float
    payoff_var: float
    mean_h: float
    var_h: float


def limit_summary(moments: MomentSet, market: MarketSpec) -> LimitResult:
    """Bundle every closed-form limit quantity in one call.

    On degenerate inputs the multipliers are reported with the same
    ``theta = 0`` convention as the finite-N solver.
    """
    mean_h = unit_return_mean(moments, market)
    var_h = unit_return_variance(moments, market)
    excess = market.tau - market.m * market.m
    if excess > 0.0 and var_h > 0.0:
        theta, k = order_parameters(moments, market)
    else:
        theta, k = 0.0, -mean_h
    quenched = max_npv_limit(moments, market)
    annealed = max_expected_npv_limit(moments, market)
    if quenched < annealed:
        raise InternalCheckError(
            f"quenched value {quenched!r} fell below annealed bound {annealed!r}"
        )
    return LimitResult(
        max_npv=quenched,
        max_expected_npv=annealed,
        theta=theta,
        k=k,
        payoff_var=payoff_variance(moments, market),
        mean_h=mean_h,
        var_h=var_h,
    )


def _limit_fn(kind: str, moments: MomentSet, T: int, tau_norm: float):
    if kind == "quenched":
        fn = max_npv_limit
    elif kind == "annealed":
        fn = max_expected_npv_limit
    else:
        raise ValueError(f"kind must be 'quenched' or 'annealed', got {kind!r}")

    def value(r: float) -> float:
        market = MarketSpec.from_normalized(r=r, T=T, m=1.0, tau_norm=tau_norm)
        return fn(moments, market)

    return value


def internal_rate(
    kind: str,
    moments: MomentSet,
    T: int,
    tau_norm: float,
    bracket_hint: tuple[float, float] | None = None,
) -> float:
    """Rate at which the chosen limit value crosses zero.

    Evaluated per unit budget (m = 1 with the normalized cap), which is
    exact because both limits scale linearly with m. Both values decrease
    in the rate for non-negative parameters, so the root is unique; it is
    bracketed by geometric expansion and polished by bisection to 1e-12 on
    the rate and 1e-10 on the residual value.

    Raises
    ------
    NoRootError
        If the value has no sign change between 1e-6 and 1e6.
    """
    value = _limit_fn(kind, moments, T, tau_norm)

    lo, hi = _RATE_FLOOR, 1.0
    if bracket_hint is not None:
        hint_lo, hint_hi = bracket_hint
        if not (0.0 < hint_lo < hint_hi):
            raise ValueError(f"bracket hint must satisfy 0 < lo < hi, got {bracket_hint!r}")
        if value(hint_lo) > 0.0 >= value(hint_hi):
            lo, hi = hint_lo, hint_hi
    if value(lo) <= 0.0:
        raise NoRootError(f"{kind} value is already non-positive at r = {lo}")
    while value(hi) > 0.0:
        lo = hi
        hi *= 2.0
        if hi > _RATE_CEIL:
            raise NoRootError(f"no sign change of the {kind} value below r = {_RATE_CEIL:g}")

    while hi - lo > _RATE_TOL:
        mid = 0.5 * (lo + hi)
        if value(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    # Keep halving down to the float limit if the residual target is not
    # yet met; with well-scaled moments the first pass already suffices.
    while abs(value(root)) > _VALUE_TOL and hi - lo > 4.0 * math.ulp(hi):
        mid = 0.5 * (lo + hi)
        if value(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        root = 0.5 * (lo + hi)
    if abs(value(root)) > _VALUE_TOL:
        raise InternalCheckError(
            f"bisection stalled: |{kind} value({root!r})| = {abs(value(root)):.3e}"
        )
    return root


def classify_region(r: float, T: int, moments: MomentSet, tau_norm: float) -> str:
    """Sign region of the two limit values at one (r, T) point.

    Returns ``'a'`` when both are positive, ``'b'`` when only the quenched
    maximum is positive, and ``'c'`` when neither is. Exact zeros count as
    non-positive so boundary points land in the more conservative region.
    The fourth sign pattern would contradict the dominance of the quenched
    value and raises :class:`InternalCheckError`.
    """
    market = MarketSpec.from_normalized(r=r, T=T, m=1.0, tau_norm=tau_norm)
    quenched = max_npv_limit(moments, market)
    annealed = max_expected_npv_limit(moments, market)
    if quenched > 0.0 and annealed > 0.0:
        return "a"
    if quenched > 0.0:
        return "b"
    if annealed <= 0.0:
        return "c"
    raise InternalCheckError(
        f"impossible sign pattern: quenched {quenched!r} <= 0 < annealed {annealed!r}"
    )
