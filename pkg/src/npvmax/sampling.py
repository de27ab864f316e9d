"""Reproducible random generation of ensembles and cash-flow noise.

All randomness comes from counter-mode Philox streams keyed by
``(purpose, seed)``. Ensembles and noise drawn from the same seed never
share bits because their purposes differ, and every noise entry has a
fixed counter address derived from its ``(project, period)`` position, so
generation order, chunking, or parallel evaluation cannot change a single
value.

Distribution choices: coupon rates use the two-gamma-ratio construction
of the beta law; attenuation rates use the exponential inverse CDF; the
noise families are derived from open-interval lattice uniforms (the
gaussian family via the exact inverse normal CDF), all with mean 0 and
variance ``v`` per entry.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .asymptotic import MomentSet
from .errors import EnsembleFormatError
from .npv import CashFlowMatrix, ProjectEnsemble

__all__ = [
    "NOISE_FAMILIES",
    "ParamDistributions",
    "analytic_moments",
    "sample_ensemble",
    "sample_noise",
    "write_ensemble_csv",
    "read_ensemble_csv",
]

NOISE_FAMILIES = ("gaussian", "uniform", "rademacher")

_ENSEMBLE_STREAM = 1
_NOISE_STREAM = 2

_ENSEMBLE_CSV_HEADER = "c,lambda,v"


@dataclass(frozen=True)
class ParamDistributions:
    """Sampling law for project parameters.

    Coupon rates are beta distributed with shape parameters
    ``(alpha, beta)`` on (0, 1); attenuation rates are exponential with
    mean ``gamma``; every project receives the same noise variance ``v``.
    ``noise_family`` picks the shape of the mean-zero cash-flow noise.
    """

    alpha: float
    beta: float
    gamma: float
    v: float = 1.0
    noise_family: str = "gaussian"

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be finite and positive, got {val!r}")
        if not (isinstance(self.v, (int, float)) and math.isfinite(self.v) and self.v >= 0):
            raise ValueError(f"noise variance must be finite and non-negative, got {self.v!r}")
        if self.noise_family not in NOISE_FAMILIES:
            raise ValueError(
                f"unknown noise family {self.noise_family!r}; choose from {NOISE_FAMILIES}"
            )


def _check_seed(seed) -> int:
    try:
        seed = operator.index(seed)
    except TypeError:
        raise ValueError(f"seed must be an integer, got {seed!r}") from None
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def _stream(purpose: int, seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(purpose << 64) | seed))


def _lattice_uniforms(purpose: int, seed: int, count: int) -> np.ndarray:
    """Uniform draws on the open interval (0, 1), one 64-bit word each.

    Value p of the returned array is a fixed function of (purpose, seed, p):
    word p of the keyed Philox counter stream, mapped to the half-offset
    lattice (k + 1/2) * 2^-53. The offset keeps both endpoints out so
    inverse-CDF transforms never produce infinities.
    """
    u = _stream(purpose, seed).random(count)
    u += 2.0**-54
    # The single lattice point whose offset rounds up to 1.0:
    np.minimum(u, 1.0 - 2.0**-53, out=u)
    return u


def analytic_moments(dist: ParamDistributions) -> MomentSet:
    """Exact population moments of the parameter distributions.

    Beta raw moments give ``<c> = a/(a+b)`` and
    ``<c^2> = a(a+1)/((a+b)(a+b+1))``; the exponential law has mean and
    standard deviation both ``gamma``. Coupon and attenuation rates are
    drawn independently, so their covariance is zero.
    """
    a, b = dist.alpha, dist.beta
    mean_c = a / (a + b)
    mean_c2 = a * (a + 1.0) / ((a + b) * (a + b + 1.0))
    return MomentSet(
        mean_c=mean_c,
        mean_lambda=dist.gamma,
        mean_c2v=dist.v * mean_c2,
        var_c=mean_c2 - mean_c * mean_c,
        var_lambda=dist.gamma * dist.gamma,
        cov_c_lambda=0.0,
    )


def sample_ensemble(dist: ParamDistributions, n: int, seed: int) -> ProjectEnsemble:
    """Draw an ensemble of ``n`` projects, deterministic under the seed."""
    n = operator.index(n)
    if n < 1:
        raise ValueError(f"ensemble size must be at least 1, got {n}")
    seed = _check_seed(seed)
    gen = _stream(_ENSEMBLE_STREAM, seed)
    g1 = gen.standard_gamma(dist.alpha, n)
    g2 = gen.standard_gamma(dist.beta, n)
    c = g1 / (g1 + g2)
    lam = -dist.gamma * np.log1p(-gen.random(n))
    return ProjectEnsemble(c=c, lam=lam, v=np.full(n, float(dist.v)))


def sample_noise(
    ensemble: ProjectEnsemble, T: int, family: str = "gaussian", seed: int = 0
) -> CashFlowMatrix:
    """Draw the N x T cash-flow noise matrix for one world.

    Entry (i, t) is derived from the 64-bit word at counter position
    ``i * T + t`` of the noise stream for this seed; row i is scaled to
    standard deviation ``sqrt(v_i)``. Identical (ensemble sizes, T,
    family, seed) give bit-identical matrices.
    """
    T = operator.index(T)
    if T < 1:
        raise ValueError(f"maturity must be at least one period, got {T}")
    if family not in NOISE_FAMILIES:
        raise ValueError(f"unknown noise family {family!r}; choose from {NOISE_FAMILIES}")
    seed = _check_seed(seed)
    n = ensemble.n
    u = _lattice_uniforms(_NOISE_STREAM, seed, n * T).reshape(n, T)
    scale = np.sqrt(ensemble.v)[:, None]
    if family == "gaussian":
        x = ndtri(u) * scale
    elif family == "uniform":
        x = (2.0 * u - 1.0) * (math.sqrt(3.0) * scale)
    else:
        x = np.where(u < 0.5, -1.0, 1.0) * scale
    return CashFlowMatrix(x=x)


def write_ensemble_csv(ensemble: ProjectEnsemble, path) -> None:
    """Serialize an ensemble as CSV: header ``c,lambda,v``, one project per row.

    Values are written with full round-trip precision.
    """
    with open(path, "w", newline="") as fh:
        fh.write(_ENSEMBLE_CSV_HEADER + "\n")
        for ci, li, vi in zip(ensemble.c, ensemble.lam, ensemble.v):
            fh.write(f"{float(ci)!r},{float(li)!r},{float(vi)!r}\n")


def read_ensemble_csv(path) -> ProjectEnsemble:
    """Parse an ensemble CSV written by :func:`write_ensemble_csv`.

    Raises :class:`EnsembleFormatError` with the offending line number on
    any malformed content.
    """
    with open(path, "r", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != _ENSEMBLE_CSV_HEADER:
        found = lines[0].strip() if lines else "<empty file>"
        raise EnsembleFormatError(
            f"{path}: line 1: expected header {_ENSEMBLE_CSV_HEADER!r}, found {found!r}"
        )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise EnsembleFormatError(
                f"{path}: line {lineno}: expected 3 comma-separated values, found {len(fields)}"
            )
        try:
            values = [float(field) for field in fields]
        except ValueError:
            raise EnsembleFormatError(
                f"{path}: line {lineno}: non-numeric value in {line!r}"
            ) from None
        if not all(math.isfinite(val) for val in values):
            raise EnsembleFormatError(f"{path}: line {lineno}: non-finite value in {line!r}")
        if any(val < 0.0 for val in values):
            raise EnsembleFormatError(f"{path}: line {lineno}: negative value in {line!r}")
        rows.append(values)
    if not rows:
        raise EnsembleFormatError(f"{path}: line 2: expected at least one project row")
    data = np.asarray(rows, dtype=float)
    return ProjectEnsemble(c=data[:, 0], lam=data[:, 1], v=data[:, 2])
