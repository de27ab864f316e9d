"""Realized NPVs: one project, one noise world, and the h decomposition.

Each project's NPV factors exactly as (invested amount) x (unit return h),
so the whole portfolio's NPV is a dot product w . h. Everything downstream
optimizes that dot product.
"""

import numpy as np

from npvmax import (
    CashFlowMatrix,
    MarketSpec,
    ProjectEnsemble,
    npv_single,
    realized_unit_return,
    sample_noise,
    total_npv,
    unit_returns,
)

market = MarketSpec.from_normalized(r=0.05, T=10, m=1.0, tau_norm=3.0)

# One project: coupon 30% of the investment per period, 90% recovered at T.
c, lam = 0.3, 0.9
quiet = np.zeros(10)  # no cash-flow noise
print(f"unit return, zero noise: h = {realized_unit_return(c, lam, quiet, market):+.6f}")

# Noise moves h around its deterministic value.
rng = np.random.default_rng(0)
for _ in range(3):
    x = rng.normal(0.0, 1.0, 10)
    print(f"unit return, noisy     : h = {realized_unit_return(c, lam, x, market):+.6f}")

# NPV is exactly linear in the invested amount.
x = rng.normal(0.0, 1.0, 10)
for w in (0.5, 1.0, 2.0):
    print(f"npv_single(w={w:3.1f}) = {npv_single(w, c, lam, x, market):+.6f}")

# A small portfolio: five projects, one sampled noise world.
ensemble = ProjectEnsemble(
    c=[0.25, 0.30, 0.20, 0.35, 0.28],
    lam=[0.9, 0.7, 1.1, 0.5, 0.8],
    v=[1.0, 1.0, 1.0, 1.0, 1.0],
)
noise = sample_noise(ensemble, 10, "gaussian", seed=42)
h = unit_returns(ensemble, noise, market)
w = np.full(5, market.m)

print(f"\nper-unit returns h   = {np.round(h, 4)}")
print(f"portfolio NPV (w=m)  = {total_npv(w, ensemble, noise, market):+.6f}")
print(f"same via dot product = {float(w @ h):+.6f}")

# The zero-noise world reduces to plain discounted-cash-flow arithmetic.
flat = CashFlowMatrix.zeros(5, 10)
print(f"zero-noise NPV (w=m) = {total_npv(w, ensemble, flat, market):+.6f}")
