"""Discount-factor algebra: the three quantities everything else is built on.

A project pays a coupon stream for T periods and returns a fraction of the
investment at maturity. Pricing it needs the annuity factor A1, its
squared-discount counterpart A2, and the terminal discount (1+r)^-T.
"""

import numpy as np

from npvmax import DiscountFactors, MarketSpec, annuity_factor, squared_annuity_factor

# A market: 5% per period, 10 periods, unit budget, concentration cap 3.
market = MarketSpec.from_normalized(r=0.05, T=10, m=1.0, tau_norm=3.0)
factors = DiscountFactors.from_market(market)

print(f"A1       = {factors.a1:.10f}   (present value of 1 per period)")
print(f"A2       = {factors.a2:.10f}   (same with squared discounting)")
print(f"terminal = {factors.terminal:.10f}   ((1+r)^-T)")

# The closed forms agree with term-by-term summation to machine precision.
direct_a1 = sum(1.05**-t for t in range(1, 11))
print(f"\nclosed form vs direct sum: {factors.a1 - direct_a1:+.2e}")

# Both annuity factors shrink as the rate climbs; A2 always sits below A1.
print("\n   r      A1        A2")
for r in (0.01, 0.05, 0.1, 0.3, 1.0):
    print(f"  {r:4.2f}  {annuity_factor(r, 10):8.4f}  {squared_annuity_factor(r, 10):8.4f}")

# The r -> 0 limit is just T; a tiny rate reproduces it.
print(f"\nannuity_factor(1e-9, 7) = {annuity_factor(1e-9, 7):.9f}  (limit is 7)")

# Normalized concentration: tau' = tau / m^2 measures how unequal the
# allocation may get; tau' = 1 forces the uniform portfolio.
print(f"\ntau' = {market.tau_norm}  (cap on mean squared investment, per budget^2)")
