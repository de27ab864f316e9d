"""Internal-rate curves: where each limit value crosses zero, by maturity.

For every maturity T there are two break-even interest rates: r_c, where
the quenched maximum hits zero, and the lower r_c_or, where the annealed
(expected-value) bound hits zero. Between them lies the region where the
expected-value analysis says "don't invest" while the realized optimum is
still profitable on average: the two analyses genuinely disagree there.

Writes internal_rate_curves.csv next to this script, and a PNG when
matplotlib is importable.
"""

from pathlib import Path

from npvmax import analytic_moments, classify_region, ParamDistributions
from npvmax.experiments import Figure1Config, internal_rate_curves, render_csv

out_dir = Path(__file__).resolve().parent
dist = ParamDistributions(alpha=2.0, beta=5.0, gamma=0.9, v=1.0)
moments = analytic_moments(dist)

table = internal_rate_curves(Figure1Config(t_max=30))
csv_path = out_dir / "internal_rate_curves.csv"
csv_path.write_text(render_csv(table))
print(f"wrote {csv_path}")

print("\n  T      r_c      r_c_or")
for T, r_q, r_a in table.rows:
    if T in (1, 2, 3, 5, 10, 20, 30):
        print(f" {T:3d}   {r_q:.4f}   {r_a:.4f}")

# Sample a few points against the region classifier: below both curves the
# signs agree (a), between them they disagree (b), above both they agree (c).
print("\n point              region")
for r, T in ((0.10, 10), (0.40, 10), (0.90, 10)):
    region = classify_region(r, T, moments, 3.0)
    print(f" r={r:.2f}, T={T:<3d}      {region}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("\nmatplotlib not installed; skipping the plot")
else:
    maturities = [row[0] for row in table.rows]
    quenched = [row[1] for row in table.rows]
    annealed = [row[2] for row in table.rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(maturities, quenched, "o-", label="$r_c$ (quenched max NPV = 0)")
    ax.plot(maturities, annealed, "s-", label="$r_c^{OR}$ (annealed bound = 0)")
    ax.fill_between(maturities, annealed, quenched, alpha=0.15, label="analyses disagree")
    ax.set_xlabel("maturity T")
    ax.set_ylabel("internal interest rate")
    ax.legend()
    ax.set_title("Break-even rates of the two portfolio analyses")
    fig.tight_layout()
    png_path = out_dir / "internal_rate_curves.png"
    fig.savefig(png_path, dpi=130)
    print(f"\nwrote {png_path}")
