"""How the estimator variance shrinks as the truncation budget grows.

We estimate 1/m for X ~ N(1, 1) around x0 = 2 and sweep the geometric
parameter p (expected depth (1-p)/p). The product-of-samples estimator keeps a
variance floor no matter how deep the series goes, while averaging over
circular shifts drives the variance towards zero.
"""

from debias.bench import VarianceStudyConfig, run_variance_study

cfg = VarianceStudyConfig(
    seed=7,
    function="reciprocal",
    m=1.0,
    var=1.0,
    x0=2.0,
    p_grid=(0.1, 0.01, 0.001),
    replicates={"simple": 20_000, "cycling": 2000},
)

print(f"{'estimator':>9} {'p':>6} {'E[var|R]':>10} {'bound':>9} {'variance':>9}")
for row in run_variance_study(cfg):
    print(f"{row.estimator:>9} {row.p:>6g} {row.evar:>10.4f} {row.sampling_bound:>9.3f} {row.variance:>9.4f}")

print("\nThe simple rows level off near the closed-form limit "
      f"{row.simple_limit:.3f}; the cycling rows keep falling.")
