"""Estimate the prior from d-sample tasks with the minimum-distance
selection over the 8-member parity family, watch the risk fall with the
number of tasks, and compare against the direct-access baseline.

Run:  python demos/03_skeleton_rates.py
"""

import numpy as np

from priorlab import ExperimentConfig, fit_rate_exponent, run_upper_experiment
from priorlab.ratelab import run_baseline_comparison

config = ExperimentConfig(
    m=3, d=2, L=1.0, alpha=1.0, family="parity",
    T_grid=(100, 300, 1000, 3000, 10000), replicates=100, seed=1,
)
res = run_upper_experiment(config)
print("worst-case risk over the sampled truth set:")
for T, mean, se in res.curve.points:
    bar = "#" * int(200 * mean)
    print(f"  T={T:6d}  {mean:.4f} +- {se:.4f}  {bar}")

print(f"\nfitted log-log slope: {res.curve.fitted_slope:.3f} (R^2 {res.curve.fit_r2:.3f})")
print(f"theory upper exponent (d=2, a=1): -{res.curve.theory_upper_exponent:.4f}")
print(f"theory lower exponent (d=2, a=1): -{res.curve.theory_lower_exponent:.4f}")
print("(at desk scale the fitted slope sits between the asymptotic exponents;")
print(" constants and log factors dominate, so only the sign is asserted)")

base = run_baseline_comparison(config, T=1000)
print(
    f"\nbaseline at T=1000: direct-access risk {base.direct_mean:.4f} "
    f"vs skeleton risk {base.skeleton_mean:.4f}"
)
print("seeing the concepts themselves beats seeing d labeled samples, as it must.")
