#!/usr/bin/env python3
"""Coordinate descent along a penalty path: exact zeros appear and the
estimate walks from the sample covariance to a diagonal matrix."""

import numpy as np

from covlasso import ModelSpec, generate_dataset, sample_covariance, solve_cd_path

y, sigma_true = generate_dataset(ModelSpec("sparse", p=20, n=40, seed=1))
s = sample_covariance(y)

rhos = np.geomspace(0.01, 2.0, 8)
results = solve_cd_path(s, rhos)  # each solve warm-starts from the last

true_support = np.abs(sigma_true) > 0
offdiag = ~np.eye(20, dtype=bool)

print("tridiagonal truth, p=20, n=40 (support agreement: fraction of")
print("off-diagonal entries whose zero/nonzero status matches the truth)")
print(f"{'rho':>8} {'objective':>12} {'nonzero frac':>13} {'iters':>6} {'support':>8}")
for rho, res in zip(rhos, results):
    est_support = np.abs(res.sigma_hat) > 0
    agree = (true_support == est_support)[offdiag].mean()
    print(f"{rho:8.3f} {res.objective_trace[-1]:12.4f} "
          f"{res.nonzero_fraction:13.3f} {res.outer_iters:6d} {agree:8.3f}")

# the trace never increases: every column visit is an exact blockwise
# minimization
res = results[3]
trace = np.array(res.objective_trace)
print("\nobjective trace at rho =", round(rhos[3], 3))
print(np.round(trace, 5))
print("max increase between iterations:", f"{np.max(np.diff(trace)):.2e}")
