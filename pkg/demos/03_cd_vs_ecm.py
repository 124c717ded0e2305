#!/usr/bin/env python3
"""The two solvers side by side: coordinate descent produces exact
zeros and slightly lower objectives; ECM takes closed-form steps and
shrinks entries toward zero without ever reaching it."""

import numpy as np

from covlasso import (
    ModelSpec,
    SolverConfig,
    generate_dataset,
    sample_covariance,
    solve_cd,
    solve_ecm,
)

y, _ = generate_dataset(ModelSpec("dense", p=30, n=60, seed=5))
s = sample_covariance(y)
cfg = SolverConfig(outer_tol=1e-6)

print(f"{'rho':>6} {'g_cd':>10} {'g_ecm':>10} {'g_cd-g_ecm':>11} "
      f"{'nz_cd':>7} {'nz_ecm':>7} {'it_cd':>6} {'it_ecm':>7}")
for rho in (0.02, 0.1, 0.3, 1.0):
    cd = solve_cd(s, rho, cfg)
    ecm = solve_ecm(s, rho, cfg)
    g_cd, g_ecm = cd.objective_trace[-1], ecm.objective_trace[-1]
    print(f"{rho:6.2f} {g_cd:10.4f} {g_ecm:10.4f} {g_cd - g_ecm:11.2e} "
          f"{cd.nonzero_fraction:7.3f} {ecm.nonzero_fraction:7.3f} "
          f"{cd.outer_iters:6d} {ecm.outer_iters:7d}")

# a negative difference means coordinate descent found the better point
cd = solve_cd(s, 0.3, cfg)
ecm = solve_ecm(s, 0.3, cfg)
off = ~np.eye(30, dtype=bool)
print("\nat rho=0.3:")
print("  cd off-diagonal entries exactly zero:",
      int(np.count_nonzero(cd.sigma_hat[off] == 0.0)), "of", off.sum())
print("  ecm off-diagonal entries exactly zero:",
      int(np.count_nonzero(ecm.sigma_hat[off] == 0.0)),
      "(sparsity is reported against a 1e-4 threshold instead)")
print("  smallest |ecm off-diagonal|:", f"{np.abs(ecm.sigma_hat[off]).min():.2e}")

# ECM needs a start without exact zero off-diagonals; a diagonal start
# is promoted by adding 1e-3 everywhere
ecm_diag = solve_ecm(s, 0.3, SolverConfig(outer_tol=1e-6, init="diag"))
print("\necm from the (promoted) diagonal start:",
      f"g={ecm_diag.objective_trace[-1]:.4f}, nz={ecm_diag.nonzero_fraction:.3f}")
