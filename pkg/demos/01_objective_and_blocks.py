#!/usr/bin/env python3
"""Tour of the core pieces: the penalized objective and the column
blocks both solvers are built from."""

import numpy as np

from covlasso import (
    block_inverse,
    objective,
    partition_column,
    reparameterize,
    sample_covariance,
    schur_complement,
    soft_threshold,
)

rng = np.random.default_rng(0)

# a small dataset and its (uncentered) sample covariance S = Y'Y / n
y = rng.standard_normal((30, 4))
s = sample_covariance(y)
print("sample covariance S:")
print(np.round(s, 3))

# the objective: log det(sigma) + tr(S sigma^{-1}) + rho * ||sigma||_1,
# where the L1 norm runs over every entry (off-diagonals count twice)
for rho in (0.0, 0.1, 0.5):
    print(f"objective at sigma = S, rho={rho}: {objective(s, s, rho):.5f}")

# the penalty can also be an element-wise matrix
pen = np.full((4, 4), 0.1)
pen[0, 1] = pen[1, 0] = 2.0  # hit one entry much harder
print(f"objective with element-wise penalty: {objective(s, s, pen):.5f}")

# both solvers repeatedly carve out one column/row: sigma11 is the
# matrix over the remaining variables, sigma12 the cross block,
# sigma22 the pivot's variance
part = partition_column(s, 2, s)
print("\npartition around column 2:")
print("  sigma11 shape:", part.sigma11.shape)
print("  sigma12:", np.round(part.sigma12, 3))
print("  sigma22:", round(part.sigma22, 3))

# the Schur complement of the pivot is positive exactly when the full
# matrix is positive definite; it is the variance block the solvers
# update in closed form
schur = schur_complement(part)
print("  Schur complement:", round(schur, 4))
print("  det(S)/det(sigma11):", round(np.linalg.det(s) / np.linalg.det(part.sigma11), 4))

# the block inversion identity gives the full inverse from the pieces
rep = reparameterize(part)
inv = block_inverse(part.sigma11, rep.offdiag, rep.schur)
order = np.concatenate([part.rest, [part.pivot]])
err = np.max(np.abs(inv @ s[np.ix_(order, order)] - np.eye(4)))
print("  block-inverse residual ||inv @ S - I||_max:", f"{err:.2e}")

# and the soft-threshold operator that creates exact zeros
xs = np.array([-3.0, -0.5, 0.2, 3.0])
print("\nsoft_threshold(x, 1.0):", soft_threshold(xs, 1.0))
