"""Sparse covariance estimation with an element-wise L1 penalty.

Two solvers minimize ``log det(sigma) + tr(S sigma^{-1}) + rho ||sigma||_1``
over positive definite matrices: block coordinate descent (exact zeros,
lowest objectives) and an ECM iteration (closed-form steps, entries
shrink toward zero without reaching it).  Companion modules provide
synthetic test models, brute-force verification oracles, and a
benchmark harness with CSV reports.
"""

from .cd import (
    LassoSubproblem,
    build_lasso_subproblem,
    lasso_coordinate_descent,
    residual_variance,
    solve_cd,
    solve_cd_path,
    variance_update,
)
from .core import (
    ColumnPartition,
    ColumnReparam,
    DegenerateColumnError,
    NotPositiveDefiniteError,
    SolverConfig,
    SolverResult,
    block_inverse,
    objective,
    offdiag_nonzero_fraction,
    partition_column,
    reassemble,
    reparameterize,
    sample_covariance,
    schur_complement,
    soft_threshold,
)
from .cd import column_update as cd_column_update
from .ecm import cm_criterion, e_step_weights, ridge_update, solve_ecm
from .ecm import column_update as ecm_column_update
from .matrixio import read_matrix, write_matrix
from .oracle import (
    OracleReport,
    brute_force_minimize,
    check_stationarity,
    golden_section,
    oracle_variance_update,
)
from .synthetic import (
    ModelSpec,
    condition_number,
    generate_dataset,
    load_dataset,
    make_dense_sigma,
    make_sparse_sigma,
    sample_mvn,
    save_dataset,
    sparse_model_delta,
)

__version__ = "0.1.0"

__all__ = [
    "ColumnPartition",
    "ColumnReparam",
    "DegenerateColumnError",
    "LassoSubproblem",
    "ModelSpec",
    "NotPositiveDefiniteError",
    "OracleReport",
    "SolverConfig",
    "SolverResult",
    "block_inverse",
    "brute_force_minimize",
    "build_lasso_subproblem",
    "check_stationarity",
    "cd_column_update",
    "cm_criterion",
    "condition_number",
    "ecm_column_update",
    "e_step_weights",
    "generate_dataset",
    "golden_section",
    "lasso_coordinate_descent",
    "load_dataset",
    "make_dense_sigma",
    "make_sparse_sigma",
    "objective",
    "offdiag_nonzero_fraction",
    "oracle_variance_update",
    "partition_column",
    "read_matrix",
    "reassemble",
    "reparameterize",
    "residual_variance",
    "ridge_update",
    "sample_covariance",
    "sample_mvn",
    "save_dataset",
    "schur_complement",
    "soft_threshold",
    "solve_cd",
    "solve_cd_path",
    "solve_ecm",
    "sparse_model_delta",
    "variance_update",
    "write_matrix",
]
