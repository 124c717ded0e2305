"""Core types and primitives for L1-penalized covariance estimation.

The estimation target is a dense symmetric positive definite covariance
matrix ``sigma`` minimizing

    log det(sigma) + tr(S sigma^{-1}) + sum_ij P_ij |sigma_ij|

where ``S`` is the sample covariance of the data and ``P`` is an
element-wise penalty (a common scalar ``rho`` in the simplest case).
The L1 term runs over *all* entries, so every off-diagonal magnitude is
counted twice and the diagonal once.

Matrices are plain ``numpy`` arrays throughout; the helpers here enforce
the symmetry/positive-definiteness contracts the solvers rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """A matrix required to be (or stay) positive definite is not."""


class DegenerateColumnError(RuntimeError):
    """A column update produced a zero residual variance, which would
    drive the updated diagonal entry to zero and destroy positive
    definiteness.  Signals a rank-deficient sample covariance column."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


SYMMETRY_TOL = 1e-8


def as_covariance(m, name="matrix", tol=SYMMETRY_TOL):
    """Validate a square symmetric matrix and return an exactly
    symmetric float64 copy.

    Symmetry is accepted up to ``tol`` in max-abs deviation and then
    enforced exactly by averaging with the transpose.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.max(np.abs(a - a.T), initial=0.0) > tol:
        raise ValueError(f"{name} is not symmetric within {tol:g}")
    return (a + a.T) / 2.0


def cholesky_or_raise(m, name="matrix"):
    """Lower Cholesky factor of ``m``, or NotPositiveDefiniteError."""
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"{name} is not positive definite") from exc


def is_positive_definite(m):
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


def logdet_cholesky(m, name="matrix"):
    """log det of a positive definite matrix via its Cholesky factor."""
    chol = cholesky_or_raise(m, name=name)
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def sample_covariance(y, center=False):
    """Sample covariance ``S = Y'Y / n`` of an ``n x p`` data matrix.

    No mean-centering is applied by default; pass ``center=True`` to
    subtract column means first (the divisor stays ``n``).
    """
    a = np.asarray(y, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"data matrix must be n x p with n, p >= 1, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("data matrix contains non-finite entries")
    if center:
        a = a - a.mean(axis=0)
    s = a.T @ a / a.shape[0]
    return (s + s.T) / 2.0


def normalize_penalty(penalty, p):
    """Expand a penalty spec to a full symmetric nonnegative p x p matrix.

    Accepts a scalar ``rho >= 0`` (applied to every entry) or a
    symmetric matrix of element-wise penalties.
    """
    arr = np.asarray(penalty, dtype=float)
    if arr.ndim == 0:
        rho = float(arr)
        if not np.isfinite(rho) or rho < 0:
            raise ValueError(f"penalty must be >= 0, got {rho}")
        return np.full((p, p), rho)
    mat = as_covariance(arr, name="penalty matrix")
    if mat.shape[0] != p:
        raise ValueError(f"penalty matrix is {mat.shape[0]}x{mat.shape[0]}, expected {p}x{p}")
    if np.any(mat < 0):
        raise ValueError("penalty matrix has negative entries")
    return mat


def objective(sigma, s, penalty):
    """Penalized negative-log-likelihood objective.

    ``log det(sigma) + tr(S sigma^{-1}) + sum_ij P_ij |sigma_ij|``,
    with the L1 sum over all i, j (off-diagonals counted twice).

    Raises NotPositiveDefiniteError if ``sigma`` fails Cholesky.
    """
    sigma = np.asarray(sigma, dtype=float)
    s = np.asarray(s, dtype=float)
    if sigma.shape != s.shape:
        raise ValueError(f"shape mismatch: sigma {sigma.shape} vs s {s.shape}")
    p = sigma.shape[0]
    pen = normalize_penalty(penalty, p)
    chol = cholesky_or_raise(sigma, name="sigma")
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    # tr(S sigma^{-1}) = sum of elementwise product of S and sigma^{-1}
    inv = scipy.linalg.cho_solve((chol, True), np.eye(p), check_finite=False)
    trace_term = float(np.sum(s * inv))
    l1_term = float(np.sum(pen * np.abs(sigma)))
    return logdet + trace_term + l1_term


def soft_threshold(x, t):
    """Soft-threshold operator ``sign(x) * max(|x| - t, 0)``."""
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def offdiag_nonzero_fraction(sigma, threshold=0.0):
    """Fraction of off-diagonal entries with ``|sigma_ij| > threshold``.

    ``threshold=0.0`` counts exact zeros only (coordinate descent
    output); a positive threshold suits solvers whose iterates shrink
    toward but never reach zero.
    """
    a = np.asarray(sigma, dtype=float)
    p = a.shape[0]
    if p < 2:
        return 0.0
    off = ~np.eye(p, dtype=bool)
    return float(np.count_nonzero(np.abs(a[off]) > threshold)) / (p * (p - 1))


@dataclass(frozen=True)
class ColumnPartition:
    """Blocks of a symmetric matrix (and optionally a companion matrix)
    with one column/row permuted to the last position.

    ``sigma11`` is the (p-1)x(p-1) block over the remaining variables,
    ``sigma12`` the length p-1 cross block, ``sigma22`` the pivot's
    diagonal entry; ``s11/s12/s22`` mirror these for the companion
    matrix when present.  ``rest`` lists the retained indices in order.
    """

    sigma11: np.ndarray
    sigma12: np.ndarray
    sigma22: float
    s11: np.ndarray | None
    s12: np.ndarray | None
    s22: float | None
    pivot: int
    rest: np.ndarray

    @property
    def dim(self):
        return self.sigma11.shape[0] + 1


def partition_column(sigma, i, s=None):
    """Partition ``sigma`` (and optionally ``s``) around column ``i``.

    Column/row ``i`` is moved to the last position; blocks are copies,
    so reassembly is exact.  Requires p >= 2.
    """
    sigma = np.asarray(sigma, dtype=float)
    p = sigma.shape[0]
    if p < 2:
        raise ValueError("cannot partition a 1x1 matrix")
    if not 0 <= i < p:
        raise ValueError(f"column index {i} out of range for p={p}")
    rest = np.concatenate([np.arange(i), np.arange(i + 1, p)])
    s11 = s12 = s22 = None
    if s is not None:
        s = np.asarray(s, dtype=float)
        if s.shape != sigma.shape:
            raise ValueError(f"shape mismatch: sigma {sigma.shape} vs s {s.shape}")
        s11 = s[np.ix_(rest, rest)]
        s12 = s[rest, i].copy()
        s22 = float(s[i, i])
    return ColumnPartition(
        sigma11=sigma[np.ix_(rest, rest)],
        sigma12=sigma[rest, i].copy(),
        sigma22=float(sigma[i, i]),
        s11=s11,
        s12=s12,
        s22=s22,
        pivot=int(i),
        rest=rest,
    )


def reassemble(part):
    """Invert :func:`partition_column` for the sigma-side blocks."""
    p = part.dim
    out = np.empty((p, p))
    out[np.ix_(part.rest, part.rest)] = part.sigma11
    out[part.rest, part.pivot] = part.sigma12
    out[part.pivot, part.rest] = part.sigma12
    out[part.pivot, part.pivot] = part.sigma22
    return out


def schur_complement(part):
    """Schur complement of the pivot entry:
    ``sigma22 - sigma12' sigma11^{-1} sigma12``.

    Positive exactly when the full matrix is positive definite given a
    positive definite ``sigma11``.
    """
    chol = cholesky_or_raise(part.sigma11, name="sigma11")
    w = scipy.linalg.cho_solve((chol, True), part.sigma12, check_finite=False)
    return float(part.sigma22 - part.sigma12 @ w)


@dataclass(frozen=True)
class ColumnReparam:
    """A column in (off-diagonal block, Schur complement) coordinates."""

    offdiag: np.ndarray
    schur: float


def reparameterize(part):
    return ColumnReparam(offdiag=part.sigma12.copy(), schur=schur_complement(part))


def block_inverse(sigma11, offdiag, schur):
    """Inverse of the full matrix assembled from ``(sigma11, offdiag,
    schur)``, in rest-then-pivot ordering.

    Uses the block inversion identity: with ``K = sigma11^{-1}`` and
    ``w = K @ offdiag``, the inverse is
    ``[[K + w w'/schur, -w/schur], [-w'/schur, 1/schur]]``.
    """
    if schur <= 0:
        raise NotPositiveDefiniteError("Schur complement must be positive")
    sigma11 = np.asarray(sigma11, dtype=float)
    chol = cholesky_or_raise(sigma11, name="sigma11")
    k = scipy.linalg.cho_solve((chol, True), np.eye(sigma11.shape[0]), check_finite=False)
    w = k @ np.asarray(offdiag, dtype=float)
    p = sigma11.shape[0] + 1
    out = np.empty((p, p))
    out[:-1, :-1] = k + np.outer(w, w) / schur
    out[:-1, -1] = -w / schur
    out[-1, :-1] = -w / schur
    out[-1, -1] = 1.0 / schur
    return (out + out.T) / 2.0


INIT_CHOICES = ("sample", "full", "diag", "diag_eps", "custom")


@dataclass
class SolverConfig:
    """Shared solver knobs.

    ``outer_tol`` stops the outer loop once the objective changes by
    less than this between sweeps.  ``init`` selects the starting
    matrix: "sample"/"full" for the sample covariance itself, "diag"
    for its diagonal, "diag_eps" for the diagonal plus ``init_eps`` on
    every entry, "custom" for ``init_matrix``.  ``ecm_scale_floor``
    bounds the latent-scale magnitudes away from zero inside the ECM
    updates; ``zero_report_threshold`` is the magnitude below which an
    off-diagonal entry counts as zero in sparsity summaries.
    """

    outer_tol: float = 1e-3
    inner_tol: float = 1e-6
    max_outer_iters: int = 500
    max_inner_iters: int = 10_000
    init: str = "sample"
    init_eps: float = 1e-3
    init_matrix: np.ndarray | None = None
    ecm_scale_floor: float = 1e-12
    zero_report_threshold: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        for name in ("outer_tol", "inner_tol", "init_eps", "ecm_scale_floor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.zero_report_threshold < 0:
            raise ValueError("zero_report_threshold must be >= 0")
        for name in ("max_outer_iters", "max_inner_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.init not in INIT_CHOICES:
            raise ValueError(f"init must be one of {INIT_CHOICES}, got {self.init!r}")
        if self.init == "custom" and self.init_matrix is None:
            raise ValueError("init='custom' requires init_matrix")


@dataclass
class SolverResult:
    """Outcome of one solve: the estimate plus convergence diagnostics.

    ``objective_trace`` holds the objective at the starting point and
    after each outer sweep; ``nonzero_fraction`` counts off-diagonal
    entries above the configured zero-report threshold.
    """

    sigma_hat: np.ndarray
    objective_trace: list = field(default_factory=list)
    converged: bool = False
    outer_iters: int = 0
    wall_time: float = 0.0
    nonzero_fraction: float = 0.0


def initial_sigma(s, config, require_nonzero_offdiag=False):
    """Build the starting matrix for a solve according to the config.

    With ``require_nonzero_offdiag`` (the ECM constraint), a "diag"
    request is promoted to "diag_eps" so the start has no exact zero
    off-diagonals, and a custom start containing exact zero
    off-diagonals is rejected.
    """
    p = s.shape[0]
    init = config.init
    if require_nonzero_offdiag and init == "diag" and p > 1:
        init = "diag_eps"
    if init in ("sample", "full"):
        start = s.copy()
    elif init == "diag":
        start = np.diag(np.diag(s)).copy()
    elif init == "diag_eps":
        # diagonal of S plus a constant on every entry; the all-ones
        # matrix is PSD, so positive definiteness is preserved
        start = np.diag(np.diag(s)) + config.init_eps
    elif init == "custom":
        start = as_covariance(config.init_matrix, name="init_matrix")
        if start.shape[0] != p:
            raise ValueError(f"init_matrix is {start.shape[0]}x{start.shape[0]}, expected {p}x{p}")
    else:  # pragma: no cover - guarded by SolverConfig validation
        raise ValueError(f"unknown init {init!r}")
    if require_nonzero_offdiag and p > 1:
        off = ~np.eye(p, dtype=bool)
        if np.any(start[off] == 0.0):
            raise ValueError(
                "ECM requires a starting matrix with no exact zero off-diagonal "
                "entries (zero entries make the latent-scale weights infinite and "
                "the iteration cannot leave them); use init='diag_eps' or a custom "
                "start without zeros"
            )
    if not is_positive_definite(start):
        raise ValueError(f"initialization {init!r} is not positive definite")
    return start
