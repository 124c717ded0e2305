"""Block coordinate descent for the penalized covariance objective.

The matrix is updated one column/row at a time.  With the pivot column
written as (off-diagonal block b, Schur complement v), the objective
restricted to that column separates into a one-dimensional penalized
variance problem in v (closed form) and a lasso problem in b (inner
coordinate loop with soft-thresholding).  Both are exact minimizations,
so the objective never increases and every iterate stays positive
definite.
"""

from __future__ import annotations

import dataclasses
import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg.blas import daxpy
from threadpoolctl import threadpool_limits

try:
    from numba import njit as _njit
except ImportError:  # pragma: no cover - exercised only without numba
    _njit = None

from .core import (
    ColumnPartition,
    DegenerateColumnError,
    NotPositiveDefiniteError,
    SolverConfig,
    SolverResult,
    as_covariance,
    cholesky_or_raise,
    initial_sigma,
    normalize_penalty,
    objective,
    offdiag_nonzero_fraction,
)


@dataclass(frozen=True)
class LassoSubproblem:
    """Quadratic-plus-L1 problem ``min b' gram b - 2 lin' b + 2 sum_j
    penalties_j |b_j|`` for one column's off-diagonal block."""

    gram: np.ndarray
    lin: np.ndarray
    penalties: np.ndarray


def _inverse_psd(m, name="sigma11"):
    chol = cholesky_or_raise(m, name=name)
    return scipy.linalg.cho_solve((chol, True), np.eye(m.shape[0]), check_finite=False)


def _drop_index(v, i):
    return np.concatenate([v[:i], v[i + 1:]])


def _drop_cross(m, i):
    """``m`` without row/column ``i``; block copies beat fancy indexing."""
    p = m.shape[0]
    out = np.empty((p - 1, p - 1))
    out[:i, :i] = m[:i, :i]
    out[:i, i:] = m[:i, i + 1:]
    out[i:, :i] = m[i + 1:, :i]
    out[i:, i:] = m[i + 1:, i + 1:]
    return out


class _SolveCache:
    """Per-solve column views of the fixed inputs (sample covariance and
    penalty), so the inner loops only re-slice the changing iterate.
    Blocks are precomputed up front at desk scale; beyond that they are
    rebuilt per visit to bound memory."""

    def __init__(self, s, pen, precompute=None):
        p = s.shape[0]
        self.s = s
        self.rest = [np.concatenate([np.arange(i), np.arange(i + 1, p)]) for i in range(p)]
        self.diag_pen = [float(pen[i, i]) for i in range(p)]
        self.thresholds = [_drop_index(pen[:, i], i) for i in range(p)]
        self.s22 = [float(s[i, i]) for i in range(p)]
        if precompute is None:
            precompute = p <= 200
        if precompute:
            self.s11 = [_drop_cross(s, i) for i in range(p)]
            self.s12 = [_drop_index(s[:, i], i) for i in range(p)]
        else:
            self.s11 = None
            self.s12 = None

    def partition(self, sigma, i):
        s11 = self.s11[i] if self.s11 is not None else _drop_cross(self.s, i)
        s12 = self.s12[i] if self.s12 is not None else _drop_index(self.s[:, i], i)
        return ColumnPartition(
            sigma11=_drop_cross(sigma, i),
            sigma12=_drop_index(sigma[:, i], i),
            sigma22=float(sigma[i, i]),
            s11=s11,
            s12=s12,
            s22=self.s22[i],
            pivot=i,
            rest=self.rest[i],
        )


def residual_variance(offdiag, part, sigma11_inv=None):
    """Quadratic residual entering the pivot-variance subproblem.

    With ``w = sigma11^{-1} offdiag`` this is
    ``w' S11 w - 2 s12' w + s22``, the residual variance of the pivot
    variable after regressing it on the others with coefficients ``w``;
    nonnegative whenever S is positive semidefinite.
    """
    if part.s11 is None:
        raise ValueError("partition carries no sample-covariance blocks")
    k = _inverse_psd(part.sigma11) if sigma11_inv is None else sigma11_inv
    w = k @ np.asarray(offdiag, dtype=float)
    value = float(w @ part.s11 @ w - 2.0 * (part.s12 @ w) + part.s22)
    if value < 0.0:
        scale = max(1.0, abs(part.s22))
        if value < -1e-8 * scale:
            raise ValueError(
                f"negative residual variance {value:g}; sample covariance is not PSD"
            )
        value = 0.0
    return value


def variance_update(resid, rho):
    """Closed-form minimizer of ``log v + resid/v + rho*v`` over v > 0.

    Computed as ``2*resid / (1 + sqrt(1 + 4*resid*rho))``, which equals
    the textbook root ``(-1 + sqrt(1 + 4*resid*rho)) / (2*rho)`` but is
    stable as rho -> 0, where it reduces to ``resid`` exactly.
    """
    if resid < 0:
        raise ValueError(f"resid must be >= 0, got {resid}")
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    if resid == 0.0:
        raise DegenerateColumnError(
            "zero residual variance: the updated diagonal entry would be zero "
            "and the matrix would lose positive definiteness"
        )
    return 2.0 * resid / (1.0 + np.sqrt(1.0 + 4.0 * resid * rho))


def build_lasso_subproblem(part, schur, rho, thresholds=None, sigma11_inv=None):
    """Assemble the lasso subproblem for one column.

    ``gram = sigma11^{-1} S11 sigma11^{-1} / schur + rho * sigma11^{-1}``
    and ``lin = sigma11^{-1} s12 / schur``.  ``rho`` is the penalty on
    the pivot's diagonal entry; ``thresholds`` holds the per-coordinate
    soft thresholds for the off-diagonal block (defaults to ``rho``).
    """
    if schur <= 0:
        raise NotPositiveDefiniteError(f"schur must be > 0, got {schur}")
    if part.s11 is None:
        raise ValueError("partition carries no sample-covariance blocks")
    k = _inverse_psd(part.sigma11) if sigma11_inv is None else sigma11_inv
    gram = (k @ part.s11 @ k) / schur + rho * k
    gram = (gram + gram.T) / 2.0
    lin = (k @ part.s12) / schur
    m = lin.shape[0]
    if thresholds is None:
        thresholds = np.full(m, float(rho))
    else:
        thresholds = np.asarray(thresholds, dtype=float)
    return LassoSubproblem(gram=gram, lin=lin, penalties=thresholds)


def _cd_sweeps(gram, lin, pen, beta, grad, inner_tol, max_iters):
    """Cyclic soft-threshold sweeps over ``beta`` in place; ``grad``
    tracks ``gram @ beta``.  Returns whether the sweep-to-sweep change
    dropped below ``inner_tol`` within ``max_iters`` sweeps."""
    m = beta.shape[0]
    for _ in range(max_iters):
        max_delta = 0.0
        for j in range(m):
            old = beta[j]
            d = gram[j, j]
            r = lin[j] - grad[j] + d * old
            t = pen[j]
            if r > t:
                new = (r - t) / d
            elif r < -t:
                new = (r + t) / d
            else:
                new = 0.0
            if new != old:
                delta = new - old
                for k in range(m):
                    grad[k] += gram[j, k] * delta
                beta[j] = new
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        if max_delta < inner_tol:
            return True
    return False


# the sweep loop is the solver's hot path: JIT it when numba is around
_cd_sweeps_jit = _njit(cache=True)(_cd_sweeps) if _njit is not None else None


def _cd_sweeps_python(gram, lin, pen, beta, grad, inner_tol, max_iters):
    """Plain-interpreter fallback for :func:`_cd_sweeps`: Python floats
    for the scalar work, BLAS axpy for the gradient update."""
    m = beta.shape[0]
    rows = [gram[j] for j in range(m)]  # symmetric: rows double as columns
    diag_l = gram.diagonal().tolist()
    lin_l = lin.tolist()
    pen_l = pen.tolist()
    beta_l = beta.tolist()
    grad_at = grad.item
    converged = False
    for _ in range(max_iters):
        max_delta = 0.0
        for j in range(m):
            old = beta_l[j]
            d = diag_l[j]
            r = lin_l[j] - grad_at(j) + d * old
            t = pen_l[j]
            if r > t:
                new = (r - t) / d
            elif r < -t:
                new = (r + t) / d
            else:
                new = 0.0
            if new != old:
                daxpy(rows[j], grad, a=new - old)
                beta_l[j] = new
                delta = abs(new - old)
                if delta > max_delta:
                    max_delta = delta
        if max_delta < inner_tol:
            converged = True
            break
    beta[:] = beta_l
    return converged


def lasso_coordinate_descent(sub, beta0=None, inner_tol=1e-6, max_iters=10_000):
    """Cyclic coordinate descent with soft-thresholding.

    Sweeps stop when the largest absolute coordinate change over a full
    sweep drops below ``inner_tol``.  Returns ``(beta, converged)``;
    when the sweep cap is hit the last iterate is returned flagged
    non-converged.  Each coordinate step is an exact one-dimensional
    minimization, so the subproblem value never increases.
    """
    gram = np.ascontiguousarray(sub.gram, dtype=float)
    m = gram.shape[0]
    if np.any(gram.diagonal() <= 0):
        raise ValueError("lasso subproblem has a non-positive diagonal")
    beta = np.zeros(m) if beta0 is None else np.array(beta0, dtype=float)
    grad = gram @ beta  # maintained as gram @ beta throughout
    lin = np.ascontiguousarray(sub.lin, dtype=float)
    pen = np.ascontiguousarray(np.broadcast_to(sub.penalties, (m,)), dtype=float)
    kernel = _cd_sweeps_jit if _cd_sweeps_jit is not None else _cd_sweeps_python
    converged = kernel(gram, lin, pen, beta, grad, inner_tol, max_iters)
    return beta, bool(converged)


def _update_column(sigma, i, cache, config):
    """One column/row update of ``sigma`` in place.  Returns whether the
    inner lasso converged."""
    part = cache.partition(sigma, i)
    k = _inverse_psd(part.sigma11)
    resid = residual_variance(part.sigma12, part, sigma11_inv=k)
    try:
        schur = variance_update(resid, cache.diag_pen[i])
    except DegenerateColumnError as exc:
        raise DegenerateColumnError(f"{exc} (column {i})", column=i) from exc
    sub = build_lasso_subproblem(
        part, schur, cache.diag_pen[i], thresholds=cache.thresholds[i], sigma11_inv=k
    )
    beta, inner_ok = lasso_coordinate_descent(
        sub, beta0=part.sigma12, inner_tol=config.inner_tol, max_iters=config.max_inner_iters
    )
    sigma[part.rest, i] = beta
    sigma[i, part.rest] = beta
    sigma[i, i] = schur + beta @ (k @ beta)
    return inner_ok


def column_update(sigma, s, i, penalty, config=None):
    """Pure single-column update: returns a new matrix with column/row
    ``i`` replaced by its exact blockwise minimizer."""
    config = config or SolverConfig()
    sigma = np.array(sigma, dtype=float)
    pen = normalize_penalty(penalty, sigma.shape[0])
    cache = _SolveCache(np.asarray(s, dtype=float), pen, precompute=False)
    inner_ok = _update_column(sigma, i, cache, config)
    if not inner_ok:
        warnings.warn(f"inner lasso for column {i} hit the sweep cap", RuntimeWarning)
    return sigma


def _validate_problem(s, pen):
    """Common solve-entry validation: S symmetric PSD, and positive
    definite when any penalty entry is zero (otherwise some lasso
    subproblem may lose its unique minimizer)."""
    s = as_covariance(s, name="sample covariance")
    eigmin = float(np.linalg.eigvalsh(s)[0]) if s.shape[0] > 1 else float(s[0, 0])
    scale = max(1.0, float(np.max(np.abs(s))))
    if eigmin < -1e-8 * scale:
        raise ValueError(f"sample covariance is not PSD (min eigenvalue {eigmin:g})")
    if pen.min() == 0.0 and eigmin <= 1e-10 * scale:
        raise ValueError(
            "a zero penalty entry requires a positive definite sample covariance"
        )
    return s


def _finish(sigma, trace, converged, iters, t0, config):
    return SolverResult(
        sigma_hat=sigma,
        objective_trace=trace,
        converged=converged,
        outer_iters=iters,
        wall_time=time.perf_counter() - t0,
        nonzero_fraction=offdiag_nonzero_fraction(sigma, config.zero_report_threshold),
    )


def _solve_1x1(s, pen, config, t0):
    # p = 1: the whole problem is the scalar variance subproblem
    sigma0 = initial_sigma(s, config)
    trace = [objective(sigma0, s, pen)]
    v = variance_update(float(s[0, 0]), float(pen[0, 0]))
    sigma = np.array([[v]])
    trace.append(objective(sigma, s, pen))
    return _finish(sigma, trace, True, 1, t0, config)


def solve_cd(s, penalty, config=None, callback=None):
    """Minimize the penalized covariance objective by block coordinate
    descent.

    Parameters
    ----------
    s : (p, p) array
        Sample covariance matrix (symmetric PSD; must be PD when any
        penalty entry is zero).
    penalty : float or (p, p) array
        Common shrinkage parameter or element-wise penalty matrix.
    config : SolverConfig, optional
        Tolerances, iteration caps and initialization.
    callback : callable, optional
        Called as ``callback(k, sigma)`` with a copy of the iterate
        after each outer sweep.

    Returns
    -------
    SolverResult
        Estimate with a non-increasing objective trace.  Off-diagonal
        entries can be exactly zero.
    """
    t0 = time.perf_counter()
    config = config or SolverConfig()
    s = as_covariance(s, name="sample covariance")
    p = s.shape[0]
    pen = normalize_penalty(penalty, p)
    s = _validate_problem(s, pen)
    if p == 1:
        return _solve_1x1(s, pen, config, t0)
    sigma = initial_sigma(s, config)
    cache = _SolveCache(s, pen)
    trace = [objective(sigma, s, pen)]
    converged = False
    inner_failures = 0
    iters = 0
    # single-threaded BLAS: the per-column factorizations are too small
    # for threading to pay off, and timings stay comparable across runs
    with threadpool_limits(limits=1):
        for iters in range(1, config.max_outer_iters + 1):
            for i in range(p):
                if not _update_column(sigma, i, cache, config):
                    inner_failures += 1
            trace.append(objective(sigma, s, pen))
            if callback is not None:
                callback(iters, sigma.copy())
            if abs(trace[-2] - trace[-1]) < config.outer_tol:
                converged = True
                break
    if inner_failures:
        warnings.warn(
            f"inner lasso hit the sweep cap in {inner_failures} column visit(s)",
            RuntimeWarning,
        )
    return _finish(sigma, trace, converged, iters, t0, config)


def solve_cd_path(s, rhos, config=None):
    """Solve along a penalty grid, warm-starting each solve from the
    previous solution.  Returns one SolverResult per value of ``rhos``
    in the given order."""
    config = config or SolverConfig()
    results = []
    cfg = config
    for rho in rhos:
        res = solve_cd(s, rho, cfg)
        results.append(res)
        cfg = dataclasses.replace(config, init="custom", init_matrix=res.sigma_hat)
    return results
