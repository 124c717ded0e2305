"""Brute-force verification oracles.

Everything here is deliberately slow and independent of the production
solvers: a golden-section minimizer for the one-dimensional penalized
variance subproblem, an exhaustive grid / pattern search for whole
problems at p in {2, 3}, and a finite-difference stationarity checker.
Intended for tests and the hidden ``verify`` command, not for fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import NotPositiveDefiniteError, normalize_penalty, objective

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo, hi, width=1e-10):
    """Minimize a unimodal ``f`` on [lo, hi] by golden-section search.

    Returns ``(x, evaluations)`` where ``x`` is the midpoint of the
    final interval of length at most ``width``.
    """
    if not hi > lo:
        raise ValueError(f"empty bracket [{lo}, {hi}]")
    a, b = float(lo), float(hi)
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    evals = 2
    while b - a > width:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
        evals += 1
    return (a + b) / 2.0, evals


def _golden_section_compare(less_than, lo, hi, width):
    """Golden-section argmin driven by a pairwise comparator
    ``less_than(x1, x2)`` (true when f(x1) < f(x2))."""
    a, b = float(lo), float(hi)
    while b - a > width:
        x1 = b - _INVPHI * (b - a)
        x2 = a + _INVPHI * (b - a)
        if less_than(x1, x2):
            b = x2
        else:
            a = x1
    return (a + b) / 2.0


def oracle_variance_update(resid, rho, width=1e-10):
    """Search-based minimizer of ``log v + resid/v + rho*v`` over v > 0.

    Independent cross-check for the closed-form variance update used by
    both solvers.  Comparisons between trial points use the
    analytically cancelled difference
    ``log1p((x1-x2)/x2) + resid*(x2-x1)/(x1*x2) + rho*(x1-x2)``, which
    keeps the search meaningful below the sqrt(eps) noise floor of
    direct value comparisons.  The bracket is widened and the search
    retried up to three times if the minimizer lands on an endpoint.
    """
    if resid <= 0:
        raise ValueError(f"resid must be > 0, got {resid}")
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")

    def less_than(x1, x2):
        diff = math.log1p((x1 - x2) / x2) + resid * (x2 - x1) / (x1 * x2) + rho * (x1 - x2)
        return diff < 0.0

    lo = 1e-8
    hi = resid + 10.0 / max(rho, 1e-8)
    for _ in range(4):
        x = _golden_section_compare(less_than, lo, hi, width=width)
        if x - lo > 2 * width and hi - x > 2 * width:
            return x
        lo, hi = lo / 100.0, hi * 10.0
    raise RuntimeError(f"variance bracket failed for resid={resid}, rho={rho}")


@dataclass
class OracleReport:
    """Best point found by a brute-force search, with bookkeeping."""

    best_point: np.ndarray
    best_value: float
    evaluations: int
    resolution: float


_GRID_POINTS = 41
_REFINE_SHRINK = 5.0
_MAX_PATTERN_EVALS = 500_000


def _grid_search_2x2(s, pen, resolution):
    s11, s12, s22 = s[0, 0], s[0, 1], s[1, 1]
    # generous box around S: diagonals down to near zero (large penalties
    # shrink them hard), off-diagonal spanning zero and the sample value
    lo = np.array([0.02 * s11, -abs(s12) - 0.6 * math.sqrt(s11 * s22), 0.02 * s22])
    hi = np.array([2.0 * s11, abs(s12) + 0.6 * math.sqrt(s11 * s22), 2.0 * s22])
    center = (lo + hi) / 2.0
    half = (hi - lo) / 2.0
    if resolution is None:
        # default: the initial grid plus two fivefold refinements
        resolution = float((hi - lo).max() / (_GRID_POINTS - 1)) / _REFINE_SHRINK**2 * (1 + 1e-12)
    evals = 0
    best = None
    best_val = math.inf
    stages = 0
    while True:
        axes = [np.linspace(center[k] - half[k], center[k] + half[k], _GRID_POINTS) for k in range(3)]
        x11, x12, x22 = np.meshgrid(axes[0], axes[1], axes[2], indexing="ij")
        det = x11 * x22 - x12 * x12
        pd = (x11 > 0) & (det > 0)
        evals += int(np.count_nonzero(pd))
        if not pd.any():
            raise RuntimeError("no positive definite point in the search box")
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = (
                np.log(det)
                + (s11 * x22 - 2.0 * s12 * x12 + s22 * x11) / det
                + pen[0, 0] * np.abs(x11)
                + pen[1, 1] * np.abs(x22)
                + 2.0 * pen[0, 1] * np.abs(x12)
            )
        vals = np.where(pd, vals, math.inf)
        flat = int(np.argmin(vals))  # first occurrence: lexicographically smallest point
        idx = np.unravel_index(flat, vals.shape)
        stage_val = float(vals[idx])
        if stage_val < best_val:
            best_val = stage_val
            best = np.array([axes[0][idx[0]], axes[1][idx[1]], axes[2][idx[2]]])
        step = 2.0 * half / (_GRID_POINTS - 1)
        stages += 1
        if step.max() <= resolution or stages >= 12:
            point = np.array([[best[0], best[1]], [best[1], best[2]]])
            return point, evals, float(step.max())
        center = best.copy()
        half = half / _REFINE_SHRINK


def _pattern_search(s, pen, resolution):
    p = s.shape[0]
    coords = [(i, j) for i in range(p) for j in range(i, p)]
    incumbent = s.copy()
    try:
        best_val = objective(incumbent, s, pen)
    except NotPositiveDefiniteError as exc:
        raise RuntimeError("pattern search needs a positive definite start (S)") from exc
    evals = 1
    scale = max(1.0, float(np.max(np.abs(s))))
    step = 0.25 * scale
    if resolution is None:
        resolution = step / _REFINE_SHRINK**2
    while evals < _MAX_PATTERN_EVALS:
        best_cand = None
        best_cand_val = best_val
        for (i, j) in coords:
            for sign in (1.0, -1.0):
                cand = incumbent.copy()
                cand[i, j] += sign * step
                if i != j:
                    cand[j, i] += sign * step
                try:
                    val = objective(cand, s, pen)
                except NotPositiveDefiniteError:
                    continue
                finally:
                    evals += 1
                if val < best_cand_val:
                    best_cand_val = val
                    best_cand = cand
        if best_cand is not None:
            incumbent = best_cand
            best_val = best_cand_val
        elif step <= resolution:
            break
        else:
            step /= _REFINE_SHRINK
    return incumbent, evals, step


def brute_force_minimize(s, penalty, resolution=None):
    """Exhaustively minimize the penalized objective for p in {2, 3}.

    p=2 uses a dense grid over the three free entries inside a
    positive-definite box around ``S``, refined around the incumbent
    until the grid step reaches ``resolution`` (default: two fivefold
    refinements).  p=3 falls back to a compass pattern search over the
    six free entries.  Returns an :class:`OracleReport` whose
    ``best_value`` is the objective re-evaluated at ``best_point``.
    """
    s = np.asarray(s, dtype=float)
    p = s.shape[0]
    if p not in (2, 3):
        raise ValueError(f"brute-force search supports p in {{2, 3}}, got p={p}")
    pen = normalize_penalty(penalty, p)
    if p == 2:
        point, evals, final_step = _grid_search_2x2(s, pen, resolution)
    else:
        point, evals, final_step = _pattern_search(s, pen, resolution)
    return OracleReport(
        best_point=point,
        best_value=objective(point, s, pen),
        evaluations=evals,
        resolution=final_step,
    )


def check_stationarity(sigma_hat, s, penalty, step=1e-6, max_shrinks=30):
    """Most negative one-sided directional derivative of the objective
    at ``sigma_hat`` over all coordinate directions.

    For every entry (i, j) with i <= j the symmetric perturbations
    ``+/- step`` are probed (off-diagonal probes move both mirrored
    entries).  At a minimum every value is >= 0 up to finite-difference
    noise; clearly negative values flag non-stationarity.  If a probe
    leaves the positive definite cone the step is halved and retried.
    """
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    p = sigma_hat.shape[0]
    pen = normalize_penalty(penalty, p)
    base = objective(sigma_hat, s, pen)
    worst = math.inf
    for i in range(p):
        for j in range(i, p):
            for sign in (1.0, -1.0):
                h = float(step)
                for _ in range(max_shrinks):
                    cand = sigma_hat.copy()
                    cand[i, j] += sign * h
                    if i != j:
                        cand[j, i] += sign * h
                    try:
                        val = objective(cand, s, pen)
                    except NotPositiveDefiniteError:
                        h /= 2.0
                        continue
                    worst = min(worst, (val - base) / h)
                    break
                else:
                    raise RuntimeError(
                        f"could not find a positive definite probe at entry ({i}, {j})"
                    )
    return worst
