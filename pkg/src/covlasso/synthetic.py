"""Synthetic covariance models and seeded data generation.

Two standard test matrices: a tridiagonal "sparse" model whose diagonal
is tuned so the condition number equals the dimension exactly, and a
compound-symmetric "dense" model.  Sampling is zero-mean multivariate
normal through the Cholesky factor, deterministic given the seed.
Datasets persist as CSV matrices plus a small key=value sidecar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import cholesky_or_raise
from .matrixio import read_matrix, write_matrix

MODEL_KINDS = ("sparse", "dense")


@dataclass(frozen=True)
class ModelSpec:
    """One synthetic dataset: model kind, dimensions, and RNG seed."""

    kind: str
    p: int
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if self.n < 1:
            raise ValueError("n must be >= 1")


def sparse_model_delta(p):
    """Diagonal value putting the tridiagonal model's condition number
    at exactly p.

    The eigenvalues of a symmetric tridiagonal Toeplitz matrix with
    diagonal d and off-diagonal c are ``d + 2c cos(k pi / (p+1))``, so
    requiring (largest / smallest) == p pins
    ``d = 2c cos(pi/(p+1)) (p+1)/(p-1)`` with c = 0.4.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    return 0.8 * math.cos(math.pi / (p + 1)) * (p + 1) / (p - 1)


def make_sparse_sigma(p):
    """Tridiagonal model: 0.4 on the first off-diagonals, diagonal
    chosen so the condition number equals p."""
    delta = sparse_model_delta(p)
    sigma = np.zeros((p, p))
    np.fill_diagonal(sigma, delta)
    idx = np.arange(p - 1)
    sigma[idx, idx + 1] = 0.4
    sigma[idx + 1, idx] = 0.4
    return sigma


def make_dense_sigma(p):
    """Compound-symmetric model: 2 on the diagonal, 1 everywhere else.
    Eigenvalues are p+1 (once) and 1 (p-1 times)."""
    if p < 2:
        raise ValueError("p must be >= 2")
    return np.ones((p, p)) + np.eye(p)


def model_sigma(kind, p):
    if kind == "sparse":
        return make_sparse_sigma(p)
    if kind == "dense":
        return make_dense_sigma(p)
    raise ValueError(f"kind must be one of {MODEL_KINDS}, got {kind!r}")


def model_delta(kind, p):
    """Diagonal value of the model matrix (recorded in dataset metadata)."""
    return sparse_model_delta(p) if kind == "sparse" else 2.0


def sample_mvn(sigma, n, seed):
    """Draw ``n`` independent rows from N(0, sigma).

    Rows are ``z @ L'`` with L the lower Cholesky factor and z standard
    normal, so the output is deterministic given the seed.
    """
    sigma = np.asarray(sigma, dtype=float)
    if n < 1:
        raise ValueError("n must be >= 1")
    chol = cholesky_or_raise(sigma, name="sigma")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, sigma.shape[0]))
    return z @ chol.T


def condition_number(sigma):
    """Ratio of extreme eigenvalues; +inf when the smallest is <= 0."""
    vals = np.linalg.eigvalsh(np.asarray(sigma, dtype=float))
    if vals[0] <= 0:
        return math.inf
    return float(vals[-1] / vals[0])


def generate_dataset(spec):
    """Materialize a ModelSpec: returns ``(y, sigma_true)``."""
    sigma = model_sigma(spec.kind, spec.p)
    return sample_mvn(sigma, spec.n, spec.seed), sigma


DATA_FILE = "Y.csv"
TRUTH_FILE = "sigma_true.csv"
META_FILE = "meta.txt"


def save_dataset(dirpath, spec):
    """Write ``Y.csv``, ``sigma_true.csv`` and a key=value ``meta.txt``
    (kind, p, n, seed, delta) under ``dirpath``.  Returns (y, sigma)."""
    out = Path(dirpath)
    out.mkdir(parents=True, exist_ok=True)
    y, sigma = generate_dataset(spec)
    np.savetxt(out / DATA_FILE, y, delimiter=",", fmt="%.17g")
    write_matrix(out / TRUTH_FILE, sigma)
    meta = {
        "kind": spec.kind,
        "p": spec.p,
        "n": spec.n,
        "seed": spec.seed,
        "delta": repr(model_delta(spec.kind, spec.p)),
    }
    (out / META_FILE).write_text("".join(f"{k}={v}\n" for k, v in meta.items()))
    return y, sigma


def load_dataset(dirpath):
    """Read back a saved dataset: ``(y, sigma_true, meta_dict)``."""
    src = Path(dirpath)
    y = np.loadtxt(src / DATA_FILE, delimiter=",", ndmin=2)
    sigma = read_matrix(src / TRUTH_FILE)
    meta = {}
    for line in (src / META_FILE).read_text().splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            meta[key.strip()] = value.strip()
    for key in ("p", "n", "seed"):
        if key in meta:
            meta[key] = int(meta[key])
    if "delta" in meta:
        meta["delta"] = float(meta["delta"])
    return y, sigma, meta
