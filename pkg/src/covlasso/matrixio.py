"""Plain-text CSV persistence for dense symmetric matrices.

One row per line, comma separated, no header.  Readers reject matrices
whose asymmetry exceeds 1e-8 in max-abs and return an exactly
symmetrized copy; writers use repr-precision floats so values
round-trip bit-for-bit.
"""

from __future__ import annotations

import numpy as np

from .core import as_covariance


def write_matrix(path, m):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    np.savetxt(path, m, delimiter=",", fmt="%.17g")


def read_matrix(path, name=None):
    try:
        m = np.loadtxt(path, delimiter=",", ndmin=2)
    except Exception as exc:
        raise ValueError(f"could not parse matrix file {path}: {exc}") from exc
    return as_covariance(m, name=name or str(path))
