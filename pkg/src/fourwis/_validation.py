"""Input validation helpers shared by the estimators."""
from __future__ import annotations

import numpy as np


def check_param_vector(z, name="z", n=12):
    """Return ``z`` as a finite 1-D float array (of length ``n`` if given)."""
    arr = np.array(z, dtype=float).reshape(-1)
    if n is not None and arr.size != n:
        raise ValueError(f"{name} must have {n} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def check_square(mat, n, name):
    arr = np.array(mat, dtype=float)
    if arr.shape != (n, n):
        raise ValueError(f"{name} must be {n}x{n}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def check_psd(mat, name, tol=1e-10):
    """Symmetric positive semi-definite check; returns the symmetrized matrix."""
    arr = np.atleast_2d(np.array(mat, dtype=float))
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square")
    if not np.allclose(arr, arr.T, rtol=0, atol=1e-12 * max(1.0, np.abs(arr).max(initial=0.0))):
        raise ValueError(f"{name} must be symmetric")
    sym = 0.5 * (arr + arr.T)
    if sym.size and np.linalg.eigvalsh(sym).min() < -tol * max(1.0, np.abs(sym).max()):
        raise ValueError(f"{name} must be positive semi-definite")
    return sym


def check_positive(value, name):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value
