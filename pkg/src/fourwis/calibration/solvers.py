"""Bounded Levenberg-Marquardt and shared solver plumbing."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .problem import Bounds

MAX_SINGULAR_RETRIES = 8


@dataclass
class OptimizerResult:
    x: np.ndarray
    fun: float
    initial_fun: float
    nit: int
    nfev: int
    status: str
    message: str = ""
    history: List[float] = field(default_factory=list)
    iterates: List[np.ndarray] = field(default_factory=list)

    @property
    def success(self):
        return self.status == "converged"


def fd_jacobian(fun: Callable, z, r0=None, *, rel_step=1e-6, scale=None, bounds: Optional[Bounds] = None):
    """Forward-difference Jacobian of a residual function.

    The step for entry j is ``rel_step * scale[j]`` (``scale`` defaults to
    ``max(|z_j|, 1)``); it flips sign when the forward point would leave
    ``bounds``.
    """
    z = np.asarray(z, dtype=float)
    r0 = fun(z) if r0 is None else r0
    scale = np.maximum(np.abs(z), 1.0) if scale is None else np.asarray(scale, dtype=float)
    J = np.empty((r0.size, z.size))
    for j in range(z.size):
        h = rel_step * scale[j]
        if bounds is not None and z[j] + h > bounds.upper[j]:
            h = -h
        zp = z.copy()
        zp[j] += h
        J[:, j] = (fun(zp) - r0) / (zp[j] - z[j])
    return J


def central_jacobian(fun: Callable, z, *, rel_step=1e-5, scale=None):
    z = np.asarray(z, dtype=float)
    scale = np.maximum(np.abs(z), 1.0) if scale is None else np.asarray(scale, dtype=float)
    cols = []
    for j in range(z.size):
        h = rel_step * scale[j]
        zp, zm = z.copy(), z.copy()
        zp[j] += h
        zm[j] -= h
        cols.append((fun(zp) - fun(zm)) / (zp[j] - zm[j]))
    return np.column_stack(cols)


def _marquardt_solve(JtJ, g, damping):
    """Solve ``(JtJ + damping * diag(JtJ)) delta = -g``, raising damping if singular."""
    diag = np.diag(JtJ).copy()
    floor = np.finfo(float).eps * max(diag.max(initial=0.0), 1e-300)
    diag = np.maximum(diag, floor)
    lam = damping
    for _ in range(MAX_SINGULAR_RETRIES):
        A = JtJ + lam * np.diag(diag)
        try:
            c = np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            lam = max(lam * 10.0, 1e-12)
            continue
        y = np.linalg.solve(c, -g)
        return np.linalg.solve(c.T, y), lam
    raise np.linalg.LinAlgError("normal matrix stays singular after raising the damping")


def lm_direction(J, r, damping):
    """Damped step for the current linearization (no acceptance test)."""
    JtJ = J.T @ J
    delta, _ = _marquardt_solve(JtJ, J.T @ r, damping)
    return delta


def _scale_for(z, bounds, x_scale):
    if x_scale is not None:
        return np.asarray(x_scale, dtype=float)
    return np.where(np.abs(z) > 0, np.abs(z), 1.0)


def lm_step(fun: Callable, z, damping: float, bounds: Optional[Bounds] = None, *, rel_step=1e-6, x_scale=None):
    """One Levenberg-Marquardt trial step.

    Returns ``(z_next, new_damping)``. An accepted step (lower cost) halves the
    damping; a rejected one returns ``z`` unchanged with the damping doubled.
    Steps are projected onto ``bounds``.
    """
    z = np.asarray(z, dtype=float)
    r = fun(z)
    J = fd_jacobian(fun, z, r, rel_step=rel_step, scale=_scale_for(z, bounds, x_scale), bounds=bounds)
    z_next, lam, accepted, _ = _trial(fun, z, r, J, damping, bounds)
    return z_next, lam


def _trial(fun, z, r, J, damping, bounds):
    JtJ = J.T @ J
    delta, lam = _marquardt_solve(JtJ, J.T @ r, damping)
    cand = z + delta
    if bounds is not None:
        cand = bounds.clip(cand)
    r_new = fun(cand)
    if r_new @ r_new < r @ r:
        return cand, lam * 0.5, True, r_new
    return z, lam * 2.0, False, r


def levenberg_marquardt(
    fun: Callable,
    z0,
    bounds: Optional[Bounds] = None,
    *,
    damping: float = 1e-3,
    max_iter: int = 100,
    rel_step: float = 1e-6,
    x_scale=None,
    ftol: float = 1e-12,
    xtol: float = 1e-12,
    gtol: float = 1e-14,
    ctol: float = 1e-20,
    max_damping: float = 1e16,
) -> OptimizerResult:
    """Minimize ``sum(fun(z)**2)`` by projected Levenberg-Marquardt.

    The Jacobian is refreshed only after accepted steps. ``nit`` counts
    Jacobian evaluations; status is ``"converged"`` or ``"max_iterations"``.
    """
    z = np.array(z0, dtype=float)
    if bounds is not None and not bounds.contains(z):
        raise ValueError("z0 must lie within bounds")
    scale = _scale_for(z, bounds, x_scale)
    r = fun(z)
    nfev = 1
    c0 = float(r @ r)
    history = [c0]
    iterates = [z.copy()]
    lam = damping
    nit = 0
    status, message = "max_iterations", "iteration limit reached"
    J = None
    while True:
        c = float(r @ r)
        if c <= ctol:
            status, message = "converged", "cost at numerical zero"
            break
        if nit >= max_iter:
            break
        if J is None:
            J = fd_jacobian(fun, z, r, rel_step=rel_step, scale=scale, bounds=bounds)
            nfev += z.size
            nit += 1
            g = J.T @ r
            if np.max(np.abs(g * scale)) <= gtol:
                status, message = "converged", "gradient below tolerance"
                break
        try:
            z_new, lam, accepted, r_new = _trial(fun, z, r, J, lam, bounds)
        except np.linalg.LinAlgError as exc:
            status, message = "converged", f"normal equations singular: {exc}"
            break
        nfev += 1
        if accepted:
            step = np.max(np.abs((z_new - z) / scale))
            c_new = float(r_new @ r_new)
            z, r, J = z_new, r_new, None
            history.append(c_new)
            iterates.append(z.copy())
            if (c - c_new) <= ftol * c or step <= xtol:
                status, message = "converged", "relative reduction below tolerance"
                break
        elif lam > max_damping:
            status, message = "converged", "no descent step found"
            break
    return OptimizerResult(z, float(r @ r), c0, nit, nfev, status, message, history, iterates)
