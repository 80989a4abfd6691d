"""Log-barrier interior-point method for bound-constrained least squares."""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .problem import Bounds
from .solvers import OptimizerResult, fd_jacobian

FRACTION_TO_BOUNDARY = 0.995
ARMIJO = 1e-4


def _barrier(u):
    return -np.sum(np.log(u) + np.log1p(-u))


def interior_point_minimize(
    fun: Callable,
    z0,
    bounds: Bounds,
    *,
    mu0: Optional[float] = None,
    mu_factor: float = 0.2,
    mu_min: float = 1e-9,
    max_inner: int = 50,
    rel_step: float = 1e-6,
    inner_tol: float = 1e-12,
) -> OptimizerResult:
    """Minimize ``sum(fun(z)**2)`` subject to ``lower < z < upper``.

    Works on the unit-box coordinates ``u = (z - lower) / (upper - lower)``
    and minimizes ``C(u) - mu * sum(log u + log(1 - u))`` with Gauss-Newton
    inner iterations, a fraction-to-boundary rule and Armijo backtracking.
    ``mu`` shrinks by ``mu_factor`` after each inner solve until it falls
    below ``mu_min``. Every iterate is strictly interior.
    """
    u = bounds.to_unit(z0)
    if np.any(u <= 0) or np.any(u >= 1):
        # start strictly inside; a point on the boundary has infinite barrier
        u = np.clip(u, 1e-3, 1 - 1e-3)
    width = bounds.width

    def res_u(uu):
        return fun(bounds.from_unit(uu))

    r = res_u(u)
    nfev = 1
    c0 = float(r @ r)
    mu = float(mu0) if mu0 is not None else 0.1 * max(c0, 1e-6) / u.size
    history, iterates = [c0], [bounds.from_unit(u)]
    nit = 0
    status, message = "converged", "barrier parameter below threshold"
    step_scale = np.where(np.abs(bounds.from_unit(u)) > 0, np.abs(bounds.from_unit(u)), 1.0) / width

    while mu >= mu_min:
        for _ in range(max_inner):
            J = fd_jacobian(res_u, u, r, rel_step=rel_step, scale=step_scale, bounds=Bounds(np.zeros(u.size), np.ones(u.size)))
            nfev += u.size
            nit += 1
            c = float(r @ r)
            phi = c + mu * _barrier(u)
            g = 2.0 * J.T @ r - mu * (1.0 / u - 1.0 / (1.0 - u))
            H = 2.0 * J.T @ J + np.diag(mu * (1.0 / u**2 + 1.0 / (1.0 - u) ** 2))
            try:
                delta = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                delta = -g / np.diag(H)
            decrement = float(-g @ delta)
            if decrement <= inner_tol * max(1.0, abs(phi)):
                break
            alpha = 1.0
            neg, pos = delta < 0, delta > 0
            if np.any(neg):
                alpha = min(alpha, FRACTION_TO_BOUNDARY * np.min(-u[neg] / delta[neg]))
            if np.any(pos):
                alpha = min(alpha, FRACTION_TO_BOUNDARY * np.min((1.0 - u[pos]) / delta[pos]))
            accepted = False
            for _ in range(60):
                cand = u + alpha * delta
                r_c = res_u(cand)
                nfev += 1
                phi_c = float(r_c @ r_c) + mu * _barrier(cand)
                if phi_c <= phi - ARMIJO * alpha * decrement:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                if decrement <= 1e-8 * max(1.0, abs(phi)):
                    break  # stalled at round-off level: treat as inner convergence
                status, message = "line_search_failed", f"no sufficient decrease at mu={mu:.3g}"
                break
            u, r = cand, r_c
            history.append(float(r @ r))
            iterates.append(bounds.from_unit(u))
        if status == "line_search_failed":
            break
        mu *= mu_factor
    return OptimizerResult(bounds.from_unit(u), float(r @ r), c0, nit, nfev, status, message, history, iterates)
