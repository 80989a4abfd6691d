"""Extended and unscented Kalman filter steps on a :class:`GaussianBelief`."""
from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from ..kinematics import wrap_angle
from .models import GaussianBelief, MeasurementModel, ProcessModel, UkfConfig

CHOLESKY_JITTER = 1e-12


class SingularInnovationError(np.linalg.LinAlgError):
    """The innovation covariance could not be inverted; the update is skipped."""


def _wrap_rows(D, idx):
    if idx:
        D = np.array(D, dtype=float, copy=True)
        D[..., list(idx)] = wrap_angle(D[..., list(idx)])
    return D


def _symmetrize(P):
    return 0.5 * (P + P.T)


def _gain(P_xz, S):
    try:
        c = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise SingularInnovationError("innovation covariance is not positive definite") from None
    # K = P_xz S^-1 via two triangular solves
    return np.linalg.solve(c.T, np.linalg.solve(c, P_xz.T)).T


def ekf_predict(belief: GaussianBelief, frame, dt: float, model: ProcessModel) -> GaussianBelief:
    """Propagate the mean through the process and ``P <- A P A^T + Q(dt)``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    A = model.jacobian(belief.mean, frame, dt)
    mean = model.propagate(belief.mean[None, :], frame, dt)[0]
    return GaussianBelief(mean, A @ belief.cov @ A.T + model.noise(dt))


def ekf_update(belief: GaussianBelief, z, model: MeasurementModel, state_angles: Sequence[int] = ()) -> GaussianBelief:
    """Linearized Kalman update with Joseph-form covariance.

    Angular innovation components are wrapped to [-pi, pi); ``state_angles``
    lists state entries to wrap after the update.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    H = model.jacobian(belief.mean)
    nu = _wrap_rows(z - model.h(belief.mean[None, :])[0], model.angle_indices)
    P = belief.cov
    S = H @ P @ H.T + model.R
    K = _gain(P @ H.T, _symmetrize(S))
    mean = _wrap_rows(belief.mean + K @ nu, state_angles)
    IKH = np.eye(P.shape[0]) - K @ H
    cov = IKH @ P @ IKH.T + K @ model.R @ K.T
    return GaussianBelief(mean, cov)


def ukf_sigma_points(belief: GaussianBelief, config: UkfConfig = UkfConfig()) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``2n + 1`` sigma points (rows) with mean and covariance weights.

    Row 0 is the mean; rows ``i`` and ``i + n`` are the mean plus and minus
    column ``i`` of the lower Cholesky factor of ``(n + lambda) P``.
    """
    n = belief.dim
    wm, wc = config.weights(n)
    c = n + config.lam(n)
    if c <= 0:
        raise ValueError("n + lambda must be positive to form sigma points")
    scaled = c * belief.cov
    try:
        L = np.linalg.cholesky(scaled)
    except np.linalg.LinAlgError:
        try:
            L = np.linalg.cholesky(scaled + CHOLESKY_JITTER * c * np.eye(n))
        except np.linalg.LinAlgError:
            raise np.linalg.LinAlgError("covariance is not positive semi-definite") from None
    X = np.empty((2 * n + 1, n))
    X[0] = belief.mean
    X[1 : n + 1] = belief.mean + L.T
    X[n + 1 :] = belief.mean - L.T
    return X, wm, wc


def _moments(Y, wm, config: UkfConfig, angles=()):
    """Weighted mean, offsets and ``(sum W D, mean - Y0)`` of sigma-point images.

    With alpha small the outer weights are large and the central one is
    large and negative, so everything is computed from deviations
    ``D_i = Y_i - Y_0`` to avoid cancellation.
    """
    D = _wrap_rows(Y[1:] - Y[0], angles)
    w = wm[1]
    s = w * D.sum(axis=0)
    m = s.copy()
    for j in angles:
        sin_sum = w * np.sin(D[:, j]).sum()
        cos_sum = 1.0 - w * (1.0 - np.cos(D[:, j])).sum()
        m[j] = np.arctan2(sin_sum, cos_sum)
    mean = _wrap_rows(Y[0] + m, angles)
    return mean, D, s, m


def _cross(Da, sa, ma, Db, sb, mb, w, config: UkfConfig):
    """Sum over sigma points of ``Wc (a_i - a_mean)(b_i - b_mean)^T``."""
    k = 2.0 - config.alpha**2 + config.beta
    return w * Da.T @ Db - np.outer(sa, mb) - np.outer(ma, sb) + k * np.outer(ma, mb)


def unscented_transform(X, wm, config: UkfConfig, fX, angles=()):
    """Mean and covariance of the images ``fX`` of sigma points ``X``."""
    mean, D, s, m = _moments(fX, wm, config, angles)
    return mean, _symmetrize(_cross(D, s, m, D, s, m, wm[1], config))


def ukf_predict(belief: GaussianBelief, frame, dt: float, model: ProcessModel, config: UkfConfig = UkfConfig()) -> GaussianBelief:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    X, wm, _ = ukf_sigma_points(belief, config)
    Y = model.propagate(X, frame, dt)
    mean, cov = unscented_transform(X, wm, config, Y, model.angle_indices)
    return GaussianBelief(mean, cov + model.noise(dt))


def ukf_update(
    belief: GaussianBelief, z, model: MeasurementModel, config: UkfConfig = UkfConfig(), state_angles: Sequence[int] = ()
) -> GaussianBelief:
    """Sigma-point Kalman update; innovation angles wrapped, covariance symmetrized."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    X, wm, _ = ukf_sigma_points(belief, config)
    Z = model.h(X)
    z_mean, Dz, sz, mz = _moments(Z, wm, config, model.angle_indices)
    Dx = _wrap_rows(X[1:] - X[0], state_angles)
    sx = wm[1] * Dx.sum(axis=0)
    mx = np.zeros_like(sx)  # sigma points are symmetric about X0 = mean
    P_zz = _symmetrize(_cross(Dz, sz, mz, Dz, sz, mz, wm[1], config) + model.R)
    P_xz = _cross(Dx, sx, mx, Dz, sz, mz, wm[1], config)
    K = _gain(P_xz, P_zz)
    nu = _wrap_rows(z - z_mean, model.angle_indices)
    mean = _wrap_rows(belief.mean + K @ nu, state_angles)
    return GaussianBelief(mean, belief.cov - K @ P_zz @ K.T)
