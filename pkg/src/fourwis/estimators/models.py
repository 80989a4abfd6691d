"""Process and measurement models shared by the EKF and UKF."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .._validation import check_psd
from ..kinematics import KinematicParams, WheelFrame, body_twist_array, wrap_angle


@dataclass(frozen=True, eq=False)
class GaussianBelief:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float).reshape(mean.size, mean.size)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", 0.5 * (cov + cov.T))

    @property
    def dim(self):
        return self.mean.size


class ProcessModel:
    """``x_next = f(x, u, dt) + w`` with ``w ~ N(0, noise(dt))``."""

    angle_indices: Tuple[int, ...] = ()

    def propagate(self, X, u, dt):
        """Apply ``f`` to each row of ``X`` (shape ``(m, n)``)."""
        raise NotImplementedError

    def jacobian(self, x, u, dt):
        raise NotImplementedError

    def noise(self, dt):
        raise NotImplementedError


class OdometryProcess(ProcessModel):
    """Midpoint-rule dead-reckoning step on the planar pose ``(x, y, theta)``.

    ``Q`` is a noise density: a step of length ``dt`` adds ``Q * dt``.
    """

    angle_indices = (2,)

    def __init__(self, params: KinematicParams, Q):
        self.params = params
        self.Q = check_psd(Q, "Q")
        if self.Q.shape != (3, 3):
            raise ValueError("Q must be 3x3")

    def twist(self, frame: WheelFrame) -> np.ndarray:
        return body_twist_array(self.params, frame.wheel_rate * self.params.wheel_radius, frame.steer)

    def propagate(self, X, frame, dt):
        X = np.atleast_2d(X)
        vx, vy, om = self.twist(frame)
        mid = X[:, 2] + 0.5 * om * dt
        c, s = np.cos(mid), np.sin(mid)
        out = np.empty_like(X)
        out[:, 0] = X[:, 0] + dt * (c * vx - s * vy)
        out[:, 1] = X[:, 1] + dt * (s * vx + c * vy)
        out[:, 2] = wrap_angle(X[:, 2] + om * dt)
        return out

    def jacobian(self, x, frame, dt):
        vx, vy, om = self.twist(frame)
        mid = x[2] + 0.5 * om * dt
        c, s = np.cos(mid), np.sin(mid)
        A = np.eye(3)
        A[0, 2] = dt * (-s * vx - c * vy)
        A[1, 2] = dt * (c * vx - s * vy)
        return A

    def noise(self, dt):
        return self.Q * dt


class LinearProcess(ProcessModel):
    """``x_next = F x + B u`` with a fixed per-step noise ``Q`` (dt is ignored)."""

    def __init__(self, F, Q, B=None):
        self.F = np.atleast_2d(np.asarray(F, dtype=float))
        n = self.F.shape[0]
        self.Q = check_psd(Q, "Q")
        self.B = None if B is None else np.atleast_2d(np.asarray(B, dtype=float)).reshape(n, -1)

    def _bu(self, u):
        if self.B is None or u is None:
            return 0.0
        return self.B @ np.atleast_1d(np.asarray(u, dtype=float))

    def propagate(self, X, u, dt):
        return np.atleast_2d(X) @ self.F.T + self._bu(u)

    def jacobian(self, x, u, dt):
        return self.F

    def noise(self, dt):
        return self.Q


class MeasurementKind(str, enum.Enum):
    IMU_YAW = "ImuYaw"
    VO_POSE = "VoPose"
    LINEAR = "Linear"


class MeasurementModel:
    """``z = h(x) + v`` with ``v ~ N(0, R)``."""

    kind: MeasurementKind
    angle_indices: Tuple[int, ...] = ()

    def __init__(self, R):
        self.R = check_psd(np.atleast_2d(R), "R")

    def h(self, X):
        """Apply ``h`` to each row of ``X``; returns ``(m, k)``."""
        raise NotImplementedError

    def jacobian(self, x):
        raise NotImplementedError


class ImuYaw(MeasurementModel):
    kind = MeasurementKind.IMU_YAW
    angle_indices = (0,)

    def __init__(self, R):
        super().__init__(R)
        if self.R.shape != (1, 1):
            raise ValueError("IMU yaw noise must be 1x1")

    @classmethod
    def from_sigma(cls, sigma):
        return cls([[float(sigma) ** 2]])

    def h(self, X):
        return np.atleast_2d(X)[:, 2:3]

    def jacobian(self, x):
        return np.array([[0.0, 0.0, 1.0]])


class VoPose(MeasurementModel):
    kind = MeasurementKind.VO_POSE
    angle_indices = (2,)

    def __init__(self, R):
        super().__init__(R)
        if self.R.shape != (3, 3):
            raise ValueError("VO pose noise must be 3x3")

    @classmethod
    def from_sigmas(cls, pos_sigma, yaw_sigma):
        return cls(np.diag([pos_sigma**2, pos_sigma**2, yaw_sigma**2]))

    def h(self, X):
        return np.atleast_2d(X).copy()

    def jacobian(self, x):
        return np.eye(3)


class LinearMeasurement(MeasurementModel):
    kind = MeasurementKind.LINEAR

    def __init__(self, H, R):
        super().__init__(R)
        self.H = np.atleast_2d(np.asarray(H, dtype=float))

    def h(self, X):
        return np.atleast_2d(X) @ self.H.T

    def jacobian(self, x):
        return self.H


@dataclass(frozen=True)
class UkfConfig:
    """Scaled unscented transform parameters (defaults alpha=1e-3, beta=2, kappa=0)."""

    alpha: float = 0.001
    beta: float = 2.0
    kappa: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")

    def lam(self, n: int) -> float:
        return self.alpha**2 * (n + self.kappa) - n

    def weights(self, n: int):
        """Mean and covariance weights for ``2n + 1`` sigma points."""
        lam = self.lam(n)
        c = n + lam
        if c == 0:
            raise ValueError("n + lambda must be nonzero")
        wm = np.full(2 * n + 1, 1.0 / (2.0 * c))
        wc = wm.copy()
        wm[0] = lam / c
        wc[0] = wm[0] + (1.0 - self.alpha**2 + self.beta)
        return wm, wc
