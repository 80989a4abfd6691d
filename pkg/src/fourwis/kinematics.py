"""Kinematic model of a four-wheel independent steer / independent drive robot.

Wheel indices follow the quadrant order used throughout the package::

    wheel 1: front-left  (+x, +y)
    wheel 2: rear-left   (-x, +y)
    wheel 3: rear-right  (-x, -y)
    wheel 4: front-right (+x, -y)

All quantities are SI (m, rad, s).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

N_WHEELS = 4

#: Ordering of the 12-entry calibration vector.
PARAM_NAMES = tuple(
    [f"x_w{i}" for i in range(1, 5)]
    + [f"y_w{i}" for i in range(1, 5)]
    + [f"r_{i}" for i in range(1, 5)]
)

NOMINAL_HALF_LENGTH = 0.1125
NOMINAL_HALF_WIDTH = 0.1125
NOMINAL_RADIUS = 0.0254
_SIGN_X = np.array([1.0, -1.0, -1.0, 1.0])
_SIGN_Y = np.array([1.0, 1.0, -1.0, -1.0])


def wrap_angle(angle):
    """Wrap angles to [-pi, pi); values already in range are returned unchanged."""
    a = np.asarray(angle, dtype=float)
    wrapped = np.where((a >= -np.pi) & (a < np.pi), a, np.mod(a + np.pi, 2.0 * np.pi) - np.pi)
    # the shift can round up onto +pi
    wrapped = np.where(wrapped >= np.pi, -np.pi, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def _as_wheel_vector(values, name):
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.shape != (N_WHEELS,):
        raise ValueError(f"{name} must have {N_WHEELS} entries, got shape {np.shape(values)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class KinematicParams:
    """Wheel positions in the robot frame and wheel radii."""

    wheel_x: np.ndarray
    wheel_y: np.ndarray
    wheel_radius: np.ndarray

    def __post_init__(self):
        wx = _as_wheel_vector(self.wheel_x, "wheel_x")
        wy = _as_wheel_vector(self.wheel_y, "wheel_y")
        r = _as_wheel_vector(self.wheel_radius, "wheel_radius")
        if np.any(r <= 0):
            raise ValueError(f"wheel radii must be positive, got {r.tolist()}")
        if np.any(wx**2 + wy**2 == 0):
            raise ValueError("wheel position (0, 0) makes the yaw-rate gain undefined")
        object.__setattr__(self, "wheel_x", wx)
        object.__setattr__(self, "wheel_y", wy)
        object.__setattr__(self, "wheel_radius", r)

    @classmethod
    def nominal(cls) -> "KinematicParams":
        """CAD values: 112.5 mm half-dimensions and 25.4 mm wheels."""
        return cls(
            _SIGN_X * NOMINAL_HALF_LENGTH,
            _SIGN_Y * NOMINAL_HALF_WIDTH,
            np.full(N_WHEELS, NOMINAL_RADIUS),
        )

    @classmethod
    def from_vector(cls, z) -> "KinematicParams":
        z = np.asarray(z, dtype=float).reshape(-1)
        if z.shape != (3 * N_WHEELS,):
            raise ValueError(f"parameter vector must have 12 entries, got {z.shape}")
        return cls(z[0:4], z[4:8], z[8:12])

    @classmethod
    def from_mm(cls, wheel_x, wheel_y, wheel_radius) -> "KinematicParams":
        return cls(
            np.asarray(wheel_x, float) / 1000.0,
            np.asarray(wheel_y, float) / 1000.0,
            np.asarray(wheel_radius, float) / 1000.0,
        )

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.wheel_x, self.wheel_y, self.wheel_radius])

    def perturbed(self, relative: Mapping[str, float]) -> "KinematicParams":
        """Scale named entries by ``1 + relative[name]``, e.g. ``{"r_1": 0.03}``."""
        z = self.to_vector()
        for name, rel in relative.items():
            try:
                j = PARAM_NAMES.index(name)
            except ValueError:
                raise KeyError(f"unknown parameter {name!r}; expected one of {PARAM_NAMES}") from None
            z[j] *= 1.0 + float(rel)
        return KinematicParams.from_vector(z)

    def as_dict(self) -> dict:
        return {
            "wheel_x": self.wheel_x.tolist(),
            "wheel_y": self.wheel_y.tolist(),
            "wheel_radius": self.wheel_radius.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "KinematicParams":
        unknown = set(data) - {"wheel_x", "wheel_y", "wheel_radius"}
        if unknown:
            raise ValueError(f"unknown keys in parameter record: {sorted(unknown)}")
        return cls(data["wheel_x"], data["wheel_y"], data["wheel_radius"])

    def __eq__(self, other):
        if not isinstance(other, KinematicParams):
            return NotImplemented
        return bool(np.array_equal(self.to_vector(), other.to_vector()))

    def __repr__(self):
        return (
            f"KinematicParams(wheel_x={self.wheel_x.tolist()}, "
            f"wheel_y={self.wheel_y.tolist()}, wheel_radius={self.wheel_radius.tolist()})"
        )


@dataclass(frozen=True)
class BodyTwist:
    vx: float
    vy: float
    omega: float

    def __post_init__(self):
        if not all(np.isfinite([self.vx, self.vy, self.omega])):
            raise ValueError("body twist must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.omega])

    @classmethod
    def from_array(cls, arr) -> "BodyTwist":
        vx, vy, om = np.asarray(arr, dtype=float).reshape(3)
        return cls(float(vx), float(vy), float(om))


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    @classmethod
    def from_array(cls, arr) -> "Pose2D":
        x, y, th = np.asarray(arr, dtype=float).reshape(3)
        return cls(float(x), float(y), float(th))


@dataclass(frozen=True, eq=False)
class WheelFrame:
    """One timestamped sample of wheel commands and encoder readings."""

    t: float
    speed: np.ndarray
    steer: np.ndarray
    wheel_rate: np.ndarray
    steer_rate: np.ndarray = field(default_factory=lambda: np.zeros(N_WHEELS))

    def __post_init__(self):
        object.__setattr__(self, "speed", _as_wheel_vector(self.speed, "speed"))
        object.__setattr__(self, "steer", _as_wheel_vector(wrap_angle(self.steer), "steer"))
        object.__setattr__(self, "wheel_rate", _as_wheel_vector(self.wheel_rate, "wheel_rate"))
        object.__setattr__(self, "steer_rate", _as_wheel_vector(self.steer_rate, "steer_rate"))

    @classmethod
    def from_speeds(cls, t, speed, steer, params: KinematicParams, steer_rate=None) -> "WheelFrame":
        """Build a frame whose encoder rates are consistent with ``params``."""
        speed = np.asarray(speed, dtype=float)
        return cls(
            float(t),
            speed,
            steer,
            speed / params.wheel_radius,
            np.zeros(N_WHEELS) if steer_rate is None else steer_rate,
        )


def yaw_gains(wheel_x, wheel_y, steer):
    """Per-wheel gain K_i mapping wheel speed to yaw rate.

    ``K_i = (-y_i cos(d_i) + x_i sin(d_i)) / (4 x_i^2 + 4 y_i^2)``; broadcasts
    over leading axes of ``steer``.
    """
    return (-wheel_y * np.cos(steer) + wheel_x * np.sin(steer)) / (4.0 * (wheel_x**2 + wheel_y**2))


def body_twist_array(params: KinematicParams, speeds, steers) -> np.ndarray:
    """Vectorized closed-form forward kinematics; returns ``(..., 3)``."""
    speeds = np.asarray(speeds, dtype=float)
    steers = np.asarray(steers, dtype=float)
    vx = np.sum(np.cos(steers) * speeds, axis=-1) / 4.0
    vy = np.sum(np.sin(steers) * speeds, axis=-1) / 4.0
    om = np.sum(yaw_gains(params.wheel_x, params.wheel_y, steers) * speeds, axis=-1)
    return np.stack([vx, vy, om], axis=-1)


def body_twist_from_wheels(params: KinematicParams, speeds, steers) -> BodyTwist:
    """Body twist (vx, vy, omega) from four wheel speeds and steering angles."""
    speeds = _as_wheel_vector(speeds, "speeds")
    steers = _as_wheel_vector(steers, "steers")
    return BodyTwist.from_array(body_twist_array(params, speeds, steers))


def stacked_system(params: KinematicParams, steers):
    """The 8x3 constraint matrix P and the 8x4 steering matrix R.

    Rows come in (x, y) pairs per wheel so that ``P @ twist = R @ speeds``.
    """
    steers = _as_wheel_vector(steers, "steers")
    P = np.zeros((2 * N_WHEELS, 3))
    R = np.zeros((2 * N_WHEELS, N_WHEELS))
    for i in range(N_WHEELS):
        P[2 * i] = [1.0, 0.0, -params.wheel_y[i]]
        P[2 * i + 1] = [0.0, 1.0, params.wheel_x[i]]
        R[2 * i, i] = np.cos(steers[i])
        R[2 * i + 1, i] = np.sin(steers[i])
    return P, R


def body_twist_least_squares(params: KinematicParams, speeds, steers) -> BodyTwist:
    """Least-squares solution of the stacked constraint system.

    Agrees with :func:`body_twist_from_wheels` whenever the wheel layout is
    centred (sum of x_i and y_i zero) and all wheels are equidistant from the
    origin, which covers the nominal geometry.
    """
    P, R = stacked_system(params, steers)
    rhs = R @ _as_wheel_vector(speeds, "speeds")
    sol, *_ = np.linalg.lstsq(P, rhs, rcond=None)
    return BodyTwist.from_array(sol)


def wheels_from_body_twist(params: KinematicParams, twist, previous_steer=None):
    """Wheel speeds and steering angles realising a body twist.

    A wheel with zero contact velocity keeps ``previous_steer`` (or 0 when no
    previous command exists) instead of the undefined ``atan2(0, 0)``.
    """
    if isinstance(twist, BodyTwist):
        twist = twist.as_array()
    vx, vy, om = np.asarray(twist, dtype=float).reshape(3)
    vxi = vx - params.wheel_y * om
    vyi = vy + params.wheel_x * om
    speeds = np.hypot(vxi, vyi)
    steers = wrap_angle(np.arctan2(vyi, vxi))
    idle = speeds == 0.0
    if np.any(idle):
        fallback = np.zeros(N_WHEELS) if previous_steer is None else _as_wheel_vector(previous_steer, "previous_steer")
        steers = np.where(idle, fallback, steers)
    return speeds, steers


def rotate(theta, vec):
    """Rotate planar vectors ``(..., 2)`` (or twists ``(..., 3)``) by theta."""
    vec = np.asarray(vec, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = vec.copy()
    out[..., 0] = c * vec[..., 0] - s * vec[..., 1]
    out[..., 1] = s * vec[..., 0] + c * vec[..., 1]
    return out


def pose_derivative(params: KinematicParams, pose, frame: WheelFrame) -> np.ndarray:
    """World-frame pose rate (dx, dy, dtheta) at ``pose`` for one wheel frame.

    Wheel speeds are taken as encoder rate times the radius in ``params``.
    """
    theta = pose.theta if isinstance(pose, Pose2D) else float(np.asarray(pose)[2])
    v = frame.wheel_rate * params.wheel_radius
    ang = frame.steer + theta
    dx = np.sum(np.cos(ang) * v) / 4.0
    dy = np.sum(np.sin(ang) * v) / 4.0
    dth = np.sum(yaw_gains(params.wheel_x, params.wheel_y, frame.steer) * v)
    return np.array([dx, dy, dth])
