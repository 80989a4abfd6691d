"""Dead-reckoning integration of the wheel kinematic model.

The integrator is the explicit midpoint rule with wheel inputs held constant
over each sample interval. Because the yaw rate does not depend on the pose,
the midpoint heading is exact and the whole update reduces to::

    theta_mid = theta + omega * dt / 2
    x  += dt * R(theta_mid) [vx, vy]
    theta += omega * dt
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .kinematics import (
    N_WHEELS,
    KinematicParams,
    Pose2D,
    WheelFrame,
    body_twist_array,
    wrap_angle,
    yaw_gains,
)


class FrameLog:
    """Column-oriented sequence of :class:`WheelFrame` samples.

    Indexing returns a :class:`WheelFrame`; the arrays are read-only.
    """

    def __init__(self, t, speed, steer, wheel_rate, steer_rate=None):
        self.t = np.array(t, dtype=float).reshape(-1)
        n = self.t.size
        self.speed = np.array(speed, dtype=float).reshape(n, N_WHEELS)
        self.steer = np.asarray(wrap_angle(np.array(steer, dtype=float).reshape(n, N_WHEELS)), dtype=float).reshape(n, N_WHEELS)
        self.wheel_rate = np.array(wheel_rate, dtype=float).reshape(n, N_WHEELS)
        if steer_rate is None:
            steer_rate = np.zeros((n, N_WHEELS))
        self.steer_rate = np.array(steer_rate, dtype=float).reshape(n, N_WHEELS)
        for arr in (self.t, self.speed, self.steer, self.wheel_rate, self.steer_rate):
            arr.setflags(write=False)

    @classmethod
    def from_frames(cls, frames: Iterable[WheelFrame]) -> "FrameLog":
        frames = list(frames)
        if not frames:
            return cls.empty()
        return cls(
            [f.t for f in frames],
            [f.speed for f in frames],
            [f.steer for f in frames],
            [f.wheel_rate for f in frames],
            [f.steer_rate for f in frames],
        )

    @classmethod
    def empty(cls) -> "FrameLog":
        z = np.zeros((0, N_WHEELS))
        return cls(np.zeros(0), z, z, z, z)

    def __len__(self):
        return self.t.size

    def __getitem__(self, k):
        if isinstance(k, slice):
            return FrameLog(self.t[k], self.speed[k], self.steer[k], self.wheel_rate[k], self.steer_rate[k])
        return WheelFrame(float(self.t[k]), self.speed[k], self.steer[k], self.wheel_rate[k], self.steer_rate[k])

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def __eq__(self, other):
        if not isinstance(other, FrameLog):
            return NotImplemented
        return all(
            np.array_equal(a, b)
            for a, b in zip(
                (self.t, self.speed, self.steer, self.wheel_rate, self.steer_rate),
                (other.t, other.speed, other.steer, other.wheel_rate, other.steer_rate),
            )
        )

    def with_wheel_rate(self, wheel_rate) -> "FrameLog":
        return FrameLog(self.t, self.speed, self.steer, wheel_rate, self.steer_rate)


FramesLike = Union[FrameLog, Sequence[WheelFrame]]


def as_frame_log(frames: FramesLike) -> FrameLog:
    if isinstance(frames, FrameLog):
        return frames
    return FrameLog.from_frames(frames)


def check_time_order(t) -> None:
    """Raise if timestamps are not strictly increasing, naming the first bad index."""
    t = np.asarray(t, dtype=float)
    if t.size < 2:
        return
    bad = np.flatnonzero(~(np.diff(t) > 0))
    if bad.size:
        k = int(bad[0]) + 1
        raise ValueError(f"timestamps must be strictly increasing; violation at index {k} (t={t[k]!r} after {t[k - 1]!r})")


@dataclass(frozen=True, eq=False)
class OdometryState:
    pose: Pose2D
    wheel_angle: np.ndarray = field(default_factory=lambda: np.zeros(N_WHEELS))
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "wheel_angle", np.array(self.wheel_angle, dtype=float).reshape(N_WHEELS))


def _midpoint_increments(theta0, twist, dt, yaw_noise=None):
    """Headings and world-frame position increments for a run of steps."""
    dtheta = twist[:, 2] * dt
    if yaw_noise is not None:
        dtheta = dtheta + yaw_noise
    theta = np.concatenate([[theta0], theta0 + np.cumsum(dtheta)])
    mid = theta[:-1] + 0.5 * twist[:, 2] * dt
    c, s = np.cos(mid), np.sin(mid)
    dx = dt * (c * twist[:, 0] - s * twist[:, 1])
    dy = dt * (s * twist[:, 0] + c * twist[:, 1])
    return theta, dx, dy


def step(params: KinematicParams, state: OdometryState, frame: WheelFrame, dt: float) -> OdometryState:
    """Advance the odometry state by ``dt`` using ``frame``'s inputs."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    speeds = frame.wheel_rate * params.wheel_radius
    twist = body_twist_array(params, speeds, frame.steer)
    mid = state.pose.theta + 0.5 * twist[2] * dt
    c, s = np.cos(mid), np.sin(mid)
    pose = Pose2D(
        state.pose.x + dt * (c * twist[0] - s * twist[1]),
        state.pose.y + dt * (s * twist[0] + c * twist[1]),
        state.pose.theta + twist[2] * dt,
    )
    return OdometryState(pose, state.wheel_angle + frame.wheel_rate * dt, state.t + dt)


def twists_for_log(params: KinematicParams, frames: FrameLog) -> np.ndarray:
    """Body twist at every frame, using encoder rate times radius as speed."""
    return body_twist_array(params, frames.wheel_rate * params.wheel_radius, frames.steer)


def integrate_twists(t, twists, initial, *, yaw_noise=None, pos_noise=None, wrap=True) -> np.ndarray:
    """Integrate sampled body twists (held over each interval) from ``initial``.

    Returns an ``(N, 3)`` pose array aligned with ``t``. Optional per-step
    additive noise (arrays of length N-1) is injected after each update.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((t.size, 3))
    if t.size == 0:
        return out
    x0, y0, th0 = np.asarray(initial.as_array() if isinstance(initial, Pose2D) else initial, dtype=float)
    dt = np.diff(t)
    theta, dx, dy = _midpoint_increments(th0, np.asarray(twists, dtype=float)[:-1], dt, yaw_noise)
    if pos_noise is not None:
        dx = dx + pos_noise[:, 0]
        dy = dy + pos_noise[:, 1]
    out[0, 0], out[0, 1] = x0, y0
    out[1:, 0] = x0 + np.cumsum(dx)
    out[1:, 1] = y0 + np.cumsum(dy)
    out[:, 2] = wrap_angle(theta) if wrap else theta
    return out


def integrate_recording(params: KinematicParams, frames: FramesLike, initial) -> np.ndarray:
    """Dead-reckoned pose trace, one row ``(x, y, theta)`` per frame.

    The first row equals ``initial``; heading is wrapped on output only.
    """
    frames = as_frame_log(frames)
    if len(frames) == 0:
        return np.empty((0, 3))
    check_time_order(frames.t)
    return integrate_twists(frames.t, twists_for_log(params, frames), initial)


def wheel_angles(frames: FramesLike) -> np.ndarray:
    """Accumulated wheel rotation angles (rad), continuous, shape ``(N, 4)``."""
    frames = as_frame_log(frames)
    out = np.zeros((len(frames), N_WHEELS))
    if len(frames) > 1:
        out[1:] = np.cumsum(frames.wheel_rate[:-1] * np.diff(frames.t)[:, None], axis=0)
    return out


def batch_integrate(wheel_x, wheel_y, wheel_radius, frames: FrameLog, initial) -> np.ndarray:
    """Integrate one frame log under many parameter sets at once.

    ``wheel_x`` etc. have shape ``(P, 4)``; the result has shape ``(P, N, 3)``
    with unwrapped heading.
    """
    wheel_x, wheel_y, wheel_radius = (np.atleast_2d(np.asarray(a, float)) for a in (wheel_x, wheel_y, wheel_radius))
    cos_d, sin_d = np.cos(frames.steer), np.sin(frames.steer)
    rate = frames.wheel_rate
    # (N,4) @ (4,P) -> (N,P)
    vx = (cos_d * rate) @ wheel_radius.T / 4.0
    vy = (sin_d * rate) @ wheel_radius.T / 4.0
    d2 = 4.0 * (wheel_x**2 + wheel_y**2)
    om = (cos_d * rate) @ (-wheel_y * wheel_radius / d2).T + (sin_d * rate) @ (wheel_x * wheel_radius / d2).T
    x0, y0, th0 = np.asarray(initial, dtype=float)
    dt = np.diff(frames.t)[:, None]
    n, p = frames.t.size, wheel_x.shape[0]
    out = np.empty((p, n, 3))
    out[:, 0, :] = (x0, y0, th0)
    if n == 1:
        return out
    dtheta = om[:-1] * dt
    theta = th0 + np.cumsum(dtheta, axis=0)
    mid = np.concatenate([np.full((1, p), th0), theta[:-1]]) + 0.5 * dtheta
    c, s = np.cos(mid), np.sin(mid)
    out[:, 1:, 0] = (x0 + np.cumsum(dt * (c * vx[:-1] - s * vy[:-1]), axis=0)).T
    out[:, 1:, 1] = (y0 + np.cumsum(dt * (s * vx[:-1] + c * vy[:-1]), axis=0)).T
    out[:, 1:, 2] = theta.T
    return out
