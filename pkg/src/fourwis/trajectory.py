"""Calibration trajectories with quintic (zero boundary velocity/acceleration) profiles."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np


class TrajectoryKind(str, enum.Enum):
    LINE_X = "LineX"
    LINE_Y = "LineY"
    CIRCLE_CCW = "CircleCCW"
    CIRCLE_CW = "CircleCW"
    SPIN_CCW = "SpinCCW"
    SPIN_CW = "SpinCW"

    def __str__(self):
        return self.value


ALL_KINDS = tuple(TrajectoryKind)

DEFAULT_SAMPLE_DT = 0.01
DEFAULT_CIRCLE_RADIUS = 0.5

# peak speed of a quintic profile is 1.875 * total / duration; these keep
# wheel contact speeds under 0.15 m/s with the nominal geometry.
_DEFAULTS = {
    TrajectoryKind.LINE_X: (1.0, 15.0),
    TrajectoryKind.LINE_Y: (1.0, 15.0),
    TrajectoryKind.CIRCLE_CCW: (2.0 * np.pi, 45.0),
    TrajectoryKind.CIRCLE_CW: (2.0 * np.pi, 45.0),
    TrajectoryKind.SPIN_CCW: (2.0 * np.pi, 15.0),
    TrajectoryKind.SPIN_CW: (2.0 * np.pi, 15.0),
}


@dataclass(frozen=True)
class TrajectorySpec:
    """One calibration motion.

    ``length_or_angle`` is metres for lines, the swept angle around the
    circle centre for circles, and the heading change for spins. Direction
    comes from ``kind``; the magnitude is non-negative.
    """

    kind: TrajectoryKind
    length_or_angle: float
    duration: float
    radius: float = DEFAULT_CIRCLE_RADIUS
    sample_dt: float = DEFAULT_SAMPLE_DT

    def __post_init__(self):
        object.__setattr__(self, "kind", TrajectoryKind(self.kind))
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if not self.sample_dt > 0:
            raise ValueError(f"sample_dt must be positive, got {self.sample_dt}")
        if self.length_or_angle < 0:
            raise ValueError("length_or_angle is a magnitude; direction comes from kind")
        if self.is_circle and not self.radius > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")

    @classmethod
    def default(cls, kind, **overrides) -> "TrajectorySpec":
        kind = TrajectoryKind(kind)
        total, duration = _DEFAULTS[kind]
        spec = cls(kind, total, duration)
        return replace(spec, **overrides) if overrides else spec

    @property
    def is_circle(self):
        return self.kind in (TrajectoryKind.CIRCLE_CCW, TrajectoryKind.CIRCLE_CW)

    @property
    def is_spin(self):
        return self.kind in (TrajectoryKind.SPIN_CCW, TrajectoryKind.SPIN_CW)

    @property
    def direction(self) -> float:
        return -1.0 if self.kind in (TrajectoryKind.CIRCLE_CW, TrajectoryKind.SPIN_CW) else 1.0

    def as_dict(self):
        return {
            "kind": self.kind.value,
            "length_or_angle": self.length_or_angle,
            "duration": self.duration,
            "radius": self.radius,
            "sample_dt": self.sample_dt,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def quintic_profile(total, duration, t):
    """Position, velocity and acceleration of ``total * (10 tau^3 - 15 tau^4 + 6 tau^5)``.

    ``t`` may be an array; every entry must lie in ``[0, duration]``.
    """
    t_arr = np.asarray(t, dtype=float)
    if duration <= 0:
        raise ValueError("duration must be positive")
    if np.any(t_arr < 0) or np.any(t_arr > duration):
        raise ValueError(f"t must lie in [0, {duration}]")
    tau = t_arr / duration
    pos = total * tau**3 * (10.0 - 15.0 * tau + 6.0 * tau**2)
    vel = total / duration * 30.0 * tau**2 * (1.0 - tau) ** 2
    acc = total / duration**2 * 60.0 * tau * (1.0 - tau) * (1.0 - 2.0 * tau)
    if np.ndim(pos) == 0:
        return float(pos), float(vel), float(acc)
    return pos, vel, acc


def sample_times(spec: TrajectorySpec) -> np.ndarray:
    n = int(round(spec.duration / spec.sample_dt))
    t = np.arange(n + 1) * spec.sample_dt
    t[-1] = min(t[-1], spec.duration)
    return t


def twist_at(spec: TrajectorySpec, t) -> np.ndarray:
    """Reference body twist at times ``t`` (continuous in t), shape ``(..., 3)``."""
    s, ds, _ = quintic_profile(spec.length_or_angle, spec.duration, np.asarray(t, dtype=float))
    s, ds = np.asarray(s), np.asarray(ds)
    out = np.zeros(s.shape + (3,))
    if spec.kind is TrajectoryKind.LINE_X:
        out[..., 0] = ds
    elif spec.kind is TrajectoryKind.LINE_Y:
        out[..., 1] = ds
    elif spec.is_circle:
        # heading stays fixed; the velocity vector turns with the swept angle
        sign = spec.direction
        out[..., 0] = spec.radius * ds * np.cos(s)
        out[..., 1] = sign * spec.radius * ds * np.sin(s)
    else:
        out[..., 2] = spec.direction * ds
    return out


def reference_pose_at(spec: TrajectorySpec, t) -> np.ndarray:
    """Analytic pose reached by integrating the reference twist from the origin."""
    s, _, _ = quintic_profile(spec.length_or_angle, spec.duration, np.asarray(t, dtype=float))
    s = np.asarray(s)
    out = np.zeros(s.shape + (3,))
    if spec.kind is TrajectoryKind.LINE_X:
        out[..., 0] = s
    elif spec.kind is TrajectoryKind.LINE_Y:
        out[..., 1] = s
    elif spec.is_circle:
        sign = spec.direction
        out[..., 0] = spec.radius * np.sin(s)
        out[..., 1] = sign * spec.radius * (1.0 - np.cos(s))
    else:
        out[..., 2] = spec.direction * s
    return out


def circle_center(spec: TrajectorySpec) -> np.ndarray:
    if not spec.is_circle:
        raise ValueError(f"{spec.kind} is not a circle")
    return np.array([0.0, spec.direction * spec.radius])


def reference_twists(spec: TrajectorySpec):
    """Sampled reference: ``(t, twists)`` with ``twists`` of shape ``(N, 3)``."""
    t = sample_times(spec)
    return t, twist_at(spec, t)
