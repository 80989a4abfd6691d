"""Synthetic recordings: commanded wheel frames, disturbed ground truth, IMU and VO."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Union

import numpy as np

from .kinematics import N_WHEELS, KinematicParams, wheels_from_body_twist, wrap_angle
from .odometry import FrameLog, check_time_order, integrate_twists, twists_for_log
from .trajectory import ALL_KINDS, TrajectoryKind, TrajectorySpec, reference_twists

DEFAULT_IMU_RATE = 100.0
DEFAULT_VO_RATE = 30.0
#: Gravity drift used when wall mode is switched on without an explicit value.
WALL_GRAVITY_DRIFT = 1e-3


@dataclass(frozen=True)
class DisturbanceConfig:
    """Non-systematic disturbances and sensor noise.

    None of the magnitudes come from measurements; they are tunable defaults.
    ``slip_ratio`` is a scalar or one value per wheel. ``process_*_sigma`` are
    white-noise densities (per sqrt(s)) added to the true motion, and
    ``truth_*_sigma`` is additive noise on the ground-truth channel itself
    (motion-capture measurement noise).
    """

    imu_yaw_sigma: float = 0.01
    imu_yaw_bias: float = 0.0
    vo_pos_sigma: float = 0.01
    vo_yaw_sigma: float = 0.02
    slip_ratio: Union[float, Sequence[float]] = 0.0
    gravity_drift: float = 0.0
    rng_seed: int = 0
    process_pos_sigma: float = 0.0
    process_yaw_sigma: float = 0.0
    truth_pos_sigma: float = 0.0
    truth_yaw_sigma: float = 0.0
    imu_rate: float = DEFAULT_IMU_RATE
    vo_rate: float = DEFAULT_VO_RATE

    def __post_init__(self):
        for name in (
            "imu_yaw_sigma",
            "vo_pos_sigma",
            "vo_yaw_sigma",
            "process_pos_sigma",
            "process_yaw_sigma",
            "truth_pos_sigma",
            "truth_yaw_sigma",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        slip = np.broadcast_to(np.asarray(self.slip_ratio, dtype=float), (N_WHEELS,))
        if np.any(slip < 0) or np.any(slip >= 1):
            raise ValueError("slip_ratio must lie in [0, 1)")
        if self.gravity_drift < 0:
            raise ValueError("gravity_drift is a magnitude and must be non-negative")
        if not (self.imu_rate > 0 and self.vo_rate > 0):
            raise ValueError("sensor rates must be positive")
        if not isinstance(self.slip_ratio, (int, float)):
            object.__setattr__(self, "slip_ratio", tuple(float(s) for s in slip))

    @classmethod
    def noiseless(cls, **overrides) -> "DisturbanceConfig":
        base = dict(imu_yaw_sigma=0.0, vo_pos_sigma=0.0, vo_yaw_sigma=0.0)
        base.update(overrides)
        return cls(**base)

    @property
    def slip(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.slip_ratio, dtype=float), (N_WHEELS,)).copy()

    def as_dict(self):
        d = dataclasses.asdict(self)
        if isinstance(d["slip_ratio"], tuple):
            d["slip_ratio"] = list(d["slip_ratio"])
        return d

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown disturbance keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(eq=False)
class Recording:
    """One trajectory execution with all synchronized channels.

    ``truth`` is ``(N, 3)`` aligned with ``frames``; ``imu_t``/``imu_yaw`` and
    ``vo_t``/``vo_pose`` are independent time-ordered channels.
    """

    frames: FrameLog
    truth: np.ndarray
    imu_t: np.ndarray
    imu_yaw: np.ndarray
    vo_t: np.ndarray
    vo_pose: np.ndarray
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.truth = np.asarray(self.truth, dtype=float).reshape(-1, 3)
        self.imu_t = np.asarray(self.imu_t, dtype=float).reshape(-1)
        self.imu_yaw = np.asarray(self.imu_yaw, dtype=float).reshape(-1)
        self.vo_t = np.asarray(self.vo_t, dtype=float).reshape(-1)
        self.vo_pose = np.asarray(self.vo_pose, dtype=float).reshape(-1, 3)
        if self.truth.shape[0] != len(self.frames):
            raise ValueError("truth must be aligned 1:1 with frames")
        if self.imu_t.size != self.imu_yaw.size or self.vo_t.size != self.vo_pose.shape[0]:
            raise ValueError("sensor timestamps and samples differ in length")
        for t in (self.frames.t, self.imu_t, self.vo_t):
            check_time_order(t)

    @property
    def kind(self) -> Optional[TrajectoryKind]:
        k = self.meta.get("kind")
        return None if k is None else TrajectoryKind(k)

    @property
    def t(self):
        return self.frames.t

    def __eq__(self, other):
        if not isinstance(other, Recording):
            return NotImplemented
        return (
            self.frames == other.frames
            and all(
                np.array_equal(a, b)
                for a, b in zip(
                    (self.truth, self.imu_t, self.imu_yaw, self.vo_t, self.vo_pose),
                    (other.truth, other.imu_t, other.imu_yaw, other.vo_t, other.vo_pose),
                )
            )
            and self.meta == other.meta
        )


class Dataset(Sequence):
    """Ordered collection of recordings plus generation metadata."""

    def __init__(self, recordings: Sequence[Recording], meta: Optional[Dict] = None):
        self.recordings: List[Recording] = list(recordings)
        self.meta = dict(meta or {})

    def __len__(self):
        return len(self.recordings)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return Dataset(self.recordings[k], self.meta)
        return self.recordings[k]

    def __iter__(self) -> Iterator[Recording]:
        return iter(self.recordings)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.meta == other.meta and self.recordings == other.recordings

    def by_kind(self, kind) -> "Dataset":
        kind = TrajectoryKind(kind)
        return Dataset([r for r in self.recordings if r.kind == kind], self.meta)

    def kinds(self) -> List[TrajectoryKind]:
        seen = []
        for r in self.recordings:
            if r.kind is not None and r.kind not in seen:
                seen.append(r.kind)
        return seen


def command_frames(spec: TrajectorySpec, params: KinematicParams) -> FrameLog:
    """Encoder log of ``spec`` commanded through the inverse kinematics of ``params``."""
    t, twists = reference_twists(spec)
    n = t.size
    speed = np.zeros((n, N_WHEELS))
    steer = np.zeros((n, N_WHEELS))
    prev = None
    for k in range(n):
        speed[k], steer[k] = wheels_from_body_twist(params, twists[k], previous_steer=prev)
        prev = steer[k]
    steer_rate = np.zeros_like(steer)
    if n > 1:
        steer_rate[1:] = wrap_angle(np.diff(steer, axis=0)) / np.diff(t)[:, None]
    return FrameLog(t, speed, steer, speed / params.wheel_radius, steer_rate)


def _sample_channel(t_frames, truth, rate):
    """Truth linearly interpolated (heading via unwrapped angle) at ``rate`` Hz."""
    duration = t_frames[-1] - t_frames[0]
    n = int(np.floor(duration * rate + 1e-9)) + 1
    ts = t_frames[0] + np.arange(n) / rate
    ts = ts[ts <= t_frames[-1]]
    theta = np.unwrap(truth[:, 2])
    pose = np.column_stack(
        [np.interp(ts, t_frames, truth[:, 0]), np.interp(ts, t_frames, truth[:, 1]), np.interp(ts, t_frames, theta)]
    )
    return ts, pose


def simulate_recording(
    true_params: KinematicParams,
    spec: TrajectorySpec,
    disturbance: DisturbanceConfig,
    *,
    command_params: Optional[KinematicParams] = None,
    initial=(0.0, 0.0, 0.0),
    meta: Optional[Dict] = None,
) -> Recording:
    """Execute ``spec`` on a robot whose real geometry is ``true_params``.

    Wheel commands come from inverting the reference twist with
    ``command_params`` (the controller's belief, default ``true_params``).
    Encoders report the commanded wheel rates; the true motion uses the
    forward model under ``true_params`` with slip-reduced contact speeds,
    optional process noise, and gravity drift along world -X.
    """
    command_params = true_params if command_params is None else command_params
    rng = np.random.default_rng(disturbance.rng_seed)
    frames = command_frames(spec, command_params)
    t = frames.t
    n = t.size
    dt = np.diff(t)

    actual = frames.with_wheel_rate(frames.wheel_rate * (1.0 - disturbance.slip))
    twists = twists_for_log(true_params, actual)
    yaw_noise = pos_noise = None
    if disturbance.process_yaw_sigma > 0 or disturbance.process_pos_sigma > 0:
        sq = np.sqrt(dt)
        yaw_noise = rng.standard_normal(n - 1) * disturbance.process_yaw_sigma * sq
        pos_noise = rng.standard_normal((n - 1, 2)) * disturbance.process_pos_sigma * sq[:, None]
    truth = integrate_twists(t, twists, np.asarray(initial, float), yaw_noise=yaw_noise, pos_noise=pos_noise, wrap=False)
    if disturbance.gravity_drift > 0:
        truth[:, 0] -= 0.5 * disturbance.gravity_drift * (t - t[0]) ** 2

    imu_t, imu_truth = _sample_channel(t, truth, disturbance.imu_rate)
    imu_yaw = wrap_angle(
        imu_truth[:, 2] + disturbance.imu_yaw_bias + rng.standard_normal(imu_t.size) * disturbance.imu_yaw_sigma
    )
    vo_t, vo_truth = _sample_channel(t, truth, disturbance.vo_rate)
    vo_noise = rng.standard_normal((vo_t.size, 3)) * np.array(
        [disturbance.vo_pos_sigma, disturbance.vo_pos_sigma, disturbance.vo_yaw_sigma]
    )
    vo_pose = vo_truth + vo_noise
    vo_pose[:, 2] = wrap_angle(vo_pose[:, 2])

    if disturbance.truth_pos_sigma > 0 or disturbance.truth_yaw_sigma > 0:
        truth = truth + rng.standard_normal((n, 3)) * np.array(
            [disturbance.truth_pos_sigma, disturbance.truth_pos_sigma, disturbance.truth_yaw_sigma]
        )
    truth[:, 2] = wrap_angle(truth[:, 2])

    info = {"kind": spec.kind.value, "seed": int(disturbance.rng_seed)}
    if meta:
        info.update(meta)
    return Recording(frames, truth, imu_t, imu_yaw, vo_t, vo_pose, info)


def derive_seeds(master_seed: int, count: int) -> List[int]:
    """Distinct reproducible 32-bit seeds from one master seed."""
    children = np.random.SeedSequence(int(master_seed)).spawn(count)
    return [int(c.generate_state(1)[0]) for c in children]


def make_calibration_dataset(
    true_params: KinematicParams,
    disturbance: DisturbanceConfig,
    *,
    specs: Optional[Sequence[TrajectorySpec]] = None,
    repetitions: int = 5,
    master_seed: Optional[int] = None,
    command_params: Optional[KinematicParams] = None,
    sample_dt: Optional[float] = None,
) -> Dataset:
    """Six trajectory kinds times ``repetitions`` (30 recordings by default)."""
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    if specs is None:
        specs = [TrajectorySpec.default(k) for k in ALL_KINDS]
    if sample_dt is not None:
        specs = [dataclasses.replace(s, sample_dt=sample_dt) for s in specs]
    master_seed = disturbance.rng_seed if master_seed is None else master_seed
    seeds = derive_seeds(master_seed, len(specs) * repetitions)
    recordings = []
    for i, spec in enumerate(specs):
        for rep in range(repetitions):
            seed = seeds[i * repetitions + rep]
            dist = dataclasses.replace(disturbance, rng_seed=seed)
            recordings.append(
                simulate_recording(
                    true_params,
                    spec,
                    dist,
                    command_params=command_params,
                    meta={"repetition": rep, "id": f"{spec.kind.value}_{rep}"},
                )
            )
    meta = {
        "master_seed": int(master_seed),
        "true_params": true_params.as_dict(),
        "command_params": (command_params or true_params).as_dict(),
        "disturbance": disturbance.as_dict(),
        "specs": [s.as_dict() for s in specs],
        "repetitions": repetitions,
    }
    return Dataset(recordings, meta)
