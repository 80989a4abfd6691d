"""Time-ordered sensor fusion over a recording."""
from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..kinematics import KinematicParams, wrap_angle
from ..odometry import check_time_order, integrate_recording
from ..simulation import DisturbanceConfig, Recording
from .filters import SingularInnovationError, ekf_predict, ekf_update, ukf_predict, ukf_update
from .models import GaussianBelief, ImuYaw, MeasurementModel, OdometryProcess, ProcessModel, UkfConfig, VoPose


class FilterKind(str, enum.Enum):
    ODOM_ONLY = "OdomOnly"
    EKF = "EKF"
    UKF = "UKF"

    @classmethod
    def parse(cls, value) -> "FilterKind":
        if isinstance(value, FilterKind):
            return value
        for k in cls:
            if str(value).strip().lower() in (k.value.lower(), k.name.lower()):
                return k
        raise ValueError(f"unknown filter {value!r}; choose OdomOnly, EKF or UKF")


@dataclass(frozen=True)
class FilterNoiseConfig:
    """Filter-side noise assumptions.

    ``q_pos`` and ``q_yaw`` are process noise densities (per sqrt(s)); the
    measurement sigmas default to the simulator's sensor defaults so the
    filter is matched to a default recording.
    """

    q_pos: float = 0.01
    q_yaw: float = 0.01
    imu_yaw_sigma: float = 0.01
    vo_pos_sigma: float = 0.01
    vo_yaw_sigma: float = 0.02
    initial_pos_sigma: float = 1e-3
    initial_yaw_sigma: float = 1e-3
    use_imu: bool = True
    use_vo: bool = True

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, bool) and v < 0:
                raise ValueError(f"{f.name} must be non-negative")

    @classmethod
    def matched(cls, disturbance: DisturbanceConfig, **overrides) -> "FilterNoiseConfig":
        """Noise config equal to what ``disturbance`` injects."""
        base = dict(
            q_pos=disturbance.process_pos_sigma,
            q_yaw=disturbance.process_yaw_sigma,
            imu_yaw_sigma=disturbance.imu_yaw_sigma,
            vo_pos_sigma=disturbance.vo_pos_sigma,
            vo_yaw_sigma=disturbance.vo_yaw_sigma,
        )
        base.update(overrides)
        return cls(**base)

    @property
    def Q(self) -> np.ndarray:
        return np.diag([self.q_pos**2, self.q_pos**2, self.q_yaw**2])

    @property
    def P0(self) -> np.ndarray:
        return np.diag([self.initial_pos_sigma**2, self.initial_pos_sigma**2, self.initial_yaw_sigma**2])

    def imu_model(self) -> ImuYaw:
        return ImuYaw.from_sigma(self.imu_yaw_sigma)

    def vo_model(self) -> VoPose:
        return VoPose.from_sigmas(self.vo_pos_sigma, self.vo_yaw_sigma)

    def as_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown filter noise keys: {sorted(unknown)}")
        return cls(**data)


class FusionFilter:
    """Sequential predict/update state machine holding one belief.

    The current input is held (zero-order hold) until replaced; ``advance``
    predicts up to a time and is a no-op for zero duration.
    """

    def __init__(self, process: ProcessModel, kind="EKF", belief: GaussianBelief = None, t0: float = 0.0, ukf=UkfConfig()):
        self.process = process
        self.kind = FilterKind.parse(kind)
        self.ukf = ukf
        self.belief = belief
        self.t = float(t0)
        self.input = None
        self.n_predict = 0
        self.n_update = 0
        self.skipped: List[Dict] = []

    def set_input(self, u):
        self.input = u

    def advance(self, t: float):
        dt = float(t) - self.t
        if dt < 0:
            raise ValueError(f"cannot predict backwards from t={self.t!r} to t={t!r}")
        if dt == 0 or self.input is None:
            self.t = float(t)
            return self.belief
        if self.kind is FilterKind.UKF:
            self.belief = ukf_predict(self.belief, self.input, dt, self.process, self.ukf)
        else:
            self.belief = ekf_predict(self.belief, self.input, dt, self.process)
        self.t = float(t)
        self.n_predict += 1
        return self.belief

    def update(self, z, model: MeasurementModel):
        if self.kind is FilterKind.ODOM_ONLY:
            return self.belief
        angles = self.process.angle_indices
        try:
            if self.kind is FilterKind.UKF:
                self.belief = ukf_update(self.belief, z, model, self.ukf, state_angles=angles)
            else:
                self.belief = ekf_update(self.belief, z, model, state_angles=angles)
            self.n_update += 1
        except SingularInnovationError:
            self.skipped.append({"t": self.t, "measurement": model.kind.value})
        return self.belief


@dataclass(eq=False)
class EstimatorTrace:
    """Filter output aligned with the recording's frame timestamps."""

    filter: str
    t: np.ndarray
    pose: np.ndarray
    cov: np.ndarray
    truth: np.ndarray
    diagnostics: Dict = field(default_factory=dict)
    ukf: Optional[UkfConfig] = None

    @property
    def error(self) -> np.ndarray:
        e = self.truth - self.pose
        e[:, 2] = wrap_angle(e[:, 2])
        return e

    @property
    def nees(self) -> np.ndarray:
        e = self.error
        out = np.full(e.shape[0], np.nan)
        for k in range(e.shape[0]):
            try:
                out[k] = e[k] @ np.linalg.solve(self.cov[k], e[k])
            except np.linalg.LinAlgError:
                pass
        return out

    @property
    def final_position_error(self) -> float:
        return float(np.hypot(*self.error[-1, :2]))


def _measurement_events(recording: Recording, noise: FilterNoiseConfig):
    times, models, values = [], [], []
    if noise.use_imu and recording.imu_t.size:
        m = noise.imu_model()
        times.append(recording.imu_t)
        models += [m] * recording.imu_t.size
        values += [np.array([v]) for v in recording.imu_yaw]
    if noise.use_vo and recording.vo_t.size:
        m = noise.vo_model()
        times.append(recording.vo_t)
        models += [m] * recording.vo_t.size
        values += list(recording.vo_pose)
    if not times:
        return np.empty(0), [], []
    t = np.concatenate(times)
    order = np.argsort(t, kind="stable")  # IMU before VO on equal stamps
    return t[order], [models[i] for i in order], [values[i] for i in order]


def run_estimator(
    recording: Recording,
    params: KinematicParams,
    filter="EKF",
    noise: Optional[FilterNoiseConfig] = None,
    *,
    ukf: UkfConfig = UkfConfig(),
    initial=None,
) -> EstimatorTrace:
    """Fuse odometry with IMU yaw and VO pose over one recording.

    Odometry drives the prediction on every wheel frame; each sensor sample
    triggers a prediction up to its timestamp followed by an update (a
    sample at a frame time is applied after the prediction reaching it).
    ``OdomOnly`` ignores the sensors and its poses equal
    :func:`~fourwis.odometry.integrate_recording`. The initial mean defaults
    to the first truth sample.
    """
    kind = FilterKind.parse(filter)
    noise = FilterNoiseConfig() if noise is None else noise
    frames = recording.frames
    for t in (frames.t, recording.imu_t, recording.vo_t):
        check_time_order(t)
    n = len(frames)
    x0 = recording.truth[0] if initial is None else np.asarray(initial, dtype=float)
    engine = FusionFilter(OdometryProcess(params, noise.Q), kind, GaussianBelief(x0, noise.P0), frames.t[0], ukf)

    if kind is FilterKind.ODOM_ONLY:
        tm, models, values = np.empty(0), [], []
    else:
        tm, models, values = _measurement_events(recording, noise)
    j = int(np.searchsorted(tm, frames.t[0], side="left"))
    ignored = j

    pose = np.empty((n, 3))
    cov = np.empty((n, 3, 3))
    for k in range(n):
        tk = frames.t[k]
        while j < tm.size and tm[j] <= tk:
            engine.advance(tm[j])
            engine.update(values[j], models[j])
            j += 1
        engine.advance(tk)
        pose[k] = engine.belief.mean
        cov[k] = engine.belief.cov
        engine.set_input(frames[k])
    ignored += tm.size - j

    if kind is FilterKind.ODOM_ONLY:
        pose = integrate_recording(params, frames, x0)
    else:
        pose[:, 2] = wrap_angle(pose[:, 2])
    diagnostics = {
        "predicts": engine.n_predict,
        "updates": engine.n_update,
        "skipped_updates": engine.skipped,
        "ignored_measurements": int(ignored),
    }
    return EstimatorTrace(kind.value, frames.t.copy(), pose, cov, recording.truth.copy(), diagnostics, ukf)


class PoseFilter(BaseEstimator):
    """Estimator wrapper around :func:`run_estimator`.

    ``fit`` only fixes the kinematic parameters (nominal unless given);
    ``predict`` returns one ``(N, 3)`` pose trace per recording and
    ``score`` the negative mean final-position error.
    """

    def __init__(self, filter="EKF", params=None, noise=None, alpha=0.001, beta=2.0, kappa=0.0):
        self.filter = filter
        self.params = params
        self.noise = noise
        self.alpha = alpha
        self.beta = beta
        self.kappa = kappa

    def fit(self, X=None, y=None):
        self.kind_ = FilterKind.parse(self.filter)
        self.ukf_ = UkfConfig(self.alpha, self.beta, self.kappa)
        p = self.params
        if p is None:
            p = KinematicParams.nominal()
        elif not isinstance(p, KinematicParams):
            p = KinematicParams.from_vector(p)
        self.params_ = p
        self.noise_ = self.noise if isinstance(self.noise, FilterNoiseConfig) else FilterNoiseConfig.from_dict(self.noise or {})
        return self

    def transform(self, X) -> List[EstimatorTrace]:
        check_is_fitted(self, "params_")
        return [run_estimator(rec, self.params_, self.kind_, self.noise_, ukf=self.ukf_) for rec in X]

    def predict(self, X):
        return [tr.pose for tr in self.transform(X)]

    def score(self, X, y=None):
        return -float(np.mean([tr.final_position_error for tr in self.transform(X)]))
