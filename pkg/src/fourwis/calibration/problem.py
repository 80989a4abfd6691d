"""Least-squares formulation of kinematic calibration."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from ..kinematics import PARAM_NAMES, KinematicParams, wrap_angle
from ..odometry import batch_integrate, check_time_order
from ..simulation import Dataset, Recording
from ..trajectory import TrajectoryKind
from .._validation import check_param_vector

N_PARAMS = len(PARAM_NAMES)


class CostEvaluationError(ValueError):
    """Raised when the cost cannot be evaluated at a parameter vector."""

    def __init__(self, z, reason):
        self.z = np.array(z, dtype=float)
        super().__init__(f"cost evaluation failed at z={self.z.tolist()}: {reason}")


@dataclass(frozen=True, eq=False)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = check_param_vector(self.lower, "lower", n=None)
        hi = check_param_vector(self.upper, "upper", n=lo.size)
        if not np.all(lo < hi):
            raise ValueError("bounds require lower < upper elementwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def around(cls, nominal, fraction: float = 0.05) -> "Bounds":
        """``nominal`` +/- ``fraction`` of each entry, correct for negative entries."""
        if isinstance(nominal, KinematicParams):
            nominal = nominal.to_vector()
        z = np.asarray(nominal, dtype=float)
        a, b = (1.0 - fraction) * z, (1.0 + fraction) * z
        return cls(np.minimum(a, b), np.maximum(a, b))

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, z, strict=False) -> bool:
        z = np.asarray(z, dtype=float)
        if strict:
            return bool(np.all(z > self.lower) and np.all(z < self.upper))
        return bool(np.all(z >= self.lower) and np.all(z <= self.upper))

    def clip(self, z) -> np.ndarray:
        return np.clip(z, self.lower, self.upper)

    def to_unit(self, z) -> np.ndarray:
        return (np.asarray(z, dtype=float) - self.lower) / self.width

    def from_unit(self, u) -> np.ndarray:
        return self.lower + np.asarray(u, dtype=float) * self.width


def _initial_pose(rec: Recording) -> np.ndarray:
    return rec.truth[0].copy()


def _kind_weight(weights, rec):
    if not weights:
        return 1.0
    return float(weights.get(rec.kind.value if rec.kind is not None else None, 1.0))


class CalibrationProblem:
    """Pose residuals of dead-reckoning under a candidate parameter vector.

    Each recording is re-integrated from its own first ground-truth pose; the
    residual stacks ``(x_est - x_abs, y_est - y_abs, wrap(theta_est - theta_abs))``
    for every step of every recording, optionally weighted per trajectory kind.
    """

    def __init__(self, dataset: Sequence[Recording], weights: Optional[Mapping[str, float]] = None, chunk: int = 16):
        self.recordings = list(dataset)
        if not self.recordings:
            raise ValueError("dataset is empty")
        for rec in self.recordings:
            check_time_order(rec.frames.t)
        self.weights = {TrajectoryKind(k).value: float(w) for k, w in (weights or {}).items()}
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("kind weights must be non-negative")
        self._sqrt_w = [np.sqrt(_kind_weight(self.weights, r)) for r in self.recordings]
        self.chunk = int(chunk)
        self.n_residuals = 3 * sum(len(r.frames) for r in self.recordings)
        self.nfev = 0

    def _check(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if Z.shape[1] != N_PARAMS:
            raise ValueError(f"parameter vectors must have {N_PARAMS} entries")
        for z in Z:
            if not np.all(np.isfinite(z)):
                raise CostEvaluationError(z, "non-finite entry")
            if np.any(z[8:] <= 0):
                raise CostEvaluationError(z, "wheel radius must be positive")
            if np.any(z[:4] ** 2 + z[4:8] ** 2 == 0):
                raise CostEvaluationError(z, "wheel at the origin")
        return Z

    def traces(self, z):
        """Estimated pose traces (heading wrapped), one ``(N, 3)`` array per recording."""
        Z = self._check(z)
        out = []
        for rec in self.recordings:
            tr = batch_integrate(Z[:, 0:4], Z[:, 4:8], Z[:, 8:12], rec.frames, _initial_pose(rec))[0]
            tr[:, 2] = wrap_angle(tr[:, 2])
            out.append(tr)
        return out

    def _errors(self, traces):
        errs = []
        for rec, tr, sw in zip(self.recordings, traces, self._sqrt_w):
            e = tr - rec.truth
            e[..., 2] = wrap_angle(e[..., 2])
            errs.append(e if sw == 1.0 else e * sw)
        return errs

    def residuals(self, z) -> np.ndarray:
        Z = self._check(z)
        self.nfev += 1
        parts = []
        for rec, sw in zip(self.recordings, self._sqrt_w):
            tr = batch_integrate(Z[:, 0:4], Z[:, 4:8], Z[:, 8:12], rec.frames, _initial_pose(rec))[0]
            e = tr - rec.truth
            e[:, 2] = wrap_angle(e[:, 2])
            parts.append((e if sw == 1.0 else e * sw).ravel())
        r = np.concatenate(parts)
        if not np.all(np.isfinite(r)):
            raise CostEvaluationError(Z[0], "non-finite residual")
        return r

    def cost(self, z) -> float:
        r = self.residuals(z)
        return float(r @ r)

    def cost_batch(self, Z) -> np.ndarray:
        """Cost of each row of ``Z``; the reduction order does not depend on batching."""
        Z = self._check(Z)
        out = np.empty(Z.shape[0])
        for start in range(0, Z.shape[0], self.chunk):
            block = Z[start : start + self.chunk]
            self.nfev += block.shape[0]
            per_rec = []
            for rec, sw in zip(self.recordings, self._sqrt_w):
                tr = batch_integrate(block[:, 0:4], block[:, 4:8], block[:, 8:12], rec.frames, _initial_pose(rec))
                e = tr - rec.truth[None]
                e[..., 2] = wrap_angle(e[..., 2])
                per_rec.append(np.einsum("pnk,pnk->p", e, e) * sw**2)
            out[start : start + block.shape[0]] = np.sum(per_rec, axis=0)
        return out

    __call__ = residuals


def cost(z, dataset: Sequence[Recording], weights=None) -> float:
    """Summed squared pose error of dead-reckoning under ``z`` over ``dataset``."""
    if isinstance(z, KinematicParams):
        z = z.to_vector()
    return CalibrationProblem(dataset, weights).cost(z)


@dataclass(frozen=True)
class ErrorRow:
    """Maximum (``*_max``) and mean (``*_mean``) absolute errors, m and rad."""

    e_x_max: float
    e_x_mean: float
    e_y_max: float
    e_y_mean: float
    e_theta_max: float
    e_theta_mean: float

    COLUMNS = ("e_x,m", "e_x,a", "e_y,m", "e_y,a", "e_th,m", "e_th,a")

    def values(self):
        return (self.e_x_max, self.e_x_mean, self.e_y_max, self.e_y_mean, self.e_theta_max, self.e_theta_mean)


def error_table(dataset: Sequence[Recording], z) -> Dict[str, ErrorRow]:
    """Per-kind max and mean absolute pose errors of dead-reckoning under ``z``."""
    if isinstance(z, KinematicParams):
        z = z.to_vector()
    problem = CalibrationProblem(dataset)
    traces = problem.traces(z)
    grouped: Dict[str, list] = {}
    for rec, tr in zip(problem.recordings, traces):
        e = np.abs(tr - rec.truth)
        e[:, 2] = np.abs(wrap_angle(tr[:, 2] - rec.truth[:, 2]))
        key = rec.kind.value if rec.kind is not None else "unknown"
        grouped.setdefault(key, []).append(e)
    table = {}
    for key, errs in grouped.items():
        e = np.concatenate(errs)
        m, a = e.max(axis=0), e.mean(axis=0)
        table[key] = ErrorRow(*(float(v) for pair in zip(m, a) for v in pair))
    return table
