"""Calibration driver, report type and the scikit-learn style estimator."""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..kinematics import PARAM_NAMES, KinematicParams
from ..simulation import Dataset, DisturbanceConfig, Recording, make_calibration_dataset
from .interior_point import interior_point_minimize
from .problem import Bounds, CalibrationProblem, ErrorRow, error_table
from .solvers import OptimizerResult, levenberg_marquardt
from .stochastic import ga_minimize, pso_minimize


class Method(str, enum.Enum):
    LM = "LM"
    INTERIOR_POINT = "InteriorPoint"
    GA = "GA"
    PSO = "PSO"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, Method):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "lm": cls.LM,
            "levenbergmarquardt": cls.LM,
            "interiorpoint": cls.INTERIOR_POINT,
            "ip": cls.INTERIOR_POINT,
            "fm": cls.INTERIOR_POINT,
            "ga": cls.GA,
            "genetic": cls.GA,
            "pso": cls.PSO,
            "ps": cls.PSO,
            "swarm": cls.PSO,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown calibration method {value!r}; choose LM, InteriorPoint, GA or PSO") from None


DEFAULT_OPTIONS = {
    Method.LM: {"max_iter": 100, "damping": 1e-3},
    Method.INTERIOR_POINT: {"max_inner": 50},
    Method.GA: {"pop_size": 60, "generations": 150, "seed": 0},
    Method.PSO: {"particles": 40, "iterations": 200, "seed": 0},
}


@dataclass
class CalibrationReport:
    method: str
    initial_cost: float
    final_cost: float
    initial_params: KinematicParams
    solution: KinematicParams
    iterations: int
    evaluations: int
    status: str
    message: str
    wall_time: float
    errors_before: Dict[str, ErrorRow] = field(default_factory=dict)
    errors_after: Dict[str, ErrorRow] = field(default_factory=dict)
    history: List[float] = field(default_factory=list)
    options: Dict = field(default_factory=dict)

    @property
    def z(self) -> np.ndarray:
        return self.solution.to_vector()

    def as_dict(self) -> dict:
        def table(t):
            return {k: dict(zip(ErrorRow.COLUMNS, row.values())) for k, row in t.items()}

        return {
            "method": self.method,
            "status": self.status,
            "message": self.message,
            "initial_cost": self.initial_cost,
            "final_cost": self.final_cost,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "wall_time": self.wall_time,
            "initial_params": self.initial_params.as_dict(),
            "solution": self.solution.as_dict(),
            "solution_vector": dict(zip(PARAM_NAMES, self.z.tolist())),
            "errors_before": table(self.errors_before),
            "errors_after": table(self.errors_after),
            "options": self.options,
        }


def _as_vector(z):
    if isinstance(z, KinematicParams):
        return z.to_vector()
    return np.asarray(z, dtype=float)


def run_optimizer(problem: CalibrationProblem, z0, bounds: Bounds, method, options=None) -> OptimizerResult:
    method = Method.parse(method)
    opts = dict(DEFAULT_OPTIONS[method])
    opts.update(options or {})
    z0 = _as_vector(z0)
    if method is Method.LM:
        return levenberg_marquardt(problem.residuals, z0, bounds, **opts)
    if method is Method.INTERIOR_POINT:
        return interior_point_minimize(problem.residuals, z0, bounds, **opts)
    if method is Method.GA:
        return ga_minimize(problem.cost_batch, bounds, x0=z0, **opts)
    return pso_minimize(problem.cost_batch, bounds, x0=z0, **opts)


def calibrate(
    dataset: Sequence[Recording],
    z0=None,
    bounds: Optional[Bounds] = None,
    method="LM",
    options: Optional[Mapping] = None,
    *,
    weights: Optional[Mapping[str, float]] = None,
    tables: bool = True,
) -> CalibrationReport:
    """Fit the 12 kinematic parameters to ground truth over ``dataset``.

    ``z0`` defaults to the nominal geometry and ``bounds`` to +/-5 % around
    ``z0``. Non-convergence is reported through ``status``, never raised.
    """
    method = Method.parse(method)
    z0 = _as_vector(KinematicParams.nominal() if z0 is None else z0)
    bounds = Bounds.around(z0) if bounds is None else bounds
    if not bounds.contains(z0):
        raise ValueError("z0 must lie within bounds")
    problem = CalibrationProblem(dataset, weights)
    c0 = problem.cost(z0)
    start = time.perf_counter()
    result = run_optimizer(problem, z0, bounds, method, options)
    elapsed = time.perf_counter() - start
    z, final = result.x, result.fun
    if final > c0:
        z, final = z0.copy(), c0
    report = CalibrationReport(
        method=method.value,
        initial_cost=c0,
        final_cost=float(final),
        initial_params=KinematicParams.from_vector(z0),
        solution=KinematicParams.from_vector(z),
        iterations=result.nit,
        evaluations=problem.nfev,
        status=result.status,
        message=result.message,
        wall_time=elapsed,
        history=list(result.history),
        options={**DEFAULT_OPTIONS[method], **dict(options or {})},
    )
    if tables:
        report.errors_before = error_table(dataset, z0)
        report.errors_after = error_table(dataset, z)
    return report


@dataclass
class CalibrationRound:
    params_in: KinematicParams
    pre_cost: float
    report: CalibrationReport


def iterative_calibration(
    true_params: KinematicParams,
    disturbance: DisturbanceConfig,
    z0=None,
    method="LM",
    options=None,
    *,
    max_rounds: int = 5,
    master_seed: int = 0,
    sample_dt: Optional[float] = None,
    repetitions: int = 5,
) -> List[CalibrationRound]:
    """Record, calibrate, re-record with the new parameters, repeat.

    Each round's recordings are commanded with the current parameter
    estimate. The loop stops when the cost of the current parameters on the
    fresh recordings no longer improves on the previous round.
    """
    params = KinematicParams.nominal() if z0 is None else (z0 if isinstance(z0, KinematicParams) else KinematicParams.from_vector(z0))
    bounds = Bounds.around(params)
    rounds: List[CalibrationRound] = []
    for k in range(max_rounds):
        data = make_calibration_dataset(
            true_params,
            disturbance,
            command_params=params,
            master_seed=master_seed + k,
            sample_dt=sample_dt,
            repetitions=repetitions,
        )
        pre = CalibrationProblem(data).cost(params.to_vector())
        if rounds and pre >= rounds[-1].pre_cost:
            break
        report = calibrate(data, params, bounds, method, options, tables=False)
        rounds.append(CalibrationRound(params, pre, report))
        params = report.solution
    return rounds


class OdometryCalibrator(BaseEstimator):
    """Estimator wrapper around :func:`calibrate`.

    ``fit`` takes a sequence of recordings; ``predict`` returns dead-reckoned
    pose traces under the fitted parameters and ``score`` the negative cost.

    Parameters
    ----------
    method : {"LM", "InteriorPoint", "GA", "PSO"}
    initial_params : KinematicParams or array-like of shape (12,), optional
        Start point and centre of the bounds; nominal geometry if None.
    bound_fraction : float
        Half-width of the box around ``initial_params`` as a fraction.
    options : dict, optional
        Solver options (see ``DEFAULT_OPTIONS``).
    weights : dict, optional
        Per-trajectory-kind residual weights.
    """

    def __init__(self, method="LM", initial_params=None, bound_fraction=0.05, options=None, weights=None):
        self.method = method
        self.initial_params = initial_params
        self.bound_fraction = bound_fraction
        self.options = options
        self.weights = weights

    def fit(self, X, y=None):
        method = Method.parse(self.method)
        if not 0 < self.bound_fraction < 1:
            raise ValueError("bound_fraction must lie in (0, 1)")
        z0 = _as_vector(KinematicParams.nominal() if self.initial_params is None else self.initial_params)
        recordings = list(X)
        report = calibrate(
            recordings, z0, Bounds.around(z0, self.bound_fraction), method, self.options, weights=self.weights
        )
        self.report_ = report
        self.params_ = report.solution
        self.n_iter_ = report.iterations
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        return CalibrationProblem(list(X)).traces(self.params_.to_vector())

    def score(self, X, y=None):
        check_is_fitted(self, "params_")
        return -CalibrationProblem(list(X), self.weights).cost(self.params_.to_vector())
