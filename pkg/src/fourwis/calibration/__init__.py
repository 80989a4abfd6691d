from .calibrate import (
    CalibrationReport,
    CalibrationRound,
    Method,
    OdometryCalibrator,
    calibrate,
    iterative_calibration,
)
from .interior_point import interior_point_minimize
from .problem import Bounds, CalibrationProblem, CostEvaluationError, ErrorRow, cost, error_table
from .solvers import OptimizerResult, central_jacobian, fd_jacobian, levenberg_marquardt, lm_direction, lm_step
from .stochastic import ga_minimize, pso_minimize

__all__ = [
    "Bounds",
    "CalibrationProblem",
    "CalibrationReport",
    "CalibrationRound",
    "CostEvaluationError",
    "ErrorRow",
    "Method",
    "OdometryCalibrator",
    "OptimizerResult",
    "calibrate",
    "central_jacobian",
    "cost",
    "error_table",
    "fd_jacobian",
    "ga_minimize",
    "interior_point_minimize",
    "iterative_calibration",
    "levenberg_marquardt",
    "lm_direction",
    "lm_step",
    "pso_minimize",
]
