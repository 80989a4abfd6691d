"""Kinematics, odometry calibration and pose filtering for 4WIS4WID robots."""
from .calibration import Bounds, CalibrationProblem, OdometryCalibrator, calibrate
from .estimators import FilterNoiseConfig, PoseFilter, UkfConfig, run_estimator
from .kinematics import (
    PARAM_NAMES,
    BodyTwist,
    KinematicParams,
    Pose2D,
    WheelFrame,
    body_twist_from_wheels,
    wheels_from_body_twist,
)
from .odometry import FrameLog, integrate_recording
from .simulation import Dataset, DisturbanceConfig, Recording, make_calibration_dataset, simulate_recording
from .trajectory import TrajectoryKind, TrajectorySpec

__version__ = "0.1.0"

__all__ = [
    "PARAM_NAMES",
    "BodyTwist",
    "Bounds",
    "CalibrationProblem",
    "Dataset",
    "DisturbanceConfig",
    "FilterNoiseConfig",
    "FrameLog",
    "KinematicParams",
    "OdometryCalibrator",
    "Pose2D",
    "PoseFilter",
    "Recording",
    "TrajectoryKind",
    "TrajectorySpec",
    "UkfConfig",
    "WheelFrame",
    "body_twist_from_wheels",
    "calibrate",
    "integrate_recording",
    "make_calibration_dataset",
    "run_estimator",
    "simulate_recording",
    "wheels_from_body_twist",
]
