"""Run configuration for the command-line workflow.

A config is a JSON object; every section is optional and unknown keys are
rejected. Example::

    {
      "robot": {"source": "nominal", "perturbation": {"r_1": 0.03}},
      "disturbance": {"slip_ratio": 0.1},
      "wall_mode": false,
      "dataset": {"repetitions": 5, "sample_dt": 0.01},
      "calibration": {"method": "LM", "options": {}, "bound_fraction": 0.05},
      "filter": {"kind": "EKF", "noise": {}, "ukf": {"alpha": 0.001}},
      "output_dir": "out"
    }
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

from .calibration.calibrate import Method
from .estimators.models import UkfConfig
from .estimators.runner import FilterKind, FilterNoiseConfig
from .io import load_params, read_json
from .kinematics import PARAM_NAMES, KinematicParams
from .simulation import WALL_GRAVITY_DRIFT, DisturbanceConfig


class ConfigError(ValueError):
    pass


def _strict(section: str, data: Optional[Mapping], allowed) -> Dict[str, Any]:
    data = {} if data is None else data
    if not isinstance(data, Mapping):
        raise ConfigError(f"{section} must be an object")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {section}: {sorted(unknown)}")
    return dict(data)


@dataclass(frozen=True)
class RobotConfig:
    """Where the robot's true parameters come from and how they are perturbed.

    ``perturbation`` maps parameter names (``x_w1`` ... ``r_4``) to relative
    changes applied on top of the source.
    """

    source: str = "nominal"
    path: Optional[str] = None
    perturbation: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.source not in ("nominal", "file"):
            raise ConfigError("robot.source must be 'nominal' or 'file'")
        if self.source == "file" and not self.path:
            raise ConfigError("robot.path is required when robot.source is 'file'")
        bad = set(self.perturbation) - set(PARAM_NAMES)
        if bad:
            raise ConfigError(f"unknown parameter names in robot.perturbation: {sorted(bad)}")

    def base_params(self) -> KinematicParams:
        return KinematicParams.nominal() if self.source == "nominal" else load_params(self.path)

    def true_params(self) -> KinematicParams:
        base = self.base_params()
        return base.perturbed(self.perturbation) if self.perturbation else base


@dataclass(frozen=True)
class DatasetConfig:
    repetitions: int = 5
    sample_dt: Optional[float] = None

    def __post_init__(self):
        if int(self.repetitions) < 1:
            raise ConfigError("dataset.repetitions must be at least 1")
        if self.sample_dt is not None and not self.sample_dt > 0:
            raise ConfigError("dataset.sample_dt must be positive")


@dataclass(frozen=True)
class CalibrationConfig:
    method: str = "LM"
    options: Dict[str, Any] = field(default_factory=dict)
    bound_fraction: float = 0.05
    weights: Optional[Dict[str, float]] = None

    def __post_init__(self):
        Method.parse(self.method)
        if not 0 < self.bound_fraction < 1:
            raise ConfigError("calibration.bound_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class FilterConfig:
    kind: str = "EKF"
    noise: FilterNoiseConfig = field(default_factory=FilterNoiseConfig)
    ukf: UkfConfig = field(default_factory=UkfConfig)

    def __post_init__(self):
        FilterKind.parse(self.kind)


@dataclass(frozen=True)
class RunConfig:
    robot: RobotConfig = field(default_factory=RobotConfig)
    disturbance: DisturbanceConfig = field(default_factory=DisturbanceConfig)
    wall_mode: bool = False
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    output_dir: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Optional[Mapping]) -> "RunConfig":
        top = _strict("config", data, [f.name for f in dataclasses.fields(cls)])
        try:
            robot = RobotConfig(**_strict("robot", top.get("robot"), ("source", "path", "perturbation")))
            disturbance = DisturbanceConfig.from_dict(_strict("disturbance", top.get("disturbance"), [f.name for f in dataclasses.fields(DisturbanceConfig)]))
            ds = DatasetConfig(**_strict("dataset", top.get("dataset"), ("repetitions", "sample_dt")))
            cal = CalibrationConfig(**_strict("calibration", top.get("calibration"), ("method", "options", "bound_fraction", "weights")))
            fsec = _strict("filter", top.get("filter"), ("kind", "noise", "ukf"))
            filt = FilterConfig(
                kind=fsec.get("kind", "EKF"),
                noise=FilterNoiseConfig.from_dict(_strict("filter.noise", fsec.get("noise"), [f.name for f in dataclasses.fields(FilterNoiseConfig)])),
                ukf=UkfConfig(**_strict("filter.ukf", fsec.get("ukf"), ("alpha", "beta", "kappa"))),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        wall = top.get("wall_mode", False)
        if not isinstance(wall, bool):
            raise ConfigError("wall_mode must be true or false")
        out = top.get("output_dir")
        if out is not None and not isinstance(out, str):
            raise ConfigError("output_dir must be a string")
        return cls(robot, disturbance, wall, ds, cal, filt, out)

    @classmethod
    def load(cls, path=None) -> "RunConfig":
        if path is None:
            return cls()
        return cls.from_dict(read_json(path))

    def effective_disturbance(self, seed: Optional[int] = None) -> DisturbanceConfig:
        """Disturbance with wall-mode gravity and the command-line seed applied."""
        d = self.disturbance
        if self.wall_mode and d.gravity_drift == 0:
            d = dataclasses.replace(d, gravity_drift=WALL_GRAVITY_DRIFT)
        if seed is not None:
            d = dataclasses.replace(d, rng_seed=int(seed))
        return d

    def as_dict(self) -> dict:
        return {
            "robot": dataclasses.asdict(self.robot),
            "disturbance": self.disturbance.as_dict(),
            "wall_mode": self.wall_mode,
            "dataset": dataclasses.asdict(self.dataset),
            "calibration": dataclasses.asdict(self.calibration),
            "filter": {"kind": self.filter.kind, "noise": self.filter.noise.as_dict(), "ukf": dataclasses.asdict(self.filter.ukf)},
            "output_dir": self.output_dir,
        }
