from .consistency import NeesResult, monte_carlo_nees, nees_band
from .filters import (
    SingularInnovationError,
    ekf_predict,
    ekf_update,
    ukf_predict,
    ukf_sigma_points,
    ukf_update,
    unscented_transform,
)
from .models import (
    GaussianBelief,
    ImuYaw,
    LinearMeasurement,
    LinearProcess,
    MeasurementKind,
    MeasurementModel,
    OdometryProcess,
    ProcessModel,
    UkfConfig,
    VoPose,
)
from .runner import EstimatorTrace, FilterKind, FilterNoiseConfig, FusionFilter, PoseFilter, run_estimator

__all__ = [
    "EstimatorTrace",
    "FilterKind",
    "FilterNoiseConfig",
    "FusionFilter",
    "GaussianBelief",
    "ImuYaw",
    "LinearMeasurement",
    "LinearProcess",
    "MeasurementKind",
    "MeasurementModel",
    "NeesResult",
    "OdometryProcess",
    "PoseFilter",
    "ProcessModel",
    "SingularInnovationError",
    "UkfConfig",
    "VoPose",
    "ekf_predict",
    "ekf_update",
    "monte_carlo_nees",
    "nees_band",
    "run_estimator",
    "ukf_predict",
    "ukf_sigma_points",
    "ukf_update",
    "unscented_transform",
]
