"""Monte-Carlo filter consistency (NEES) checks."""
from __future__ import annotations

import dataclasses
from typing import Optional, Tuple

import numpy as np
from scipy.stats import chi2

from ..kinematics import KinematicParams
from ..simulation import DisturbanceConfig, derive_seeds, simulate_recording
from ..trajectory import TrajectorySpec
from .models import UkfConfig
from .runner import FilterNoiseConfig, run_estimator


def nees_band(dim: int = 3, runs: int = 50, confidence: float = 0.95) -> Tuple[float, float]:
    """Two-sided interval for the run-averaged NEES of a consistent filter."""
    tail = 0.5 * (1.0 - confidence)
    dof = dim * runs
    return float(chi2.ppf(tail, dof) / runs), float(chi2.ppf(1.0 - tail, dof) / runs)


@dataclasses.dataclass
class NeesResult:
    """NEES of ``runs`` independent runs, shape ``(runs, steps)``."""

    filter: str
    nees: np.ndarray
    band: Tuple[float, float]

    @property
    def per_step(self) -> np.ndarray:
        """Run-averaged NEES at every step."""
        return np.nanmean(self.nees, axis=0)

    @property
    def average(self) -> float:
        """Time average of the run-averaged NEES."""
        return float(np.nanmean(self.per_step))

    @property
    def final(self) -> float:
        return float(self.per_step[-1])

    @property
    def fraction_in_band(self) -> float:
        lo, hi = self.band
        a = self.per_step
        return float(np.mean((a >= lo) & (a <= hi)))

    @property
    def consistent(self) -> bool:
        lo, hi = self.band
        return lo <= self.average <= hi


def monte_carlo_nees(
    spec: TrajectorySpec,
    disturbance: DisturbanceConfig,
    filter="EKF",
    *,
    params: Optional[KinematicParams] = None,
    runs: int = 50,
    master_seed: int = 0,
    noise: Optional[FilterNoiseConfig] = None,
    ukf: UkfConfig = UkfConfig(),
    confidence: float = 0.95,
) -> NeesResult:
    """Run ``runs`` seeded simulations and collect the filter's NEES.

    The filter uses the true parameters and, unless ``noise`` is given, noise
    settings matched to ``disturbance``.
    """
    params = KinematicParams.nominal() if params is None else params
    noise = FilterNoiseConfig.matched(disturbance) if noise is None else noise
    rows = []
    for seed in derive_seeds(master_seed, runs):
        rec = simulate_recording(params, spec, dataclasses.replace(disturbance, rng_seed=seed))
        rows.append(run_estimator(rec, params, filter, noise, ukf=ukf).nees)
    return NeesResult(str(filter), np.array(rows), nees_band(3, runs, confidence))
