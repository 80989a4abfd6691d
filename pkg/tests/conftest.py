import numpy as np
import pytest

from fourwis.kinematics import KinematicParams
from fourwis.simulation import DisturbanceConfig, make_calibration_dataset

MISMATCH = {"r_1": 0.03, "y_w2": -0.02, "x_w3": 0.04}


@pytest.fixture(scope="session")
def nominal():
    return KinematicParams.nominal()


@pytest.fixture(scope="session")
def mismatched():
    return KinematicParams.nominal().perturbed(MISMATCH)


@pytest.fixture(scope="session")
def small_dataset(mismatched):
    """One noiseless recording per kind at a coarse rate; fast enough for unit tests."""
    return make_calibration_dataset(
        mismatched, DisturbanceConfig.noiseless(), repetitions=1, sample_dt=0.05, master_seed=11
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
