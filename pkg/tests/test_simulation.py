import dataclasses

import numpy as np
import pytest

from fourwis.kinematics import wrap_angle
from fourwis.odometry import integrate_recording
from fourwis.simulation import (
    WALL_GRAVITY_DRIFT,
    DisturbanceConfig,
    derive_seeds,
    make_calibration_dataset,
    simulate_recording,
)
from fourwis.trajectory import ALL_KINDS, TrajectoryKind, TrajectorySpec


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_self_consistency(nominal, kind):
    rec = simulate_recording(nominal, TrajectorySpec.default(kind), DisturbanceConfig.noiseless())
    est = integrate_recording(nominal, rec.frames, rec.truth[0])
    err = est - rec.truth
    err[:, 2] = wrap_angle(err[:, 2])
    assert np.abs(err).max() < 1e-4


def test_slip_shortens_line(nominal):
    rec = simulate_recording(nominal, TrajectorySpec.default("LineX"), DisturbanceConfig.noiseless(slip_ratio=0.1))
    assert rec.truth[-1, 0] == pytest.approx(0.9, abs=1e-6)
    assert integrate_recording(nominal, rec.frames, (0, 0, 0))[-1, 0] == pytest.approx(1.0, abs=1e-6)


def test_fixed_seed_is_bit_identical(nominal):
    d = DisturbanceConfig(rng_seed=5, slip_ratio=0.05, process_pos_sigma=0.01)
    a = simulate_recording(nominal, TrajectorySpec.default("CircleCW", sample_dt=0.05), d)
    b = simulate_recording(nominal, TrajectorySpec.default("CircleCW", sample_dt=0.05), d)
    assert a == b
    c = simulate_recording(nominal, TrajectorySpec.default("CircleCW", sample_dt=0.05), dataclasses.replace(d, rng_seed=6))
    assert not np.array_equal(a.vo_pose, c.vo_pose)


def test_dataset_shape(nominal):
    data = make_calibration_dataset(nominal, DisturbanceConfig(), sample_dt=0.1, master_seed=3)
    assert len(data) == 30
    for kind in ALL_KINDS:
        assert len(data.by_kind(kind)) == 5
    seeds = [r.meta["seed"] for r in data]
    assert len(set(seeds)) == 30
    assert {"kind", "seed", "id", "repetition"} <= set(data[0].meta)
    again = make_calibration_dataset(nominal, DisturbanceConfig(), sample_dt=0.1, master_seed=3)
    assert data == again


def test_derive_seeds_distinct():
    assert derive_seeds(1, 10) == derive_seeds(1, 10)
    assert len(set(derive_seeds(1, 100))) == 100


def test_gravity_drift_pushes_minus_x(nominal):
    spec = TrajectorySpec.default("LineY")
    finals = []
    for g in (0.0, WALL_GRAVITY_DRIFT, 2 * WALL_GRAVITY_DRIFT):
        rec = simulate_recording(nominal, spec, DisturbanceConfig.noiseless(gravity_drift=g))
        assert np.all(np.diff(rec.truth[:, 0]) <= 1e-15)
        finals.append(rec.truth[-1, 0])
    assert finals[0] == pytest.approx(0.0, abs=1e-12)
    assert finals[0] > finals[1] > finals[2]


def test_noise_statistics(nominal):
    sigma, bias = 0.02, 0.005
    spec = TrajectorySpec("LineX", 0.0, 400.0, sample_dt=0.05)  # standing still: truth heading is zero
    rec = simulate_recording(nominal, spec, DisturbanceConfig(imu_yaw_sigma=sigma, imu_yaw_bias=bias, vo_pos_sigma=sigma, rng_seed=9))
    for samples, mean in ((rec.imu_yaw, bias), (rec.vo_pose[:, 0], 0.0)):
        n = samples.size
        assert n >= 10**4
        assert abs(samples.mean() - mean) < 4 * sigma / np.sqrt(n)
        assert abs(samples.var() / sigma**2 - 1) < 0.2


def test_sensor_rates(nominal):
    rec = simulate_recording(nominal, TrajectorySpec.default("LineX"), DisturbanceConfig())
    assert rec.imu_t.size == 1501 and rec.vo_t.size == 451
    np.testing.assert_allclose(np.diff(rec.imu_t), 0.01, atol=1e-12)
    assert rec.imu_t[-1] <= rec.frames.t[-1]


def test_command_params_differ_from_truth(nominal, mismatched):
    spec = TrajectorySpec.default("LineX")
    rec = simulate_recording(mismatched, spec, DisturbanceConfig.noiseless(), command_params=nominal)
    assert integrate_recording(nominal, rec.frames, (0, 0, 0))[-1, 0] == pytest.approx(1.0, abs=1e-4)
    assert abs(rec.truth[-1, 0] - 1.0) > 1e-3


@pytest.mark.parametrize(
    "kwargs", [dict(imu_yaw_sigma=-1), dict(slip_ratio=1.0), dict(slip_ratio=[0.1, 0.1, -0.1, 0]), dict(gravity_drift=-1), dict(vo_rate=0)]
)
def test_disturbance_validation(kwargs):
    with pytest.raises(ValueError):
        DisturbanceConfig(**kwargs)


def test_disturbance_dict_round_trip():
    d = DisturbanceConfig(slip_ratio=[0.1, 0.0, 0.2, 0.0], rng_seed=4)
    assert DisturbanceConfig.from_dict(d.as_dict()) == d
    with pytest.raises(ValueError, match="unknown"):
        DisturbanceConfig.from_dict({"bogus": 1})
    assert TrajectoryKind("LineX") is TrajectoryKind.LINE_X
