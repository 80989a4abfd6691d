import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from fourwis.trajectory import (
    ALL_KINDS,
    TrajectoryKind,
    TrajectorySpec,
    circle_center,
    quintic_profile,
    reference_pose_at,
    reference_twists,
    sample_times,
    twist_at,
)


def test_quintic_examples():
    assert quintic_profile(1.0, 1.0, 0.5)[0] == pytest.approx(0.5, abs=1e-15)
    assert quintic_profile(1.0, 1.0, 0.0) == (0.0, 0.0, 0.0)
    assert quintic_profile(2.0, 4.0, 1.0)[0] == pytest.approx(2 * (10 / 64 - 15 / 256 + 6 / 1024), rel=1e-14)


@pytest.mark.parametrize("t", [-1e-9, 1.0 + 1e-9])
def test_quintic_rejects_outside(t):
    with pytest.raises(ValueError):
        quintic_profile(1.0, 1.0, t)


@settings(max_examples=100, deadline=None)
@given(total=st.floats(-10, 10), T=st.floats(0.1, 100))
def test_quintic_boundary_conditions(total, T):
    p0, v0, a0 = quintic_profile(total, T, 0.0)
    p1, v1, a1 = quintic_profile(total, T, T)
    assert p0 == 0 and abs(p1 - total) <= 1e-12 * max(1, abs(total))
    assert max(abs(v0), abs(a0), abs(v1), abs(a1)) <= 1e-12


def test_quintic_derivatives_match_finite_differences():
    t = np.linspace(0.1, 3.9, 9)
    h = 1e-6
    p_lo, v_lo, _ = quintic_profile(2.0, 4.0, t - h)
    p_hi, v_hi, _ = quintic_profile(2.0, 4.0, t + h)
    _, v, a = quintic_profile(2.0, 4.0, t)
    np.testing.assert_allclose((p_hi - p_lo) / (2 * h), v, rtol=1e-7)
    np.testing.assert_allclose((v_hi - v_lo) / (2 * h), a, rtol=1e-6, atol=1e-9)


def test_spec_validation():
    with pytest.raises(ValueError):
        TrajectorySpec("LineX", 1.0, 0.0)
    with pytest.raises(ValueError):
        TrajectorySpec("LineX", 1.0, 1.0, sample_dt=0)
    with pytest.raises(ValueError):
        TrajectorySpec("CircleCW", 1.0, 1.0, radius=0)
    assert TrajectorySpec.from_dict(TrajectorySpec.default("SpinCW").as_dict()) == TrajectorySpec.default("SpinCW")


def test_defaults_are_slow():
    from fourwis.kinematics import KinematicParams, wheels_from_body_twist

    p = KinematicParams.nominal()
    for kind in ALL_KINDS:
        _, tw = reference_twists(TrajectorySpec.default(kind))
        peak = max(np.max(wheels_from_body_twist(p, row)[0]) for row in tw[:: max(1, len(tw) // 200)])
        assert peak < 0.15


def test_line_x_integral():
    spec = TrajectorySpec("LineX", 1.0, 10.0)
    integral = quad(lambda t: twist_at(spec, t)[0], 0, 10, epsabs=1e-13)[0]
    assert integral == pytest.approx(1.0, abs=1e-6)
    _, tw = reference_twists(spec)
    assert np.max(np.abs(tw[:, 1])) == 0 and np.max(np.abs(tw[:, 2])) == 0


def test_spin_integral():
    spec = TrajectorySpec("SpinCCW", 2 * np.pi, 10.0)
    assert quad(lambda t: twist_at(spec, t)[2], 0, 10, epsabs=1e-13)[0] == pytest.approx(2 * np.pi, abs=1e-6)
    _, tw = reference_twists(spec)
    assert np.all(tw[:, :2] == 0)


@pytest.mark.parametrize("kind", ["CircleCCW", "CircleCW"])
def test_circle_path_on_circle(kind):
    spec = TrajectorySpec.default(kind)
    sol = solve_ivp(lambda t, y: twist_at(spec, t)[:2], (0, spec.duration), [0.0, 0.0], rtol=1e-12, atol=1e-14, dense_output=True)
    t = np.linspace(0, spec.duration, 200)
    xy = sol.sol(t).T
    c = circle_center(spec)
    np.testing.assert_allclose(np.hypot(xy[:, 0] - c[0], xy[:, 1] - c[1]), 0.5, atol=1e-6)
    np.testing.assert_allclose(xy, reference_pose_at(spec, t)[:, :2], atol=1e-6)
    _, tw = reference_twists(spec)
    assert np.all(tw[:, 2] == 0)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_endpoint_twists_vanish(kind):
    _, tw = reference_twists(TrajectorySpec.default(kind))
    assert np.abs(tw[0]).max() <= 1e-12 and np.abs(tw[-1]).max() <= 1e-12


@pytest.mark.parametrize("ccw,cw", [("CircleCCW", "CircleCW"), ("SpinCCW", "SpinCW")])
def test_cw_mirrors_ccw(ccw, cw):
    _, a = reference_twists(TrajectorySpec.default(ccw))
    _, b = reference_twists(TrajectorySpec.default(cw))
    np.testing.assert_array_equal(a[:, 0], b[:, 0])
    np.testing.assert_array_equal(a[:, 1], -b[:, 1])
    np.testing.assert_array_equal(a[:, 2], -b[:, 2])


def test_sample_times_cover_duration():
    t = sample_times(TrajectorySpec("LineY", 1.0, 1.0, sample_dt=0.3))
    assert t[0] == 0 and t[-1] <= 1.0 and np.all(np.diff(t) > 0)
    t = sample_times(TrajectorySpec.default(TrajectoryKind.LINE_X))
    assert t.size == 1501 and t[-1] == pytest.approx(15.0)
