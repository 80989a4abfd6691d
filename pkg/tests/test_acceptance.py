"""Acceptance checks, one test per criterion.

Each check records a PASS/FAIL line that is printed in the pytest terminal
summary; running this file directly prints the same lines::

    python tests/test_acceptance.py
"""
import json
import time
from pathlib import Path

import numpy as np
import pytest

from fourwis.calibration import CalibrationProblem, calibrate, central_jacobian
from fourwis.cli import main as cli_main
from fourwis.estimators import (
    GaussianBelief,
    LinearMeasurement,
    LinearProcess,
    OdometryProcess,
    UkfConfig,
    ekf_predict,
    ekf_update,
    monte_carlo_nees,
    run_estimator,
    ukf_predict,
    ukf_sigma_points,
    ukf_update,
    unscented_transform,
)
from fourwis.kinematics import BodyTwist, KinematicParams, WheelFrame, body_twist_from_wheels, stacked_system, wheels_from_body_twist
from fourwis.odometry import integrate_recording
from fourwis.simulation import WALL_GRAVITY_DRIFT, DisturbanceConfig, command_frames, make_calibration_dataset, simulate_recording
from fourwis.trajectory import TrajectorySpec

MISMATCH = {"r_1": 0.03, "y_w2": -0.02, "x_w3": 0.04}
RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


# ---------------------------------------------------------------- checks


def criterion_1():
    p = KinematicParams.nominal()
    rng = np.random.default_rng(1)
    v = rng.uniform(-0.5, 0.5, (1000, 4))
    d = rng.uniform(-np.pi, np.pi, (1000, 4))
    start = time.perf_counter()
    got = np.array([body_twist_from_wheels(p, v[k], d[k]).as_array() for k in range(1000)])
    elapsed = time.perf_counter() - start
    worst = 0.0
    for k in range(1000):
        P, R = stacked_system(p, d[k])
        ref = np.linalg.lstsq(P, R @ v[k], rcond=None)[0]
        worst = max(worst, np.linalg.norm(got[k] - ref) / max(np.linalg.norm(ref), 1e-300))
    ok = worst < 1e-10 and elapsed < 1.0
    return ok, f"max rel err {worst:.2e} (< 1e-10), closed form {elapsed * 1e3:.1f} ms for 1000 inputs (< 1 s)"


def criterion_2():
    p = KinematicParams.nominal()
    axis = np.array([-0.5, -0.1, -1e-6, -1e-12, 0.0, 1e-12, 1e-6, 0.1, 0.5])
    worst = 0.0
    for vx in axis:
        for vy in axis:
            for om in 4 * axis:
                tw = np.array([vx, vy, om])
                s, d = wheels_from_body_twist(p, BodyTwist(*tw))
                back = body_twist_from_wheels(p, s, d).as_array()
                worst = max(worst, np.abs(back - tw).max())
    return worst <= 1e-10, f"max abs err {worst:.2e} over {axis.size ** 3} twists (<= 1e-10)"


def criterion_3():
    p = KinematicParams.nominal()
    ends = []
    for dt in (0.2, 0.1, 0.05):
        log = command_frames(TrajectorySpec.default("CircleCCW", sample_dt=dt), p)
        ends.append(integrate_recording(p, log, (0, 0, 0))[-1])
    order = np.log2(np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2]))
    return order >= 1.9, f"observed order {order:.2f} on the circle (>= 1.9)"


def criterion_4():
    start = time.perf_counter()
    true = KinematicParams.nominal().perturbed(MISMATCH)
    data = make_calibration_dataset(true, DisturbanceConfig.noiseless(), repetitions=5)
    zt = true.to_vector()
    parts, ok = [], True
    for method, tol in (("LM", 1e-3), ("InteriorPoint", 5e-3)):
        rep = calibrate(data, method=method, tables=False)
        rel = np.abs(rep.z / zt - 1).max()
        ok &= rel <= tol
        parts.append(f"{method} max rel param err {rel:.2e} (<= {tol:g}, cost {rep.final_cost:.1e})")
    for method in ("GA", "PSO"):
        rep = calibrate(data, method=method, tables=False)
        ratio = rep.final_cost / rep.initial_cost
        ok &= ratio <= 1e-3
        parts.append(f"{method} cost ratio {ratio:.2e} (<= 1e-3)")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    J = central_jacobian(CalibrationProblem(data).residuals, zt)
    rank = np.linalg.matrix_rank(J * zt, tol=1e-8 * np.linalg.norm(J * zt, 2))
    parts.append(f"{len(data)} recordings, {elapsed:.0f} s (< 300 s); Jacobian rank {rank} of 12")
    return ok, "; ".join(parts)


def criterion_5():
    true = KinematicParams.nominal().perturbed(MISMATCH)
    noisy = DisturbanceConfig(truth_pos_sigma=5e-4, truth_yaw_sigma=2e-3, slip_ratio=0.02, rng_seed=7)
    data = make_calibration_dataset(true, noisy, repetitions=5)
    rep = calibrate(data, method="LM")
    worst, where = 0.0, ""
    for kind, before in rep.errors_before.items():
        after = rep.errors_after[kind]
        for name in ("e_x_mean", "e_y_mean", "e_theta_mean"):
            r = getattr(after, name) / getattr(before, name)
            if r > worst:
                worst, where = r, f"{kind}.{name}"
    lx_b, lx_a = rep.errors_before["LineX"].e_x_mean, rep.errors_after["LineX"].e_x_mean
    detail = f"worst after/before {worst:.2f} at {where} (<= 1); LineX e_x,a {lx_b * 1e3:.2f} -> {lx_a * 1e3:.2f} mm"
    return worst <= 1.0, detail


def _kalman(F, Q, H, R, x, P, zs):
    out = []
    for z in zs:
        x = F @ x
        P = F @ P @ F.T + Q
        K = P @ H.T @ np.linalg.inv(H @ P @ H.T + R)
        x = x + K @ (z - H @ x)
        P = (np.eye(len(x)) - K @ H) @ P
        out.append((x, P))
    return out


def criterion_6():
    rng = np.random.default_rng(6)
    F = np.array([[0.95, 0.1, 0.0], [0.0, 0.9, 0.1], [0.0, -0.1, 0.9]])
    Q = np.diag([1e-3, 2e-3, 1e-2])
    H = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    R = np.diag([0.1, 0.2])
    x, zs = np.zeros(3), []
    for _ in range(1000):
        x = F @ x + rng.multivariate_normal(np.zeros(3), Q)
        zs.append(H @ x + rng.multivariate_normal(np.zeros(2), R))
    ref = _kalman(F, Q, H, R, np.zeros(3), np.eye(3), zs)
    proc, meas, cfg = LinearProcess(F, Q), LinearMeasurement(H, R), UkfConfig()
    be = bu = GaussianBelief(np.zeros(3), np.eye(3))
    worst = {"EKF": 0.0, "UKF": 0.0}
    for z, (xr, Pr) in zip(zs, ref):
        be = ekf_update(ekf_predict(be, None, 1.0, proc), z, meas)
        bu = ukf_update(ukf_predict(bu, None, 1.0, proc, cfg), z, meas, cfg)
        for name, b in (("EKF", be), ("UKF", bu)):
            worst[name] = max(worst[name], np.abs(b.mean - xr).max(), np.abs(b.cov - Pr).max())
    ok = max(worst.values()) <= 1e-9
    return ok, f"max per-step diff EKF {worst['EKF']:.1e}, UKF {worst['UKF']:.1e} over 1000 steps (<= 1e-9)"


def criterion_7():
    cfg = UkfConfig(alpha=0.001, beta=2.0, kappa=0.0)
    wm, _ = cfg.weights(3)
    wsum = abs(wm.sum() - 1.0)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        A = rng.standard_normal((3, 3))
        P = A @ A.T + 1e-4 * np.eye(3)
        mu = rng.standard_normal(3)
        X, w, _ = ukf_sigma_points(GaussianBelief(mu, P), cfg)
        m, C = unscented_transform(X, w, cfg, X)
        worst = max(worst, np.abs(m - mu).max(), np.abs(C - P).max())
    ok = wsum <= 1e-12 and worst <= 1e-10
    return ok, f"|sum Wm - 1| = {wsum:.1e} (<= 1e-12); reconstruction err {worst:.1e} on 100 covariances (<= 1e-10)"


def criterion_8():
    p = KinematicParams.nominal()
    proc = OdometryProcess(p, np.zeros((3, 3)))
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        x = np.array([*rng.uniform(-2, 2, 2), rng.uniform(-np.pi, np.pi)])
        s, d = wheels_from_body_twist(p, BodyTwist(*rng.uniform(-0.2, 0.2, 3)))
        f = WheelFrame.from_speeds(0.0, s, d, p)
        dt = rng.uniform(0.005, 0.1)
        A = proc.jacobian(x, f, dt)
        h, cols = 1e-6, []
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            diff = proc.propagate((x + e)[None], f, dt)[0] - proc.propagate((x - e)[None], f, dt)[0]
            diff[2] = np.angle(np.exp(1j * diff[2]))
            cols.append(diff / (2 * h))
        N = np.column_stack(cols)
        worst = max(worst, np.linalg.norm(A - N) / np.linalg.norm(N))
    return worst < 1e-6, f"max rel err {worst:.1e} on 100 states (< 1e-6)"


def criterion_9():
    p = KinematicParams.nominal()
    parts, ok = [], True
    cases = (
        ("slip LineX", "LineX", DisturbanceConfig(slip_ratio=0.1, rng_seed=1)),
        ("wall LineY", "LineY", DisturbanceConfig(gravity_drift=WALL_GRAVITY_DRIFT, rng_seed=2)),
    )
    for label, kind, dist in cases:
        rec = simulate_recording(p, TrajectorySpec.default(kind), dist)
        err = {f: run_estimator(rec, p, f).final_position_error for f in ("OdomOnly", "EKF", "UKF")}
        for f in ("EKF", "UKF"):
            ok &= err["OdomOnly"] > err[f] and err[f] < 0.2 * err["OdomOnly"]
        parts.append(f"{label} final err OdomOnly {err['OdomOnly'] * 1e3:.1f} / EKF {err['EKF'] * 1e3:.1f} / UKF {err['UKF'] * 1e3:.1f} mm")
    d = DisturbanceConfig(process_pos_sigma=0.01, process_yaw_sigma=0.01)
    spec = TrajectorySpec.default("LineX")
    for f in ("EKF", "UKF"):
        res = monte_carlo_nees(spec, d, f, runs=50, master_seed=3)
        ok &= res.consistent
        lo, hi = res.band
        parts.append(f"{f} 50-run NEES {res.average:.2f} in [{lo:.2f}, {hi:.2f}]")
    return ok, "; ".join(parts)


def _snapshot(path):
    return {str(q.relative_to(path)): q.read_bytes() for q in sorted(path.rglob("*")) if q.is_file()}


def criterion_10(root):
    root = Path(root)
    cfg = root / "cfg.json"
    cfg.write_text(json.dumps({"robot": {"perturbation": MISMATCH}, "dataset": {"repetitions": 1, "sample_dt": 0.05}}))
    snaps = []
    for k in range(2):
        out = root / f"run{k}"
        codes = [cli_main(["simulate", "--config", str(cfg), "--seed", "17", "--out", str(out / "data")])]
        codes.append(cli_main(["simulate", "--config", str(cfg), "--seed", "17", "--wall", "--out", str(out / "wall")]))
        for method in ("LM", "InteriorPoint", "GA", "PSO"):
            codes.append(cli_main(["calibrate", str(out / "data"), "--config", str(cfg), "--method", method, "--seed", "5", "--out", str(out / method)]))
        codes.append(
            cli_main(
                ["estimate", str(out / "wall"), "--config", str(cfg), "--params", str(out / "LM" / "params.json"),
                 "--filter", "OdomOnly", "--filter", "EKF", "--filter", "UKF", "--recording", "LineY_0", "--out", str(out / "est")]
            )
        )  # fmt: skip
        traces = sorted(str(q) for q in (out / "est" / "traces").glob("*.csv"))
        codes.append(cli_main(["compare", *traces, "--out", str(out / "cmp")]))
        if any(codes):
            return False, f"command exit codes {codes}"
        snaps.append(_snapshot(out))
    same = snaps[0] == snaps[1]
    return same, f"{len(snaps[0])} output files from simulate/calibrate x4/estimate/compare, identical bytes: {same}"


# ---------------------------------------------------------------- pytest


def _run(n, fn, *args):
    ok, detail = fn(*args)
    record(n, ok, detail)
    assert ok, detail


def test_criterion_01_kinematics_oracle():
    _run(1, criterion_1)


def test_criterion_02_round_trip():
    _run(2, criterion_2)


def test_criterion_03_integrator_order():
    _run(3, criterion_3)


@pytest.mark.slow
def test_criterion_04_calibration_recovery():
    _run(4, criterion_4)


@pytest.mark.slow
def test_criterion_05_error_table_trend():
    _run(5, criterion_5)


def test_criterion_06_linear_filters():
    _run(6, criterion_6)


def test_criterion_07_ukf_internals():
    _run(7, criterion_7)


def test_criterion_08_ekf_jacobian():
    _run(8, criterion_8)


@pytest.mark.slow
def test_criterion_09_fusion_benefit():
    _run(9, criterion_9)


def test_criterion_10_cli_determinism(tmp_path):
    _run(10, criterion_10, tmp_path)


if __name__ == "__main__":
    import tempfile

    checks = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]
    for n, fn in enumerate(checks, 1):
        record(n, *fn())
        print(RESULTS[n], flush=True)
    with tempfile.TemporaryDirectory() as tmp:
        record(10, *criterion_10(tmp))
    print(RESULTS[10])
