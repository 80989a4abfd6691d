import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fourwis import io as fio
from fourwis.calibration.problem import ErrorRow
from fourwis.cli import main
from fourwis.config import ConfigError, RunConfig
from fourwis.kinematics import KinematicParams
from fourwis.odometry import integrate_recording
from fourwis.simulation import DisturbanceConfig, make_calibration_dataset

FAST = {"dataset": {"repetitions": 1, "sample_dt": 0.1}}


@pytest.fixture
def cfg_path(tmp_path):
    def write(data=FAST, name="cfg.json"):
        p = tmp_path / name
        p.write_text(json.dumps(data))
        return str(p)

    return write


def run(*argv):
    return main([str(a) for a in argv])


def test_dataset_round_trip(tmp_path, mismatched):
    data = make_calibration_dataset(mismatched, DisturbanceConfig(rng_seed=3), repetitions=1, sample_dt=0.1)
    fio.write_dataset(tmp_path / "d", data, {"note": "x"})
    again = fio.read_dataset(tmp_path / "d")
    assert list(again) == list(data)
    assert again.meta["note"] == "x"
    raw = (tmp_path / "d" / "recordings" / "LineX_0_frames.csv").read_bytes()
    assert b"\r" not in raw and raw.startswith(b"t,speed1,")


def test_schema_version_checked(tmp_path, mismatched):
    data = make_calibration_dataset(mismatched, DisturbanceConfig(), repetitions=1, sample_dt=0.5)
    fio.write_dataset(tmp_path, data)
    m = json.loads((tmp_path / "manifest.json").read_text())
    m["schema_version"] = 99
    (tmp_path / "manifest.json").write_text(json.dumps(m))
    with pytest.raises(fio.SchemaError):
        fio.read_dataset(tmp_path)


def test_csv_header_checked(tmp_path):
    fio.write_csv(tmp_path / "a.csv", ("t", "yaw"), np.zeros((2, 2)))
    with pytest.raises(fio.SchemaError):
        fio.read_csv(tmp_path / "a.csv", ("t", "x"))


vals = st.floats(0, 1e3, allow_nan=False, allow_subnormal=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(vals, min_size=6, max_size=6))
def test_error_table_text_round_trip(values):
    table = {"LineX": ErrorRow(*values), "SpinCW": ErrorRow(*values[::-1])}
    parsed = fio.parse_error_table(fio.format_error_table(table, "title"))
    for key, row in table.items():
        for a, b in zip(row.values(), parsed[key].values()):
            assert b == float(f"{a:.6g}")


def test_param_table_in_mm():
    text = fio.format_param_table({"NOM": KinematicParams.nominal()})
    assert "112.50" in text and "25.40" in text and "-112.50" in text
    parsed = fio.parse_param_table(text)
    np.testing.assert_allclose(parsed["NOM"].to_vector(), KinematicParams.nominal().to_vector())


def test_out_dir_precedence(monkeypatch):
    monkeypatch.setenv("FOURWIS_OUT", "/env")
    assert str(fio.resolve_out_dir("/cli", "/cfg")) == "/cli"
    assert str(fio.resolve_out_dir(None, "/cfg")) == "/env"
    monkeypatch.delenv("FOURWIS_OUT")
    assert str(fio.resolve_out_dir(None, "/cfg")) == "/cfg"


# ---------------------------------------------------------------- config


def test_config_rejects_unknown_keys():
    for bad in ({"bogus": 1}, {"robot": {"colour": "red"}}, {"filter": {"ukf": {"gamma": 1}}}, {"disturbance": {"x": 1}}):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(bad)


def test_config_validates_values():
    for bad in (
        {"robot": {"perturbation": {"r_9": 0.1}}},
        {"calibration": {"method": "newton"}},
        {"filter": {"kind": "KF"}},
        {"dataset": {"repetitions": 0}},
        {"disturbance": {"slip_ratio": 2}},
        {"wall_mode": "yes"},
    ):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(bad)


def test_config_round_trip_and_wall():
    cfg = RunConfig.from_dict({"wall_mode": True, "robot": {"perturbation": {"r_1": 0.03}}})
    assert RunConfig.from_dict(cfg.as_dict()) == cfg
    assert cfg.effective_disturbance(5).gravity_drift > 0
    assert cfg.effective_disturbance(5).rng_seed == 5
    assert cfg.robot.true_params().wheel_radius[0] == pytest.approx(0.0254 * 1.03)


# ---------------------------------------------------------------- CLI


def test_simulate_writes_thirty_recordings(tmp_path, cfg_path):
    cfg = cfg_path({"dataset": {"sample_dt": 0.1}})
    assert run("simulate", "--config", cfg, "--seed", 1, "--out", tmp_path / "d") == 0
    m = fio.read_manifest(tmp_path / "d")
    assert len(m["recordings"]) == 30
    assert len(list((tmp_path / "d" / "recordings").glob("*.csv"))) == 120
    assert m["dataset"]["wall_mode"] is False


def test_simulate_wall_flag(tmp_path, cfg_path):
    assert run("simulate", "--config", cfg_path(), "--wall", "--out", tmp_path / "d") == 0
    m = fio.read_manifest(tmp_path / "d")
    assert m["dataset"]["wall_mode"] is True and m["dataset"]["disturbance"]["gravity_drift"] > 0


def test_env_var_sets_output(tmp_path, cfg_path, monkeypatch):
    monkeypatch.setenv("FOURWIS_OUT", str(tmp_path / "env"))
    assert run("simulate", "--config", cfg_path()) == 0
    assert (tmp_path / "env" / "manifest.json").is_file()


def test_missing_dataset_fails_cleanly(tmp_path, capsys):
    assert run("calibrate", tmp_path / "nope", "--out", tmp_path / "o") != 0
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: FileNotFoundError:")


def test_bad_config_fails_cleanly(tmp_path, cfg_path, capsys):
    assert run("simulate", "--config", cfg_path({"nope": 1}), "--out", tmp_path) != 0
    assert capsys.readouterr().err.startswith("error: ConfigError:")


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipe")
    cfg = root / "cfg.json"
    cfg.write_text(json.dumps({**FAST, "robot": {"perturbation": {"r_1": 0.03, "y_w2": -0.02, "x_w3": 0.04}}}))
    assert run("simulate", "--config", cfg, "--seed", 4, "--out", root / "data") == 0
    assert run("calibrate", root / "data", "--config", cfg, "--method", "LM", "--out", root / "cal") == 0
    assert run(
        "estimate", root / "data", "--config", cfg, "--params", root / "cal" / "report.json",
        "--filter", "OdomOnly", "--filter", "EKF", "--filter", "UKF", "--recording", "LineX_0", "--out", root / "est",
    ) == 0  # fmt: skip
    return root, cfg


def test_calibrate_outputs(pipeline):
    root, _ = pipeline
    report = json.loads((root / "cal" / "report.json").read_text())
    assert report["final_cost"] <= report["initial_cost"]
    assert "wall_time" not in report
    text = (root / "cal" / "errors.txt").read_text()
    assert "BEFORE" in text and "AFTER" in text
    before, after = text.split("\n\n")
    assert set(fio.parse_error_table(before)) == set(fio.parse_error_table(after))
    assert "TRUE" in (root / "cal" / "params.txt").read_text()


def test_estimate_odom_only_exact(pipeline):
    root, _ = pipeline
    data = fio.read_dataset(root / "data")
    rec = [r for r in data if r.meta["id"] == "LineX_0"][0]
    params = fio.load_params(root / "cal" / "report.json")
    info, arr = fio.read_trace(root / "est" / "traces" / "LineX_0_OdomOnly.csv")
    assert info["filter"] == "OdomOnly"
    assert np.array_equal(arr[:, 1:4], integrate_recording(params, rec.frames, rec.truth[0]))


def test_estimate_ukf_header_and_columns(pipeline):
    root, _ = pipeline
    info, arr = fio.read_trace(root / "est" / "traces" / "LineX_0_UKF.csv")
    assert info["alpha"] == "0.001" and info["beta"] == "2.0" and info["kappa"] == "0.0"
    _, ekf = fio.read_trace(root / "est" / "traces" / "LineX_0_EKF.csv")
    data = fio.read_dataset(root / "data")
    n = len([r for r in data if r.meta["id"] == "LineX_0"][0].frames)
    assert ekf.shape == (n, len(fio.TRACE_COLUMNS)) and np.all(np.isfinite(ekf))


def test_compare_identical_and_overlap(pipeline, tmp_path, capsys):
    root, cfg = pipeline
    t = root / "est" / "traces" / "LineX_0_EKF.csv"
    copy = tmp_path / "copy.csv"
    copy.write_bytes(t.read_bytes())
    assert run("compare", t, copy, "--out", tmp_path / "c1") == 0
    lines = (tmp_path / "c1" / "summary.csv").read_text().splitlines()
    assert lines[0].startswith("trace,filter,final_position_error")
    assert lines[2].split(",")[-1] == "0"
    assert (tmp_path / "c1" / "paths" / "copy_xy.csv").is_file()
    # truncate one trace: comparison is restricted to the overlap with a warning
    text = t.read_text().splitlines()
    short = tmp_path / "short.csv"
    short.write_text("\n".join(text[: len(text) // 2]) + "\n")
    capsys.readouterr()
    assert run("compare", t, short, "--out", tmp_path / "c2") == 0
    assert "warning:" in capsys.readouterr().err


def test_compare_fusion_beats_odometry_under_slip(tmp_path, cfg_path):
    cfg = cfg_path({**FAST, "disturbance": {"slip_ratio": 0.1}})
    assert run("simulate", "--config", cfg, "--seed", 5, "--out", tmp_path / "d") == 0
    assert run(
        "estimate", tmp_path / "d", "--config", cfg, "--filter", "OdomOnly", "--filter", "EKF",
        "--recording", "LineX_0", "--out", tmp_path / "e",
    ) == 0  # fmt: skip
    tr = tmp_path / "e" / "traces"
    assert run("compare", tr / "LineX_0_OdomOnly.csv", tr / "LineX_0_EKF.csv", "--out", tmp_path / "c") == 0
    rows = [l.split(",") for l in (tmp_path / "c" / "summary.csv").read_text().splitlines()[1:]]
    assert float(rows[1][2]) < 0.2 * float(rows[0][2])


def _snapshot(path):
    return {p.relative_to(path): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


def test_cli_is_deterministic(tmp_path, cfg_path):
    cfg = cfg_path({**FAST, "robot": {"perturbation": {"r_1": 0.03}}})
    snaps = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert run("simulate", "--config", cfg, "--seed", 9, "--out", out / "data") == 0
        assert run("calibrate", out / "data", "--config", cfg, "--method", "GA", "--seed", 2, "--out", out / "cal") == 0
        assert run("estimate", out / "data", "--config", cfg, "--filter", "UKF", "--recording", "SpinCW_0", "--out", out / "est") == 0
        assert run("compare", *sorted((out / "est" / "traces").glob("*.csv")), "--out", out / "cmp") == 0
        snaps.append(_snapshot(out))
    assert snaps[0] == snaps[1]
