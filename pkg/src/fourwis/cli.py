"""Command-line workflow: ``simulate -> calibrate -> estimate -> compare``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import io as fio
from .calibration import Bounds, calibrate
from .calibration.calibrate import Method
from .config import RunConfig
from .estimators import FilterKind, run_estimator
from .kinematics import KinematicParams
from .simulation import make_calibration_dataset
from .trajectory import ALL_KINDS, TrajectorySpec

ENV_OUT = "FOURWIS_OUT"


def _warn(msg: str):
    print(f"warning: {msg}", file=sys.stderr)


def _setup(args):
    cfg = RunConfig.load(args.config)
    out = fio.resolve_out_dir(args.out, cfg.output_dir, ENV_OUT)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def cmd_simulate(args) -> Path:
    cfg, out = _setup(args)
    if args.wall:
        cfg = RunConfig(**{**cfg.__dict__, "wall_mode": True})
    dist = cfg.effective_disturbance(args.seed)
    true_params = cfg.robot.true_params()
    command_params = cfg.robot.base_params()
    specs = [TrajectorySpec.default(k) for k in ALL_KINDS]
    if cfg.dataset.sample_dt is not None:
        specs = [TrajectorySpec.default(s.kind, sample_dt=cfg.dataset.sample_dt) for s in specs]
    data = make_calibration_dataset(
        true_params, dist, specs=specs, repetitions=cfg.dataset.repetitions, command_params=command_params
    )
    extra = {
        "true_params": true_params.as_dict(),
        "command_params": command_params.as_dict(),
        "disturbance": dist.as_dict(),
        "wall_mode": cfg.wall_mode or args.wall,
        "repetitions": cfg.dataset.repetitions,
        "master_seed": dist.rng_seed,
        "specs": [s.as_dict() for s in specs],
    }
    fio.write_dataset(out, data, extra)
    print(f"wrote {len(data)} recordings to {out}")
    return out


def cmd_calibrate(args) -> Path:
    cfg, out = _setup(args)
    data = fio.read_dataset(args.dataset)
    method = Method.parse(args.method or cfg.calibration.method)
    options = dict(cfg.calibration.options)
    if args.seed is not None and method in (Method.GA, Method.PSO):
        options["seed"] = int(args.seed)
    z0 = cfg.robot.base_params()
    bounds = Bounds.around(z0, cfg.calibration.bound_fraction)
    report = calibrate(data, z0, bounds, method, options, weights=cfg.calibration.weights)
    fio.write_json(out / "report.json", fio.report_dict(report))
    fio.write_json(out / "params.json", report.solution.as_dict())
    tables = fio.format_error_table(report.errors_before, "ODOMETRY ERROR BEFORE CALIBRATION")
    tables += "\n" + fio.format_error_table(report.errors_after, "ODOMETRY ERROR AFTER CALIBRATION")
    fio._write_text(out / "errors.txt", tables)
    rows = {"NOM": z0, method.name if method is not Method.INTERIOR_POINT else "IP": report.solution}
    true = data.meta.get("true_params")
    if true:
        rows["TRUE"] = KinematicParams.from_dict(true)
    fio._write_text(out / "params.txt", fio.format_param_table(rows))
    print(f"{method.value}: cost {report.initial_cost:.6g} -> {report.final_cost:.6g} ({report.status})")
    return out


def cmd_estimate(args) -> Path:
    cfg, out = _setup(args)
    data = fio.read_dataset(args.dataset)
    kinds = [FilterKind.parse(f) for f in (args.filter or [cfg.filter.kind])]
    params = fio.load_params(args.params) if args.params else cfg.robot.base_params()
    selected = set(args.recording or [])
    written = 0
    for k, rec in enumerate(data):
        rid = str(rec.meta.get("id", f"rec{k:03d}"))
        if selected and rid not in selected:
            continue
        for kind in kinds:
            trace = run_estimator(rec, params, kind, cfg.filter.noise, ukf=cfg.filter.ukf)
            fio.write_trace(out / "traces" / f"{rid}_{kind.value}.csv", trace, rid)
            written += 1
    if selected and written == 0:
        raise ValueError(f"no recordings matched {sorted(selected)}")
    print(f"wrote {written} traces to {out / 'traces'}")
    return out


SUMMARY_COLUMNS = ("trace", "filter", "final_position_error", "rms_position_error", "max_position_error", "rms_diff_vs_first")


def compare_traces(paths: Sequence[Path]):
    """Summary rows and per-trace x-y path arrays over the common time window."""
    loaded = []
    for p in paths:
        info, data = fio.read_trace(p)
        if data.shape[0] == 0:
            raise ValueError(f"{p}: empty trace")
        loaded.append((Path(p), info, data))
    lo = max(d[0, 0] for _, _, d in loaded)
    hi = min(d[-1, 0] for _, _, d in loaded)
    if hi < lo:
        raise ValueError("traces do not overlap in time")
    warn = any(d[0, 0] != lo or d[-1, 0] != hi for _, _, d in loaded)
    ref = None
    rows, paths_xy = [], []
    for p, info, d in loaded:
        d = d[(d[:, 0] >= lo) & (d[:, 0] <= hi)]
        pos_err = np.hypot(d[:, 7], d[:, 8])
        if ref is None:
            ref = d
            diff = 0.0
        else:
            xi = np.interp(ref[:, 0], d[:, 0], d[:, 1])
            yi = np.interp(ref[:, 0], d[:, 0], d[:, 2])
            diff = float(np.sqrt(np.mean((xi - ref[:, 1]) ** 2 + (yi - ref[:, 2]) ** 2)))
        rows.append(
            (p.stem, info.get("filter", ""), float(pos_err[-1]), float(np.sqrt(np.mean(pos_err**2))), float(pos_err.max()), diff)
        )
        paths_xy.append((p.stem, d[:, [0, 1, 2, 4, 5]]))
    return rows, paths_xy, warn, (lo, hi)


def cmd_compare(args) -> Path:
    cfg, out = _setup(args)
    rows, paths_xy, warn, (lo, hi) = compare_traces([Path(t) for t in args.traces])
    if warn:
        _warn(f"trace time ranges differ; comparison restricted to overlap [{lo!r}, {hi!r}]")
    lines = [",".join(SUMMARY_COLUMNS)]
    for r in rows:
        lines.append(",".join([r[0], r[1]] + [fio.FLOAT_FMT % v for v in r[2:]]))
    fio._write_text(out / "summary.csv", "\n".join(lines) + "\n")
    for name, arr in paths_xy:
        fio.write_csv(out / "paths" / f"{name}_xy.csv", ("t", "x", "y", "truth_x", "truth_y"), arr)
    width = max(len(r[0]) for r in rows) + 2
    print("trace".ljust(width) + "final [m]".rjust(12) + "rms [m]".rjust(12) + "max [m]".rjust(12))
    for r in rows:
        print(r[0].ljust(width) + f"{r[2]:12.6f}{r[3]:12.6f}{r[4]:12.6f}")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fourwis", description="Odometry calibration and pose estimation for 4WIS4WID robots.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--out", help=f"output directory (else ${ENV_OUT}, else the config's output_dir)")

    p = sub.add_parser("simulate", help="write a 30-recording synthetic dataset")
    common(p)
    p.add_argument("--wall", action="store_true", help="enable gravity drift (wall-mounted operation)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit kinematic parameters to a dataset")
    common(p)
    p.add_argument("dataset", help="dataset directory")
    p.add_argument("--method", help="LM, InteriorPoint, GA or PSO")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("estimate", help="run OdomOnly/EKF/UKF over a dataset")
    common(p)
    p.add_argument("dataset", help="dataset directory")
    p.add_argument("--filter", action="append", help="OdomOnly, EKF or UKF (repeatable)")
    p.add_argument("--params", help="params.json or report.json with the kinematic parameters")
    p.add_argument("--recording", action="append", help="recording id to process (repeatable)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compare", help="summarize trace files against truth")
    common(p)
    p.add_argument("traces", nargs="+", help="trace CSV files")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # report and exit nonzero, one line
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
