"""On-disk formats: dataset directories, pose traces, reports and text tables.

Numbers in data files are written with 17 significant digits so float64
values survive a write/read cycle bit for bit. Files are UTF-8 with LF line
endings; JSON keys are sorted so identical inputs give identical bytes.
"""
from __future__ import annotations

import io
import json
import math
import os
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .calibration.problem import ErrorRow
from .kinematics import N_WHEELS, PARAM_NAMES, KinematicParams
from .odometry import FrameLog
from .simulation import Dataset, Recording

SCHEMA_VERSION = 1
MANIFEST = "manifest.json"
FLOAT_FMT = "%.17g"

FRAME_COLUMNS = (
    ("t",)
    + tuple(f"speed{i}" for i in range(1, N_WHEELS + 1))
    + tuple(f"steer{i}" for i in range(1, N_WHEELS + 1))
    + tuple(f"wheel_rate{i}" for i in range(1, N_WHEELS + 1))
    + tuple(f"steer_rate{i}" for i in range(1, N_WHEELS + 1))
)
TRUTH_COLUMNS = ("t", "x", "y", "theta")
IMU_COLUMNS = ("t", "yaw")
VO_COLUMNS = ("t", "x", "y", "theta")
TRACE_COLUMNS = (
    "t", "x", "y", "theta",
    "truth_x", "truth_y", "truth_theta",
    "err_x", "err_y", "err_theta",
    "nees",
    "P_xx", "P_xy", "P_xtheta", "P_yy", "P_ytheta", "P_thetatheta",
)  # fmt: skip


class SchemaError(ValueError):
    pass


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(path, obj):
    _write_text(Path(path), dumps_json(obj))


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def format_csv(columns: Sequence[str], data, comments: Sequence[str] = ()) -> str:
    data = np.asarray(data, dtype=float).reshape(-1, len(columns))
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    buf.write(",".join(columns) + "\n")
    if data.size:
        np.savetxt(buf, data, fmt=FLOAT_FMT, delimiter=",", newline="\n")
    return buf.getvalue()


def write_csv(path, columns, data, comments=()):
    _write_text(Path(path), format_csv(columns, data, comments))


def read_csv(path, columns: Optional[Sequence[str]] = None) -> Tuple[List[str], List[str], np.ndarray]:
    """Return ``(comments, header, data)``; checks the header if ``columns`` is given."""
    comments, header, rows = [], None, []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if header is None and line.startswith("#"):
                comments.append(line[1:].strip())
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    if header is None:
        raise SchemaError(f"{path}: missing header row")
    if columns is not None and tuple(header) != tuple(columns):
        raise SchemaError(f"{path}: expected columns {','.join(columns)}, got {','.join(header)}")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return comments, header, data


# ---------------------------------------------------------------- datasets


def _recording_files(rid: str) -> Dict[str, str]:
    return {ch: f"recordings/{rid}_{ch}.csv" for ch in ("frames", "truth", "imu", "vo")}


def write_dataset(directory, dataset: Sequence[Recording], manifest_extra: Optional[Mapping] = None) -> Path:
    """Write ``dataset`` as a manifest plus four CSV files per recording."""
    directory = Path(directory)
    entries = []
    for k, rec in enumerate(dataset):
        rid = str(rec.meta.get("id", f"rec{k:03d}"))
        files = _recording_files(rid)
        f = rec.frames
        write_csv(directory / files["frames"], FRAME_COLUMNS, np.column_stack([f.t, f.speed, f.steer, f.wheel_rate, f.steer_rate]))
        write_csv(directory / files["truth"], TRUTH_COLUMNS, np.column_stack([f.t, rec.truth]))
        write_csv(directory / files["imu"], IMU_COLUMNS, np.column_stack([rec.imu_t, rec.imu_yaw]))
        write_csv(directory / files["vo"], VO_COLUMNS, np.column_stack([rec.vo_t, rec.vo_pose]))
        entries.append({"id": rid, "files": files, "meta": dict(rec.meta)})
    manifest = {"schema_version": SCHEMA_VERSION, "recordings": entries}
    meta = dict(getattr(dataset, "meta", {}) or {})
    if manifest_extra:
        meta.update(manifest_extra)
    manifest["dataset"] = meta
    write_json(directory / MANIFEST, manifest)
    return directory


def read_manifest(directory) -> dict:
    path = Path(directory) / MANIFEST
    if not path.is_file():
        raise FileNotFoundError(f"no dataset manifest at {path}")
    manifest = read_json(path)
    version = manifest.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported dataset schema version {version!r} (expected {SCHEMA_VERSION})")
    return manifest


def read_dataset(directory) -> Dataset:
    directory = Path(directory)
    manifest = read_manifest(directory)
    recordings = []
    for entry in manifest["recordings"]:
        files = entry["files"]
        fr = read_csv(directory / files["frames"], FRAME_COLUMNS)[2]
        tr = read_csv(directory / files["truth"], TRUTH_COLUMNS)[2]
        imu = read_csv(directory / files["imu"], IMU_COLUMNS)[2]
        vo = read_csv(directory / files["vo"], VO_COLUMNS)[2]
        w = N_WHEELS
        frames = FrameLog(fr[:, 0], fr[:, 1 : 1 + w], fr[:, 1 + w : 1 + 2 * w], fr[:, 1 + 2 * w : 1 + 3 * w], fr[:, 1 + 3 * w :])
        if not np.array_equal(tr[:, 0], frames.t):
            raise SchemaError(f"{entry['id']}: truth timestamps differ from frame timestamps")
        recordings.append(Recording(frames, tr[:, 1:], imu[:, 0], imu[:, 1], vo[:, 0], vo[:, 1:], entry.get("meta", {})))
    return Dataset(recordings, manifest.get("dataset", {}))


# ---------------------------------------------------------------- traces


def trace_rows(trace) -> np.ndarray:
    P = trace.cov
    return np.column_stack(
        [
            trace.t, trace.pose, trace.truth, trace.error, trace.nees,
            P[:, 0, 0], P[:, 0, 1], P[:, 0, 2], P[:, 1, 1], P[:, 1, 2], P[:, 2, 2],
        ]
    )  # fmt: skip


def trace_header(trace, recording_id: str = "") -> List[str]:
    lines = [f"filter={trace.filter}"]
    if recording_id:
        lines.append(f"recording={recording_id}")
    if trace.filter == "UKF" and trace.ukf is not None:
        lines.append(f"alpha={trace.ukf.alpha!r} beta={trace.ukf.beta!r} kappa={trace.ukf.kappa!r}")
    return lines


def write_trace(path, trace, recording_id: str = ""):
    write_csv(path, TRACE_COLUMNS, trace_rows(trace), trace_header(trace, recording_id))


def read_trace(path) -> Tuple[Dict[str, str], np.ndarray]:
    """Header key/values and the ``(N, 17)`` trace array."""
    comments, _, data = read_csv(path, TRACE_COLUMNS)
    info = {}
    for c in comments:
        for tok in c.split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                info[k] = v
    return info, data


# ---------------------------------------------------------------- tables

_TABLE_WIDTH = 13


def format_error_table(table: Mapping[str, ErrorRow], title: str = "") -> str:
    """Plain-text per-trajectory error table; values at 6 significant digits."""
    lines = []
    if title:
        lines.append(title)
    lines.append("trajectory".ljust(_TABLE_WIDTH) + "".join(c.rjust(_TABLE_WIDTH) for c in ErrorRow.COLUMNS))
    for kind, row in table.items():
        lines.append(kind.ljust(_TABLE_WIDTH) + "".join(f"{v:.6g}".rjust(_TABLE_WIDTH) for v in row.values()))
    return "\n".join(lines) + "\n"


def parse_error_table(text: str) -> Dict[str, ErrorRow]:
    """Inverse of :func:`format_error_table` (title line optional)."""
    out: Dict[str, ErrorRow] = {}
    seen_header = False
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "trajectory" and tuple(parts[1:]) == ErrorRow.COLUMNS:
            seen_header = True
            continue
        if seen_header:
            if len(parts) != 1 + len(ErrorRow.COLUMNS):
                raise SchemaError(f"malformed error-table row: {line!r}")
            out[parts[0]] = ErrorRow(*(float(v) for v in parts[1:]))
    if not seen_header:
        raise SchemaError("no error-table header found")
    return out


def format_param_table(rows: Mapping[str, KinematicParams]) -> str:
    """Parameter table in millimetres, one labelled row per parameter set."""
    width = 10
    lines = ["".ljust(6) + "".join(n.rjust(width) for n in PARAM_NAMES)]
    for label, p in rows.items():
        mm = p.to_vector() * 1000.0
        lines.append(label.ljust(6) + "".join(f"{v:.2f}".rjust(width) for v in mm))
    return "\n".join(lines) + "\n"


def parse_param_table(text: str) -> Dict[str, KinematicParams]:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or tuple(lines[0].split()) != PARAM_NAMES:
        raise SchemaError("parameter table header does not match")
    out = {}
    for line in lines[1:]:
        parts = line.split()
        out[parts[0]] = KinematicParams.from_vector(np.array([float(v) for v in parts[1:]]) / 1000.0)
    return out


def report_dict(report) -> dict:
    """Calibration report as JSON-ready data without wall-clock time."""
    d = report.as_dict()
    d.pop("wall_time", None)
    return _finite_or_str(d)


def _finite_or_str(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _finite_or_str(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_str(v) for v in obj]
    return obj


def load_params(path) -> KinematicParams:
    """Parameters from a params JSON file or the ``solution`` of a report."""
    data = read_json(path)
    if "solution" in data:
        data = data["solution"]
    return KinematicParams.from_dict(data)


def resolve_out_dir(cli_value: Optional[str], config_value: Optional[str], env_var: str = "FOURWIS_OUT") -> Path:
    """``--out`` wins, then the environment variable, then the config file."""
    for v in (cli_value, os.environ.get(env_var), config_value):
        if v:
            return Path(v)
    return Path("out")
