"""Versioned CSV/JSON schemas, config loading, and atomic file writes."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from . import biomech as bm
from . import gaitsim as gs
from . import liegroups as lie
from . import state as st
from .errors import DegenerateProjection, SchemaError
from .filter import FilterConfig

CSV_MAGIC = "# lgpose-csv v1"

IMU_COLUMNS = (
    "t",
    "ap_x", "ap_y", "ap_z",
    "als_x", "als_y", "als_z",
    "ars_x", "ars_y", "ars_z",
    "qp_w", "qp_x", "qp_y", "qp_z",
    "qls_w", "qls_x", "qls_y", "qls_z",
    "qrs_w", "qrs_x", "qrs_y", "qrs_z",
    "fc_l", "fc_r",
)

ANGLE_NAMES = ("knee_l", "knee_r", "hip_l_y", "hip_l_x", "hip_l_z", "hip_r_y", "hip_r_x", "hip_r_z")

POSE_COLUMNS = ("t",) + tuple(
    f"{seg}_{f}"
    for seg in ("p", "ls", "rs")
    for f in ("x", "y", "z", "qw", "qx", "qy", "qz", "vx", "vy", "vz")
) + ANGLE_NAMES


def _atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the same directory so partial files never parse."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format_csv(columns: tuple, rows: np.ndarray) -> str:
    lines = [CSV_MAGIC, ",".join(columns)]
    for row in rows:
        lines.append(",".join(f"{v:.12g}" for v in row))
    return "\n".join(lines) + "\n"


def _parse_csv(path: str, columns: tuple) -> np.ndarray:
    try:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if len(lines) < 3:
        raise SchemaError(f"{path}: empty or truncated (need magic, header, and data rows)")
    if lines[0].strip() != CSV_MAGIC:
        raise SchemaError(f"{path}: first line must be '{CSV_MAGIC}'")
    header = tuple(name.strip() for name in lines[1].split(","))
    if header != columns:
        raise SchemaError(f"{path}: column header does not match the v1 schema")
    try:
        data = np.array(
            [[float(v) for v in ln.split(",")] for ln in lines[2:] if ln.strip()], dtype=float
        )
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric cell: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(columns):
        raise SchemaError(f"{path}: wrong number of columns")
    if not np.all(np.isfinite(data)):
        raise SchemaError(f"{path}: contains non-finite values")
    if np.any(np.diff(data[:, 0]) <= 0.0):
        raise SchemaError(f"{path}: timestamps must be strictly increasing")
    return data


def write_imu_csv(path: str, frames: list) -> None:
    rows = np.empty((len(frames), len(IMU_COLUMNS)))
    for k, f in enumerate(frames):
        rows[k, 0] = f.t
        rows[k, 1:4] = f.acc_p
        rows[k, 4:7] = f.acc_ls
        rows[k, 7:10] = f.acc_rs
        rows[k, 10:14] = lie.rotation_to_quat(f.rot_p)
        rows[k, 14:18] = lie.rotation_to_quat(f.rot_ls)
        rows[k, 18:22] = lie.rotation_to_quat(f.rot_rs)
        rows[k, 22] = 1.0 if f.fc_left else 0.0
        rows[k, 23] = 1.0 if f.fc_right else 0.0
    _atomic_write_text(path, _format_csv(IMU_COLUMNS, rows))


def read_imu_csv(path: str) -> list:
    data = _parse_csv(path, IMU_COLUMNS)
    frames = []
    for row in data:
        frames.append(
            bm.ImuFrame(
                t=float(row[0]),
                acc_p=row[1:4].copy(),
                acc_ls=row[4:7].copy(),
                acc_rs=row[7:10].copy(),
                rot_p=lie.quat_to_rotation(row[10:14]),
                rot_ls=lie.quat_to_rotation(row[14:18]),
                rot_rs=lie.quat_to_rotation(row[18:22]),
                fc_left=row[22] != 0.0,
                fc_right=row[23] != 0.0,
            )
        )
    return frames


def pose_angles_deg(x: st.PoseState, body: bm.BodyParams) -> np.ndarray:
    """Knee and hip angle row (degrees) for one state; NaN when degenerate."""
    out = np.full(8, np.nan)
    for i, side in enumerate((bm.LEFT, bm.RIGHT)):
        try:
            out[i] = np.degrees(bm.knee_angle(x, body, side))
            thigh = bm.thigh_orientation(x, body, side)
        except DegenerateProjection:
            continue
        ay, ax, az = bm.hip_angles_yxz(x.pelvis[:3, :3], thigh)
        out[2 + 3 * i : 5 + 3 * i] = np.degrees([ay, ax, az])
    return out


def write_pose_csv(path: str, t: np.ndarray, states: list, body: bm.BodyParams) -> None:
    rows = np.empty((len(states), len(POSE_COLUMNS)))
    for k, x in enumerate(states):
        rows[k, 0] = t[k]
        for j, (pose, vel) in enumerate(
            ((x.pelvis, x.v_pelvis), (x.left_shank, x.v_left_shank), (x.right_shank, x.v_right_shank))
        ):
            base = 1 + 10 * j
            rows[k, base : base + 3] = pose[:3, 3]
            rows[k, base + 3 : base + 7] = lie.rotation_to_quat(pose[:3, :3])
            rows[k, base + 7 : base + 10] = vel
        rows[k, 31:39] = pose_angles_deg(x, body)
    _atomic_write_text(path, _format_csv(POSE_COLUMNS, rows))


def read_pose_csv(path: str) -> dict:
    """Parse a truth/est CSV into arrays keyed by quantity."""
    data = _parse_csv(path, POSE_COLUMNS)
    out = {"t": data[:, 0]}
    for j, seg in enumerate(("p", "ls", "rs")):
        base = 1 + 10 * j
        out[f"{seg}_pos"] = data[:, base : base + 3]
        out[f"{seg}_quat"] = data[:, base + 3 : base + 7]
        out[f"{seg}_vel"] = data[:, base + 7 : base + 10]
    for i, name in enumerate(ANGLE_NAMES):
        out[name] = data[:, 31 + i]
    return out


def pose_row_to_state(row: dict, k: int) -> st.PoseState:
    """Rebuild a PoseState from one parsed pose-CSV row."""
    def pose(seg: str) -> np.ndarray:
        return lie.make_pose(lie.quat_to_rotation(row[f"{seg}_quat"][k]), row[f"{seg}_pos"][k])

    return st.PoseState(
        pose("p"), pose("ls"), pose("rs"),
        row["p_vel"][k].copy(), row["ls_vel"][k].copy(), row["rs_vel"][k].copy(),
    )


# --- run configuration ----------------------------------------------------------

@dataclass
class RunConfig:
    body: bm.BodyParams
    gait: gs.GaitParams
    sim_noise: bm.NoiseParams
    filter_config: FilterConfig
    seed: int


def default_config_dict() -> dict:
    """The full default configuration document."""
    return {
        "seed": 1,
        "body": {
            "d_pelvis": 0.25,
            "d_lthigh": 0.40,
            "d_rthigh": 0.40,
            "d_lshank": 0.45,
            "d_rshank": 0.45,
            "z_pelvis": 0.80,
            "z_floor": 0.0,
            "knee_rom_min_deg": 0.0,
            "knee_rom_max_deg": 180.0,
        },
        "gait": {
            "stride_length": 0.5,
            "cadence": 1.6,
            "step_height": 0.06,
            "duration": 30.0,
            "sample_rate": 100.0,
            "path": "straight",
        },
        "sim_noise": {"sigma2_acc": 0.04, "sigma2_ori": 1.0e-4},
        "filter": {
            "sigma2_acc": 100.0,
            "sigma2_qori": 1000.0,
            "sigma2_ori": 0.01,
            "sigma2_mp": 0.1,
            "sigma2_ls": [0.01, 0.01, 0.01, 1.0e-4],
            "sigma2_rs": [0.01, 0.01, 0.01, 1.0e-4],
            "sigma2_lim": 10.0,
            "p0_scale": 0.5,
            "jacobian_terms": 10,
            "limiter": True,
        },
    }


def _check_keys(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise SchemaError(f"unknown key(s) {sorted(unknown)} in {where}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where} must be a number, got {value!r}")
    return float(value)


def _vector(value, length: int, where: str) -> np.ndarray:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return np.full(length, float(value))
    if isinstance(value, list) and len(value) == length:
        return np.array([_number(v, where) for v in value])
    raise SchemaError(f"{where} must be a number or a list of {length} numbers")


def parse_config(doc: dict) -> RunConfig:
    """Validate a configuration document (unknown keys rejected)."""
    if not isinstance(doc, dict):
        raise SchemaError("config root must be a JSON object")
    defaults = default_config_dict()
    _check_keys(doc, {"seed", "body", "gait", "sim_noise", "filter"}, "config root")
    merged = {}
    for section in ("body", "gait", "sim_noise", "filter"):
        given = doc.get(section, {})
        if not isinstance(given, dict):
            raise SchemaError(f"'{section}' must be an object")
        _check_keys(given, set(defaults[section]), f"'{section}'")
        merged[section] = {**defaults[section], **given}

    seed = doc.get("seed", defaults["seed"])
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise SchemaError("'seed' must be a non-negative integer")

    b = merged["body"]
    try:
        body = bm.BodyParams(
            d_pelvis=_number(b["d_pelvis"], "body.d_pelvis"),
            d_lthigh=_number(b["d_lthigh"], "body.d_lthigh"),
            d_rthigh=_number(b["d_rthigh"], "body.d_rthigh"),
            d_lshank=_number(b["d_lshank"], "body.d_lshank"),
            d_rshank=_number(b["d_rshank"], "body.d_rshank"),
            z_pelvis=_number(b["z_pelvis"], "body.z_pelvis"),
            z_floor=_number(b["z_floor"], "body.z_floor"),
            knee_rom_min=np.radians(_number(b["knee_rom_min_deg"], "body.knee_rom_min_deg")),
            knee_rom_max=np.radians(_number(b["knee_rom_max_deg"], "body.knee_rom_max_deg")),
        )
    except ValueError as exc:
        raise SchemaError(f"body: {exc}") from exc

    g = merged["gait"]
    if g["path"] not in gs.PATHS:
        raise SchemaError(f"gait.path must be one of {gs.PATHS}")
    try:
        gait = gs.GaitParams(
            stride_length=_number(g["stride_length"], "gait.stride_length"),
            cadence=_number(g["cadence"], "gait.cadence"),
            step_height=_number(g["step_height"], "gait.step_height"),
            duration=_number(g["duration"], "gait.duration"),
            sample_rate=_number(g["sample_rate"], "gait.sample_rate"),
            path=g["path"],
            body=body,
            seed=seed,
        )
    except ValueError as exc:
        raise SchemaError(f"gait: {exc}") from exc

    dt = 1.0 / gait.sample_rate
    sn = merged["sim_noise"]
    sim_noise = bm.NoiseParams(
        sigma2_acc=_vector(sn["sigma2_acc"], 9, "sim_noise.sigma2_acc"),
        sigma2_ori=_vector(sn["sigma2_ori"], 9, "sim_noise.sigma2_ori"),
        dt=dt,
    )

    f = merged["filter"]
    if not isinstance(f["limiter"], bool):
        raise SchemaError("filter.limiter must be a boolean")
    jt = f["jacobian_terms"]
    if isinstance(jt, bool) or not isinstance(jt, int) or jt < 1:
        raise SchemaError("filter.jacobian_terms must be a positive integer")
    noise = bm.NoiseParams(
        sigma2_acc=_vector(f["sigma2_acc"], 9, "filter.sigma2_acc"),
        sigma2_qori=_vector(f["sigma2_qori"], 9, "filter.sigma2_qori"),
        sigma2_ori=_vector(f["sigma2_ori"], 9, "filter.sigma2_ori"),
        sigma2_mp=_number(f["sigma2_mp"], "filter.sigma2_mp"),
        sigma2_ls=_vector(f["sigma2_ls"], 4, "filter.sigma2_ls"),
        sigma2_rs=_vector(f["sigma2_rs"], 4, "filter.sigma2_rs"),
        sigma2_lim=_vector(f["sigma2_lim"], 18, "filter.sigma2_lim"),
        dt=dt,
    )
    try:
        filter_config = FilterConfig(
            noise=noise,
            body=body,
            p0_scale=_number(f["p0_scale"], "filter.p0_scale"),
            jacobian_terms=jt,
            limiter=f["limiter"],
        )
    except ValueError as exc:
        raise SchemaError(f"filter: {exc}") from exc

    return RunConfig(body=body, gait=gait, sim_noise=sim_noise, filter_config=filter_config, seed=seed)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(doc)


def write_json_atomic(path: str, obj: dict) -> None:
    _atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
