"""Command line front end: simulate, estimate, eval.

Exit codes: 0 ok, 2 input/schema problem, 3 infeasible gait configuration,
4 numeric divergence inside the filter.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import fileio, gaitsim, metrics
from . import state as st
from .errors import InfeasibleGait, NonFiniteState, SchemaError
from .filter import run_filter

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_INFEASIBLE = 3
EXIT_DIVERGED = 4


def cmd_simulate(config_path: str, out_dir: str) -> int:
    cfg = fileio.load_config(config_path)
    truth = gaitsim.generate(cfg.gait)
    frames = gaitsim.corrupt(truth, cfg.sim_noise, cfg.seed)
    os.makedirs(out_dir, exist_ok=True)
    fileio.write_pose_csv(os.path.join(out_dir, "truth.csv"), truth.t, truth.states, cfg.body)
    fileio.write_imu_csv(os.path.join(out_dir, "imu.csv"), frames)
    print(f"simulate: wrote {len(truth)} frames to {out_dir}/truth.csv and {out_dir}/imu.csv")
    return EXIT_OK


def cmd_estimate(imu_path: str, config_path: str, out_path: str) -> int:
    cfg = fileio.load_config(config_path)
    frames = fileio.read_imu_csv(imu_path)
    init = st.Belief(gaitsim.standing_state(cfg.body), cfg.filter_config.initial_covariance())
    trajectory, trace = run_filter(frames, init, cfg.filter_config)
    t = np.array([f.t for f in frames])
    fileio.write_pose_csv(out_path, t, trajectory, cfg.body)
    print(f"estimate: {len(frames)} frames in {trace.runtime_s * 1e3:.1f} ms -> {out_path}")
    return EXIT_OK


def cmd_eval(est_path: str, ref_path: str, out_path: str) -> int:
    est = fileio.read_pose_csv(est_path)
    ref = fileio.read_pose_csv(ref_path)
    if est["t"].shape != ref["t"].shape:
        raise SchemaError(f"row count mismatch: {est['t'].size} vs {ref['t'].size}")
    if np.max(np.abs(est["t"] - ref["t"])) > 1e-6:
        raise SchemaError("timestamps differ by more than 1e-6 s")
    started = time.perf_counter()

    def _jsonable(v: float):
        return None if np.isnan(v) else v  # constant series have undefined CC

    report = {
        "rmse_deg": {k: _jsonable(metrics.rmse_bias_removed(est[k], ref[k])) for k in fileio.ANGLE_NAMES},
        "cc": {k: _jsonable(metrics.pearson_cc(est[k], ref[k])) for k in fileio.ANGLE_NAMES},
        "ttd_dev_pct": {
            "ankle_l": metrics.ttd_deviation(est["ls_pos"], ref["ls_pos"]),
            "ankle_r": metrics.ttd_deviation(est["rs_pos"], ref["rs_pos"]),
        },
        "runtime_ms": 0.0,
    }
    report["runtime_ms"] = (time.perf_counter() - started) * 1e3
    fileio.write_json_atomic(out_path, report)
    print(f"eval: wrote {out_path}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lgpose", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate ground truth and corrupted IMU data")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True, help="output directory")

    p_est = sub.add_parser("estimate", help="run the constrained filter over an IMU CSV")
    p_est.add_argument("--imu", required=True)
    p_est.add_argument("--config", required=True)
    p_est.add_argument("--out", required=True, help="output est.csv path")

    p_eval = sub.add_parser("eval", help="compare an estimate against a reference")
    p_eval.add_argument("--est", required=True)
    p_eval.add_argument("--ref", required=True)
    p_eval.add_argument("--out", required=True, help="output metrics JSON path")
    return parser


def main(argv: list | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, args.out)
        if args.command == "estimate":
            return cmd_estimate(args.imu, args.config, args.out)
        return cmd_eval(args.est, args.ref, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except InfeasibleGait as exc:
        print(f"error: infeasible gait: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NonFiniteState as exc:
        print(f"error: filter diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
