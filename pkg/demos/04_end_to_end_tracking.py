"""Full pipeline in-process: simulate, corrupt, filter, evaluate.

Pass --plot to save tracking_demo.png next to this script.
"""

import argparse
import os

import numpy as np

from lgpose import biomech as bm
from lgpose import gaitsim as gs
from lgpose import metrics
from lgpose import state as st
from lgpose.filter import FilterConfig, run_filter

parser = argparse.ArgumentParser()
parser.add_argument("--plot", action="store_true")
parser.add_argument("--duration", type=float, default=20.0)
args = parser.parse_args()

params = gs.GaitParams(duration=args.duration)
truth = gs.generate(params)
sensor_noise = bm.NoiseParams(sigma2_acc=0.04, sigma2_ori=1e-4)
frames = gs.corrupt(truth, sensor_noise, seed=2026)

cfg = FilterConfig(body=params.body)  # filter tuning from the variance table
init = st.Belief(gs.standing_state(params.body), cfg.initial_covariance())
trajectory, trace = run_filter(frames, init, cfg)
print(f"filtered {len(frames)} frames in {trace.runtime_s:.2f} s "
      f"({1e3 * trace.runtime_s / len(frames):.2f} ms/frame)")

for side in (bm.LEFT, bm.RIGHT):
    ref = np.degrees([bm.knee_angle(x, params.body, side) for x in truth.states])
    est = np.degrees([bm.knee_angle(x, params.body, side) for x in trajectory])
    rmse = metrics.rmse_bias_removed(est, ref)
    cc = metrics.pearson_cc(est, ref)
    print(f"{side:>5} knee: RMSE (bias removed) {rmse:.2f} deg, CC {cc:.3f}")

err = [np.linalg.norm(a.pelvis[:3, 3] - b.pelvis[:3, 3]) for a, b in zip(trajectory, truth.states)]
print(f"pelvis position error: mean {np.mean(err) * 100:.1f} cm, max {np.max(err) * 100:.1f} cm")
print(f"ROM constraint fired on {sum(l or r for l, r in trace.rom_active)} frames")

if args.plot:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ref = np.degrees([bm.knee_angle(x, params.body, bm.LEFT) for x in truth.states])
    est = np.degrees([bm.knee_angle(x, params.body, bm.LEFT) for x in trajectory])
    fig, axes = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
    axes[0].plot(truth.t, ref, label="truth")
    axes[0].plot(truth.t, est, label="estimate", alpha=0.75)
    axes[0].set_ylabel("left knee (deg)")
    axes[0].legend()
    axes[1].plot(truth.t, np.asarray(err) * 100)
    axes[1].set_ylabel("pelvis error (cm)")
    axes[1].set_xlabel("s")
    out = os.path.join(os.path.dirname(__file__), "tracking_demo.png")
    fig.savefig(out, dpi=110)
    print("wrote", out)
