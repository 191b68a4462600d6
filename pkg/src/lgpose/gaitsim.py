"""Synthetic gait generator and measurement corrupter.

The generator builds foot trajectories first (smooth swing bumps, exactly
still stance), derives the pelvis from the feet, and solves each leg by
closed-form two-link inverse kinematics, so the biomechanical constraints
hold by construction.

Kinematic streams are built from piecewise-linear velocity knots: positions
are the exact trapezoid integral and accelerations the exact forward
difference of the knots.  That makes the stored (position, velocity,
acceleration) triple satisfy

    p[k+1] = p[k] + dt v[k] + dt^2/2 a[k],   v[k+1] = v[k] + dt a[k]

to machine precision, which is what lets a noise-free filter run reproduce
the truth exactly.  Positions are C1 (piecewise quadratic); accelerations
are zero-order-hold samples of smooth closed-form profiles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import biomech as bm
from . import liegroups as lie
from . import state as st
from .errors import InfeasibleGait

SWING_FRACTION = 0.4  # fraction of a step period spent in swing
LEAD_IN_S = 1.0  # standing time before the first step
TURN_PER_STEP = np.pi / 6.0  # heading change per step, turn-in-place
FIGURE_EIGHT_RADIUS = 1.0  # m, each lobe of the figure-eight

PATHS = ("straight", "figure-eight", "turn-in-place")


@dataclass
class GaitParams:
    stride_length: float = 0.5
    cadence: float = 1.6  # steps per second
    step_height: float = 0.06
    duration: float = 30.0
    sample_rate: float = 100.0
    path: str = "straight"
    body: bm.BodyParams = field(default_factory=bm.BodyParams)
    seed: int = 0

    def __post_init__(self):
        if self.sample_rate <= 0.0 or self.duration <= 0.0:
            raise ValueError("sample_rate and duration must be > 0")
        if self.path not in PATHS:
            raise ValueError(f"path must be one of {PATHS}")


@dataclass
class GroundTruth:
    """Exact per-frame states, accelerations, contacts and thigh frames."""

    t: np.ndarray
    states: list
    acc_pelvis: np.ndarray
    acc_left: np.ndarray
    acc_right: np.ndarray
    fc_left: np.ndarray
    fc_right: np.ndarray
    thigh_left: list
    thigh_right: list

    def __len__(self) -> int:
        return len(self.states)


def _bump(u: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * u))


def _smoothstep(u: np.ndarray) -> np.ndarray:
    return u * u * (3.0 - 2.0 * u)


def _scaled_knots(m: int, displacement: float, dt: float) -> np.ndarray:
    """Velocity knots over m intervals whose trapezoid integral is exact."""
    b = _bump(np.arange(m + 1) / m)
    area = dt * np.sum(0.5 * (b[:-1] + b[1:]))
    return b * (displacement / area)


def _swing_knots(m: int, delta_xy: np.ndarray, height: float, dt: float) -> np.ndarray:
    """(m+1, 3) velocity knots for one swing: chord motion plus a z bump."""
    out = np.zeros((m + 1, 3))
    out[:, 0] = _scaled_knots(m, delta_xy[0], dt)
    out[:, 1] = _scaled_knots(m, delta_xy[1], dt)
    m2 = m // 2
    out[: m2 + 1, 2] = _scaled_knots(m2, height, dt)
    out[m2:, 2] = _scaled_knots(m - m2, -height, dt)
    return out


def _rz(psi: float) -> np.ndarray:
    c, s = np.cos(psi), np.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _leg_ik(hip: np.ndarray, ankle: np.ndarray, psi_prev: float, d_shank: float, d_thigh: float):
    """Shank yaw and pitch placing the knee so both leg constraints hold.

    The shank sagittal plane is yawed to contain the hip (mod pi, branch
    nearest the previous yaw), then the pitch comes from the two-link
    triangle.  Raises InfeasibleGait when the hip is out of reach.
    """
    d = hip - ankle
    if np.hypot(d[0], d[1]) < 1e-12:
        psi = psi_prev
    else:
        raw = np.arctan2(d[1], d[0])
        psi = psi_prev + (raw - psi_prev + np.pi / 2.0) % np.pi - np.pi / 2.0
    dx = np.cos(psi) * d[0] + np.sin(psi) * d[1]
    dz = d[2]
    dd = np.hypot(dx, dz)
    if dd >= (d_shank + d_thigh) * (1.0 - 1e-9):
        raise InfeasibleGait(f"hip-ankle distance {dd:.4f} m exceeds leg reach {d_shank + d_thigh:.4f} m")
    if dd <= abs(d_shank - d_thigh) * (1.0 + 1e-9):
        raise InfeasibleGait(f"hip-ankle distance {dd:.4f} m inside the leg's inner workspace")
    cos_term = (dd * dd + d_shank * d_shank - d_thigh * d_thigh) / (2.0 * d_shank * dd)
    theta = np.arctan2(dx, dz) + np.arccos(np.clip(cos_term, -1.0, 1.0))
    return psi, theta


@dataclass
class _Step:
    side: str
    start: int  # first knot of the swing window
    end: int  # last knot (velocity zero at both ends)
    target: np.ndarray  # new foothold xy
    heading: float  # body heading after this step


def _plan_steps(params: GaitParams, n: int) -> list[_Step]:
    """Lay out swing windows and footholds for the requested path."""
    if params.cadence <= 0.0:
        return []
    rate = params.sample_rate
    step_frames = int(round(rate / params.cadence))
    if step_frames < 8:
        raise InfeasibleGait("cadence too high for the sample rate (need >= 8 frames per step)")
    swing = max(4, int(round(SWING_FRACTION * step_frames)))
    swing = min(swing, step_frames - 2)
    stand = int(round(LEAD_IN_S * rate))
    half = params.stride_length / 2.0
    w = params.body.d_pelvis / 2.0

    steps: list[_Step] = []
    i = 0
    while True:
        start = stand + i * step_frames + (step_frames - swing)
        end = start + swing
        if end > n - 2:
            break
        side = bm.LEFT if i % 2 == 0 else bm.RIGHT
        lat = w if side == bm.LEFT else -w
        s_arc = (i + 1) * half
        if params.path == "straight":
            heading = 0.0
            target = np.array([s_arc, lat])
        elif params.path == "turn-in-place":
            heading = (i + 1) * TURN_PER_STEP
            target = _rz(heading)[:2, :2] @ np.array([0.0, lat])
        else:  # figure-eight
            r8 = FIGURE_EIGHT_RADIUS
            sc = s_arc % (4.0 * np.pi * r8)
            if sc < 2.0 * np.pi * r8:
                heading = sc / r8
                center = np.array([r8 * np.sin(heading), r8 * (1.0 - np.cos(heading))])
            else:
                u = (sc - 2.0 * np.pi * r8) / r8
                heading = 2.0 * np.pi - u
                center = np.array([r8 * np.sin(u), -r8 * (1.0 - np.cos(u))])
            normal = np.array([-np.sin(heading), np.cos(heading)])
            target = center + lat * normal
        steps.append(_Step(side, start, end, target, heading))
        i += 1
    return steps


def generate(params: GaitParams) -> GroundTruth:
    """Build a kinematically consistent, constraint-exact gait sequence.

    Deterministic for fixed params; raises InfeasibleGait when the stride,
    pelvis height and leg lengths cannot be realized.
    """
    body = params.body
    rate = params.sample_rate
    dt = 1.0 / rate
    n = int(round(params.duration * rate))
    if n < 2:
        raise ValueError("duration too short for the sample rate")
    t = np.arange(n) * dt
    w = body.d_pelvis / 2.0

    steps = _plan_steps(params, n)

    # velocity knots and contact flags per foot
    v_feet = {bm.LEFT: np.zeros((n, 3)), bm.RIGHT: np.zeros((n, 3))}
    contact = {bm.LEFT: np.ones(n, dtype=bool), bm.RIGHT: np.ones(n, dtype=bool)}
    foothold = {bm.LEFT: np.array([0.0, w]), bm.RIGHT: np.array([0.0, -w])}
    yaw_knots = np.zeros(n)
    heading_prev = 0.0
    for s in steps:
        m = s.end - s.start
        v_feet[s.side][s.start : s.end + 1] = _swing_knots(
            m, s.target - foothold[s.side], params.step_height, dt
        )
        contact[s.side][s.start + 1 : s.end] = False
        foothold[s.side] = s.target
        u = np.arange(m + 1) / m
        yaw_knots[s.start : s.end + 1] = heading_prev + _smoothstep(u) * (s.heading - heading_prev)
        yaw_knots[s.end :] = s.heading
        heading_prev = s.heading

    def integrate(v: np.ndarray, p0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        inc = 0.5 * dt * (v[:-1] + v[1:])
        p = np.vstack([p0, p0 + np.cumsum(inc, axis=0)])
        a = np.zeros_like(v)
        a[:-1] = (v[1:] - v[:-1]) / dt
        return p, a

    p_left, a_left = integrate(v_feet[bm.LEFT], np.array([0.0, w, body.z_floor]))
    p_right, a_right = integrate(v_feet[bm.RIGHT], np.array([0.0, -w, body.z_floor]))
    v_pelvis = 0.5 * (v_feet[bm.LEFT] + v_feet[bm.RIGHT])
    v_pelvis[:, 2] = 0.0  # pelvis rides at constant height
    p_pelvis, a_pelvis = integrate(v_pelvis, np.array([0.0, 0.0, body.z_pelvis]))

    states: list[st.PoseState] = []
    thigh_l: list[np.ndarray] = []
    thigh_r: list[np.ndarray] = []
    psi_prev = {bm.LEFT: 0.0, bm.RIGHT: 0.0}
    for k in range(n):
        pelvis = lie.make_pose(_rz(yaw_knots[k]), p_pelvis[k])
        shanks = {}
        for side, p_foot in ((bm.LEFT, p_left[k]), (bm.RIGHT, p_right[k])):
            hip = (pelvis @ bm.hip_point(body, side))[:3]
            try:
                psi, theta = _leg_ik(hip, p_foot, psi_prev[side], body.shank_length(side), body.thigh_length(side))
            except InfeasibleGait as exc:
                raise InfeasibleGait(f"frame {k}: {exc}") from exc
            psi_prev[side] = psi
            shanks[side] = lie.make_pose(_rz(psi) @ _ry(theta), p_foot)
        x = st.PoseState(
            pelvis, shanks[bm.LEFT], shanks[bm.RIGHT], v_pelvis[k], v_feet[bm.LEFT][k], v_feet[bm.RIGHT][k]
        )
        states.append(x)
        thigh_l.append(bm.thigh_orientation(x, body, bm.LEFT))
        thigh_r.append(bm.thigh_orientation(x, body, bm.RIGHT))

    truth = GroundTruth(
        t, states, a_pelvis, a_left, a_right, contact[bm.LEFT], contact[bm.RIGHT], thigh_l, thigh_r
    )
    _validate(truth, body)
    return truth


def _validate(truth: GroundTruth, body: bm.BodyParams, tol: float = 1e-9) -> None:
    """Check the generated sequence against the ground-truth invariants."""
    for k, x in enumerate(truth.states):
        for side in (bm.LEFT, bm.RIGHT):
            if abs(bm.c_ltl(x, body, side)) > tol or abs(bm.c_lkh(x, body, side)) > tol:
                raise InfeasibleGait(f"frame {k}: constraint residual exceeds {tol:g}")
            alpha = bm.knee_angle(x, body, side)
            if not (body.knee_rom_min - 1e-9 <= alpha <= body.knee_rom_max + 1e-9):
                raise InfeasibleGait(f"frame {k}: {side} knee angle {np.degrees(alpha):.1f} deg outside ROM")
        for flag, pose, vel in (
            (truth.fc_left[k], x.left_shank, x.v_left_shank),
            (truth.fc_right[k], x.right_shank, x.v_right_shank),
        ):
            if flag and (np.linalg.norm(vel) > tol or abs(pose[2, 3] - body.z_floor) > tol):
                raise InfeasibleGait(f"frame {k}: contact foot moving or off the floor")


def standing_state(body: bm.BodyParams) -> st.PoseState:
    """The at-rest state every generated gait starts from.

    Pelvis above the origin at standing height, ankles under the hips at
    floor level, legs solved by the same IK the generator uses.
    """
    pelvis = lie.make_pose(np.eye(3), np.array([0.0, 0.0, body.z_pelvis]))
    shanks = {}
    for side in (bm.LEFT, bm.RIGHT):
        lat = body.d_pelvis / 2.0 if side == bm.LEFT else -body.d_pelvis / 2.0
        ankle = np.array([0.0, lat, body.z_floor])
        hip = (pelvis @ bm.hip_point(body, side))[:3]
        psi, theta = _leg_ik(hip, ankle, 0.0, body.shank_length(side), body.thigh_length(side))
        shanks[side] = lie.make_pose(_rz(psi) @ _ry(theta), ankle)
    return st.PoseState(pelvis, shanks[bm.LEFT], shanks[bm.RIGHT], np.zeros(3), np.zeros(3), np.zeros(3))


# channel indices of the counter-based noise streams (see README)
_CHANNELS = {"acc_p": 0, "acc_ls": 1, "acc_rs": 2, "ori_p": 3, "ori_ls": 4, "ori_rs": 5}


def _stream(seed: int, channel: str, shape: tuple) -> np.ndarray:
    """Standard normals from a Philox stream keyed by (seed, channel)."""
    bits = np.random.Philox(key=np.uint64(seed), counter=[0, 0, _CHANNELS[channel], 0])
    return np.random.Generator(bits).standard_normal(shape)


def corrupt(truth: GroundTruth, noise: bm.NoiseParams, seed: int) -> list[bm.ImuFrame]:
    """Produce measured IMU frames from ground truth.

    Accelerations get additive Gaussian noise; orientations are
    right-multiplied by the exp of a Gaussian rotation vector; contact flags
    are copied.  Deterministic per seed; exact copies when all variances are
    zero.
    """
    n = len(truth)
    acc = {}
    for name, arr, cols in (
        ("acc_p", truth.acc_pelvis, slice(0, 3)),
        ("acc_ls", truth.acc_left, slice(3, 6)),
        ("acc_rs", truth.acc_right, slice(6, 9)),
    ):
        sigma = np.sqrt(noise.sigma2_acc[cols])
        acc[name] = arr if not np.any(sigma > 0.0) else arr + _stream(seed, name, (n, 3)) * sigma

    eta = {}
    for name, cols in (("ori_p", slice(0, 3)), ("ori_ls", slice(3, 6)), ("ori_rs", slice(6, 9))):
        sigma = np.sqrt(noise.sigma2_ori[cols])
        eta[name] = None if not np.any(sigma > 0.0) else _stream(seed, name, (n, 3)) * sigma

    def measured(r: np.ndarray, e) -> np.ndarray:
        return r.copy() if e is None else r @ lie.so3_exp(e)

    frames = []
    for k, x in enumerate(truth.states):
        frames.append(
            bm.ImuFrame(
                t=float(truth.t[k]),
                acc_p=acc["acc_p"][k],
                acc_ls=acc["acc_ls"][k],
                acc_rs=acc["acc_rs"][k],
                rot_p=measured(x.pelvis[:3, :3], None if eta["ori_p"] is None else eta["ori_p"][k]),
                rot_ls=measured(x.left_shank[:3, :3], None if eta["ori_ls"] is None else eta["ori_ls"][k]),
                rot_rs=measured(x.right_shank[:3, :3], None if eta["ori_rs"] is None else eta["ori_rs"][k]),
                fc_left=bool(truth.fc_left[k]),
                fc_right=bool(truth.fc_right[k]),
            )
        )
    return frames
