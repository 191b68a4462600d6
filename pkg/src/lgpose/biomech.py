"""Motion, measurement, and constraint models with their analytic Jacobians.

All Jacobians are taken with respect to the right-perturbation error, i.e.
d/de f(mu * exp(e)) at e = 0, and are laid out against the 27-dimensional
error ordering defined in `state`.  The homogeneous-point helpers (E matrix,
unit 4-vectors, the odot operator) let every measurement/constraint row be
written as a product of small matrices, mirroring how the rows factor into
a constant part times the perturbed point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import liegroups as lie
from . import state as st
from .errors import DegenerateProjection

LEFT = "left"
RIGHT = "right"

# homogeneous basis vectors and the point-projection matrix E = [I3 | 0]
I_X = np.array([1.0, 0.0, 0.0, 0.0])
I_Y = np.array([0.0, 1.0, 0.0, 0.0])
I_Z = np.array([0.0, 0.0, 1.0, 0.0])
I_0 = np.array([0.0, 0.0, 0.0, 1.0])


@dataclass
class BodyParams:
    """Segment geometry and knee range of motion (lengths m, angles rad)."""

    d_pelvis: float = 0.25
    d_lthigh: float = 0.40
    d_rthigh: float = 0.40
    d_lshank: float = 0.45
    d_rshank: float = 0.45
    z_pelvis: float = 0.80
    z_floor: float = 0.0
    knee_rom_min: float = 0.0
    knee_rom_max: float = np.pi

    def __post_init__(self):
        for name in ("d_pelvis", "d_lthigh", "d_rthigh", "d_lshank", "d_rshank"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")
        if self.knee_rom_min > self.knee_rom_max:
            raise ValueError("knee_rom_min must not exceed knee_rom_max")

    def thigh_length(self, side: str) -> float:
        return self.d_lthigh if side == LEFT else self.d_rthigh

    def shank_length(self, side: str) -> float:
        return self.d_lshank if side == LEFT else self.d_rshank


@dataclass
class NoiseParams:
    """Diagonal process/measurement variances, companion-table defaults."""

    sigma2_acc: np.ndarray = field(default_factory=lambda: np.full(9, 1e2))
    sigma2_qori: np.ndarray = field(default_factory=lambda: np.full(9, 1e3))
    sigma2_ori: np.ndarray = field(default_factory=lambda: np.full(9, 1e-2))
    sigma2_mp: float = 0.1
    sigma2_ls: np.ndarray = field(default_factory=lambda: np.array([0.01, 0.01, 0.01, 1e-4]))
    sigma2_rs: np.ndarray = field(default_factory=lambda: np.array([0.01, 0.01, 0.01, 1e-4]))
    sigma2_lim: np.ndarray = field(default_factory=lambda: np.full(18, 10.0))
    dt: float = 0.01

    def __post_init__(self):
        self.sigma2_acc = np.broadcast_to(np.asarray(self.sigma2_acc, dtype=float), (9,)).copy()
        self.sigma2_qori = np.broadcast_to(np.asarray(self.sigma2_qori, dtype=float), (9,)).copy()
        self.sigma2_ori = np.broadcast_to(np.asarray(self.sigma2_ori, dtype=float), (9,)).copy()
        self.sigma2_ls = np.broadcast_to(np.asarray(self.sigma2_ls, dtype=float), (4,)).copy()
        self.sigma2_rs = np.broadcast_to(np.asarray(self.sigma2_rs, dtype=float), (4,)).copy()
        self.sigma2_lim = np.broadcast_to(np.asarray(self.sigma2_lim, dtype=float), (18,)).copy()


@dataclass
class ImuFrame:
    """One frame of world-resolved, gravity-removed IMU data plus foot contacts."""

    t: float
    acc_p: np.ndarray
    acc_ls: np.ndarray
    acc_rs: np.ndarray
    rot_p: np.ndarray
    rot_ls: np.ndarray
    rot_rs: np.ndarray
    fc_left: bool
    fc_right: bool


def _side_cols(side: str) -> slice:
    return st.LEFT_SHANK if side == LEFT else st.RIGHT_SHANK


def _side_vel_cols(side: str) -> slice:
    return st.VEL_LEFT if side == LEFT else st.VEL_RIGHT


def _shank_pose(x: st.PoseState, side: str) -> np.ndarray:
    return x.left_shank if side == LEFT else x.right_shank


def _shank_vel(x: st.PoseState, side: str) -> np.ndarray:
    return x.v_left_shank if side == LEFT else x.v_right_shank


@lru_cache(maxsize=64)
def _hip_point_cached(half_width: float) -> np.ndarray:
    p = np.array([0.0, half_width, 0.0, 1.0])
    p.setflags(write=False)
    return p


@lru_cache(maxsize=64)
def _knee_point_cached(length: float) -> np.ndarray:
    p = np.array([0.0, 0.0, length, 1.0])
    p.setflags(write=False)
    return p


@lru_cache(maxsize=64)
def _odot_cached(b: tuple) -> np.ndarray:
    m = lie.se3_odot(np.array(b))
    m.setflags(write=False)
    return m


def hip_point(body: BodyParams, side: str) -> np.ndarray:
    """Hip joint in pelvis coordinates, homogeneous; left is +y."""
    sign = 1.0 if side == LEFT else -1.0
    return _hip_point_cached(sign * body.d_pelvis / 2.0)


def knee_point(body: BodyParams, side: str) -> np.ndarray:
    """Knee joint in shank coordinates (ankle origin, z up the segment)."""
    return _knee_point_cached(body.shank_length(side))


def _odot_hip(body: BodyParams, side: str) -> np.ndarray:
    sign = 1.0 if side == LEFT else -1.0
    return _odot_cached((0.0, sign * body.d_pelvis / 2.0, 0.0, 1.0))


def _odot_knee(body: BodyParams, side: str) -> np.ndarray:
    return _odot_cached((0.0, 0.0, body.shank_length(side), 1.0))


_ODOT_I0 = lie.se3_odot(I_0)
_ODOT_I0.setflags(write=False)
_ODOT_IY = lie.se3_odot(I_Y)
_ODOT_IY.setflags(write=False)


# --- motion model -------------------------------------------------------------

def omega(x: st.PoseState, imu: ImuFrame, dt: float) -> np.ndarray:
    """Per-step motion increment in exponential coordinates.

    Each segment's rho block is R_meas^T (dt v + dt^2/2 a_meas), the phi
    blocks are zero (zero angular velocity model), and the velocity blocks
    integrate the measured acceleration.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    out = np.zeros(st.STATE_DIM)
    h = 0.5 * dt * dt
    out[0:3] = imu.rot_p.T @ (dt * x.v_pelvis + h * imu.acc_p)
    out[6:9] = imu.rot_ls.T @ (dt * x.v_left_shank + h * imu.acc_ls)
    out[12:15] = imu.rot_rs.T @ (dt * x.v_right_shank + h * imu.acc_rs)
    out[18:21] = dt * imu.acc_p
    out[21:24] = dt * imu.acc_ls
    out[24:27] = dt * imu.acc_rs
    return out


def motion_jacobian(imu: ImuFrame, dt: float) -> np.ndarray:
    """d omega / d error at e = 0; only velocity errors enter the rho rows."""
    out = np.zeros((st.STATE_DIM, st.STATE_DIM))
    out[0:3, 18:21] = dt * imu.rot_p.T
    out[6:9, 21:24] = dt * imu.rot_ls.T
    out[12:15, 24:27] = dt * imu.rot_rs.T
    return out


def process_noise(noise: NoiseParams) -> np.ndarray:
    """Diagonal process covariance in the error ordering."""
    dt = noise.dt
    h = 0.5 * dt * dt
    d = np.empty(st.STATE_DIM)
    d[0:3] = h * noise.sigma2_acc[0:3]
    d[3:6] = noise.sigma2_qori[0:3]
    d[6:9] = h * noise.sigma2_acc[3:6]
    d[9:12] = noise.sigma2_qori[3:6]
    d[12:15] = h * noise.sigma2_acc[6:9]
    d[15:18] = noise.sigma2_qori[6:9]
    d[18:21] = dt * noise.sigma2_acc[0:3]
    d[21:24] = dt * noise.sigma2_acc[3:6]
    d[24:27] = dt * noise.sigma2_acc[6:9]
    return np.diag(d)


# --- measurement models --------------------------------------------------------

def h_ori(x: st.PoseState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Predicted segment orientations."""
    return x.pelvis[:3, :3], x.left_shank[:3, :3], x.right_shank[:3, :3]


def _build_h_ori() -> np.ndarray:
    out = np.zeros((9, st.STATE_DIM))
    out[0:3, 3:6] = np.eye(3)
    out[3:6, 9:12] = np.eye(3)
    out[6:9, 15:18] = np.eye(3)
    out.setflags(write=False)
    return out


_H_ORI = _build_h_ori()


def H_ori() -> np.ndarray:
    """Selects the three phi error blocks."""
    return _H_ORI


def h_mp(x: st.PoseState) -> float:
    """Pelvis height above the world origin."""
    return x.pelvis[2, 3]


def H_mp(x: st.PoseState) -> np.ndarray:
    out = np.zeros((1, st.STATE_DIM))
    out[0, st.PELVIS] = (x.pelvis @ _ODOT_I0)[2, :]
    return out


def h_fc(x: st.PoseState, side: str) -> np.ndarray:
    """Stance-foot measurement: shank velocity and ankle height."""
    t = _shank_pose(x, side)
    return np.concatenate([_shank_vel(x, side), [t[2, 3]]])


def H_fc(x: st.PoseState, side: str) -> np.ndarray:
    out = np.zeros((4, st.STATE_DIM))
    out[0:3, _side_vel_cols(side)] = np.eye(3)
    out[3, _side_cols(side)] = (_shank_pose(x, side) @ _ODOT_I0)[2, :]
    return out


def _build_h_lim() -> np.ndarray:
    out = np.zeros((18, st.STATE_DIM))
    out[:, :18] = np.eye(18)
    out.setflags(write=False)
    return out


_H_LIM = _build_h_lim()


def H_lim() -> np.ndarray:
    """Pseudo-measurement of the full SE(3) error block (covariance limiter)."""
    return _H_LIM


def assemble_measurement(
    x: st.PoseState, imu: ImuFrame, noise: NoiseParams, body: BodyParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack (H, innovation, R-diagonal) for the current foot-contact case.

    Orientation innovations use the group form vee(log(R_pred^T R_meas));
    scalar/vector rows reduce to plain differences.
    """
    rows = [H_ori(), H_mp(x)]
    rp, rls, rrs = h_ori(x)
    dz = [
        lie.so3_log(rp.T @ imu.rot_p),
        lie.so3_log(rls.T @ imu.rot_ls),
        lie.so3_log(rrs.T @ imu.rot_rs),
        [body.z_pelvis - h_mp(x)],
    ]
    r_diag = [noise.sigma2_ori, [noise.sigma2_mp]]
    if imu.fc_left:
        rows.append(H_fc(x, LEFT))
        dz.append(np.array([0.0, 0.0, 0.0, body.z_floor]) - h_fc(x, LEFT))
        r_diag.append(noise.sigma2_ls)
    if imu.fc_right:
        rows.append(H_fc(x, RIGHT))
        dz.append(np.array([0.0, 0.0, 0.0, body.z_floor]) - h_fc(x, RIGHT))
        r_diag.append(noise.sigma2_rs)
    return np.vstack(rows), np.concatenate(dz), np.concatenate(r_diag)


# --- biomechanical constraints --------------------------------------------------

def thigh_vector(x: st.PoseState, body: BodyParams, side: str) -> np.ndarray:
    """World vector from the knee joint to the hip joint."""
    a = x.pelvis @ hip_point(body, side) - _shank_pose(x, side) @ knee_point(body, side)
    return a[:3]


def c_ltl(x: st.PoseState, body: BodyParams, side: str) -> float:
    """Thigh-length constraint tau^T tau - d^2 = 0."""
    tau = thigh_vector(x, body, side)
    d = body.thigh_length(side)
    return float(tau @ tau - d * d)


def C_ltl(x: st.PoseState, body: BodyParams, side: str) -> np.ndarray:
    tau = thigh_vector(x, body, side)
    shank = _shank_pose(x, side)
    row = np.zeros((1, st.STATE_DIM))
    row[0, st.PELVIS] = 2.0 * tau @ (x.pelvis @ lie.se3_odot(hip_point(body, side)))[:3, :]
    row[0, _side_cols(side)] = -2.0 * tau @ (shank @ lie.se3_odot(knee_point(body, side)))[:3, :]
    return row


def c_lkh(x: st.PoseState, body: BodyParams, side: str) -> float:
    """Hinge-knee constraint: shank mediolateral axis orthogonal to the thigh."""
    y_axis = (_shank_pose(x, side) @ I_Y)[:3]
    return float(y_axis @ thigh_vector(x, body, side))


def C_lkh(x: st.PoseState, body: BodyParams, side: str) -> np.ndarray:
    tau = thigh_vector(x, body, side)
    shank = _shank_pose(x, side)
    y_axis = (shank @ I_Y)[:3]
    row = np.zeros((1, st.STATE_DIM))
    row[0, st.PELVIS] = y_axis @ (x.pelvis @ lie.se3_odot(hip_point(body, side)))[:3, :]
    row[0, _side_cols(side)] = (
        -y_axis @ (shank @ lie.se3_odot(knee_point(body, side)))[:3, :]
        + tau @ (shank @ lie.se3_odot(I_Y))[:3, :]
    )
    return row


def knee_angle(x: st.PoseState, body: BodyParams, side: str) -> float:
    """Knee flexion from the thigh vector projected on the shank x/z axes.

    Zero means a straight leg; range (-pi/2, 3pi/2].
    """
    tau = thigh_vector(x, body, side)
    shank = _shank_pose(x, side)
    pz = shank[:3, 2] @ tau
    px = shank[:3, 0] @ tau
    if np.hypot(pz, px) <= 1e-9:
        raise DegenerateProjection(f"{side} thigh vector parallel to the shank hinge axis")
    alpha = np.arctan2(-pz, -px) + np.pi / 2.0
    if alpha <= -np.pi / 2.0:
        alpha += 2.0 * np.pi
    return float(alpha)


def clamp_knee(alpha: float, body: BodyParams) -> float:
    """Clamp a knee angle into the allowed range of motion."""
    return float(min(body.knee_rom_max, max(body.knee_rom_min, alpha)))


def _psi(alpha_clamped: float) -> np.ndarray:
    b = alpha_clamped - np.pi / 2.0
    return I_Z * np.cos(b) - I_X * np.sin(b)


def c_lkr(x: st.PoseState, body: BodyParams, side: str, alpha_clamped: float) -> float:
    """Range-of-motion constraint; zero when the knee angle equals the clamp."""
    w = (_shank_pose(x, side) @ _psi(alpha_clamped))[:3]
    return float(w @ thigh_vector(x, body, side))


def C_lkr(x: st.PoseState, body: BodyParams, side: str, alpha_clamped: float) -> np.ndarray:
    tau = thigh_vector(x, body, side)
    shank = _shank_pose(x, side)
    psi = _psi(alpha_clamped)
    w = (shank @ psi)[:3]
    row = np.zeros((1, st.STATE_DIM))
    row[0, st.PELVIS] = w @ (x.pelvis @ lie.se3_odot(hip_point(body, side)))[:3, :]
    row[0, _side_cols(side)] = (
        -w @ (shank @ lie.se3_odot(knee_point(body, side)))[:3, :]
        + tau @ (shank @ lie.se3_odot(psi))[:3, :]
    )
    return row


def assemble_constraints(
    x: st.PoseState, body: BodyParams
) -> tuple[np.ndarray, np.ndarray, tuple[bool, bool]]:
    """Stack active constraint rows and residuals (target minus value).

    Per side: thigh length and hinge always; the ROM row only when the knee
    angle falls outside [knee_rom_min, knee_rom_max].  Returns (C, residual,
    (left_rom_active, right_rom_active)).  Row values match the standalone
    c_*/C_* functions; shared geometry is computed once per side.
    """
    rows, resid, active = [], [], []
    for side in (LEFT, RIGHT):
        shank = _shank_pose(x, side)
        cols = _side_cols(side)
        pelvis_hip = (x.pelvis @ _odot_hip(body, side))[:3, :]
        shank_knee = (shank @ _odot_knee(body, side))[:3, :]
        tau = (x.pelvis @ hip_point(body, side) - shank @ knee_point(body, side))[:3]
        d = body.thigh_length(side)

        row = np.zeros(st.STATE_DIM)
        row[st.PELVIS] = 2.0 * tau @ pelvis_hip
        row[cols] = -2.0 * tau @ shank_knee
        rows.append(row)
        resid.append(-(tau @ tau - d * d))

        y_axis = shank[:3, 1]
        row = np.zeros(st.STATE_DIM)
        row[st.PELVIS] = y_axis @ pelvis_hip
        row[cols] = -y_axis @ shank_knee + tau @ (shank @ _ODOT_IY)[:3, :]
        rows.append(row)
        resid.append(-(y_axis @ tau))

        rom = False
        pz = shank[:3, 2] @ tau
        px = shank[:3, 0] @ tau
        if np.hypot(pz, px) > 1e-9:
            alpha = np.arctan2(-pz, -px) + np.pi / 2.0
            if alpha <= -np.pi / 2.0:
                alpha += 2.0 * np.pi
            if not (body.knee_rom_min <= alpha <= body.knee_rom_max):
                alpha_c = clamp_knee(alpha, body)
                psi = _psi(alpha_c)
                w = (shank @ psi)[:3]
                row = np.zeros(st.STATE_DIM)
                row[st.PELVIS] = w @ pelvis_hip
                row[cols] = -w @ shank_knee + tau @ (shank @ lie.se3_odot(psi))[:3, :]
                rows.append(row)
                resid.append(-(w @ tau))
                rom = True
        active.append(rom)
    return np.vstack(rows), np.array(resid), (active[0], active[1])


# --- post-processing ------------------------------------------------------------

def thigh_orientation(x: st.PoseState, body: BodyParams, side: str) -> np.ndarray:
    """Reconstruct the (uninstrumented) thigh frame from the state.

    The thigh z axis points up the segment along the thigh vector; the y
    axis is the shank mediolateral axis projected orthogonal to it, so the
    reconstructed frame satisfies the hinge relation by construction.
    """
    tau = thigh_vector(x, body, side)
    n = np.linalg.norm(tau)
    if n <= 1e-9:
        raise DegenerateProjection(f"{side} thigh vector has zero length")
    z = tau / n
    y_s = _shank_pose(x, side)[:3, 1]
    y = y_s - (y_s @ z) * z
    ny = np.linalg.norm(y)
    if ny <= 1e-9:
        raise DegenerateProjection(f"{side} shank hinge axis parallel to the thigh")
    y = y / ny
    return np.column_stack([np.cross(y, z), y, z])


def hip_angles_yxz(r_pelvis: np.ndarray, r_thigh: np.ndarray) -> tuple[float, float, float]:
    """Intrinsic Y-X-Z decomposition of the pelvis-to-thigh rotation (rad)."""
    r = r_pelvis.T @ r_thigh
    ay = np.arctan2(r[0, 2], r[2, 2])
    ax = np.arcsin(np.clip(-r[1, 2], -1.0, 1.0))
    az = np.arctan2(r[1, 0], r[1, 1])
    return float(ay), float(ax), float(az)
