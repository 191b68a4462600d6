import numpy as np
import pytest

from conftest import place_leg, random_imu_frame, random_rotation, random_state
from lgpose import biomech as bm
from lgpose import oracles
from lgpose import state as st
from lgpose.errors import DegenerateProjection
from lgpose.liegroups import make_pose, se3_exp, so3_exp, so3_log

FD_TOL = 1e-5
SIDES = (bm.LEFT, bm.RIGHT)


# --- motion model ----------------------------------------------------------------

def test_omega_zero_motion(body):
    frame = bm.ImuFrame(0.0, np.zeros(3), np.zeros(3), np.zeros(3), np.eye(3), np.eye(3), np.eye(3), True, True)
    assert not bm.omega(st.PoseState.identity(), frame, 0.01).any()


def test_omega_constant_velocity(body):
    x = st.PoseState.identity()
    x.v_pelvis = np.array([1.0, 0.0, 0.0])
    frame = bm.ImuFrame(0.0, np.zeros(3), np.zeros(3), np.zeros(3), np.eye(3), np.eye(3), np.eye(3), True, True)
    om = bm.omega(x, frame, 0.01)
    assert np.allclose(om[0:3], [0.01, 0.0, 0.0], atol=0.0)
    assert not om[3:].any()


def test_omega_matches_independent_formula():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = random_state(rng)
        frame = random_imu_frame(rng)
        om = bm.omega(x, frame, 0.01)
        expected = frame.rot_p.T @ (0.01 * x.v_pelvis + 0.5 * 1e-4 * frame.acc_p)
        assert np.max(np.abs(om[0:3] - expected)) < 1e-12
        assert np.max(np.abs(om[21:24] - 0.01 * frame.acc_ls)) < 1e-15


def test_omega_rejects_bad_dt():
    rng = np.random.default_rng(1)
    with pytest.raises(ValueError):
        bm.omega(st.PoseState.identity(), random_imu_frame(rng), 0.0)


def test_motion_jacobian_structure_and_fd():
    rng = np.random.default_rng(2)
    frame = random_imu_frame(rng)
    c = bm.motion_jacobian(frame, 0.01)
    assert not c[18:, :].any()  # velocity rows do not depend on the error
    for rows in (slice(3, 6), slice(9, 12), slice(15, 18)):
        assert not c[rows, :].any()  # phi rows are exactly zero
    ident = bm.ImuFrame(0.0, np.zeros(3), np.zeros(3), np.zeros(3), np.eye(3), np.eye(3), np.eye(3), False, False)
    ci = bm.motion_jacobian(ident, 0.01)
    assert np.allclose(ci[0:3, 18:21], 0.01 * np.eye(3), atol=0.0)
    for _ in range(20):
        x = random_state(rng)
        fd = oracles.numeric_jacobian(lambda s: bm.omega(s, frame, 0.01), x)
        assert np.max(np.abs(fd - c)) < FD_TOL


def test_process_noise_layout():
    noise = bm.NoiseParams()
    q = bm.process_noise(noise)
    assert np.allclose(np.diag(q)[0:3], 0.5 * 0.01**2 * 100.0)
    assert np.allclose(np.diag(q)[3:6], 1000.0)
    assert np.allclose(np.diag(q)[18:21], 0.01 * 100.0)
    assert not (q - np.diag(np.diag(q))).any()  # strictly diagonal
    zero = bm.process_noise(bm.NoiseParams(sigma2_acc=0.0, sigma2_qori=0.0))
    assert not zero.any()


# --- measurement models -----------------------------------------------------------

def test_h_ori_and_jacobian():
    rng = np.random.default_rng(3)
    h = bm.H_ori()
    assert h.shape == (9, 27)
    assert np.array_equal(h[0:3, 3:6], np.eye(3))
    assert np.array_equal(h[3:6, 9:12], np.eye(3))
    assert np.array_equal(h[6:9, 15:18], np.eye(3))
    assert not h[:, 18:].any()
    for _ in range(10):
        x = random_state(rng)
        r0 = bm.h_ori(x)

        def rel(s):
            return np.concatenate([so3_log(a.T @ b) for a, b in zip(r0, bm.h_ori(s))])

        fd = oracles.numeric_jacobian(rel, x)
        assert np.max(np.abs(fd - h)) < FD_TOL


def test_perfect_orientation_innovation_is_zero(body):
    rng = np.random.default_rng(4)
    x = random_state(rng)
    frame = bm.ImuFrame(
        0.0, np.zeros(3), np.zeros(3), np.zeros(3),
        x.pelvis[:3, :3].copy(), x.left_shank[:3, :3].copy(), x.right_shank[:3, :3].copy(),
        False, False,
    )
    body_here = bm.BodyParams(z_pelvis=float(x.pelvis[2, 3]))
    _, dz, _ = bm.assemble_measurement(x, frame, bm.NoiseParams(), body_here)
    assert np.max(np.abs(dz[:9])) < 1e-12
    assert abs(dz[9]) < 1e-12


def test_h_mp_examples_and_fd():
    x = st.PoseState.identity()
    x.pelvis = make_pose(np.eye(3), [0.0, 0.0, 0.9])
    assert bm.h_mp(x) == 0.9
    h = bm.H_mp(st.PoseState.identity())
    assert np.allclose(h[0, :6], [0, 0, 1, 0, 0, 0], atol=0.0)
    assert not h[0, 6:].any()
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = random_state(rng)
        fd = oracles.numeric_jacobian(lambda s: np.array([bm.h_mp(s)]), x)
        assert np.max(np.abs(fd - bm.H_mp(x))) < FD_TOL


def test_h_fc_examples_and_fd(body):
    x = st.PoseState.identity()
    x.left_shank = make_pose(np.eye(3), [0.3, 0.1, body.z_floor])
    h = bm.h_fc(x, bm.LEFT)
    target = np.array([0.0, 0.0, 0.0, body.z_floor])
    assert np.max(np.abs(h - target)) == 0.0  # stationary shank on the floor
    rng = np.random.default_rng(6)
    for side in SIDES:
        jac = bm.H_fc(x, side)
        cols = st.VEL_LEFT if side == bm.LEFT else st.VEL_RIGHT
        assert np.array_equal(jac[0:3, cols], np.eye(3))
        assert not jac[0:3, 0:18].any()  # velocity rows have no SE(3) entries
        for _ in range(10):
            y = random_state(rng)
            fd = oracles.numeric_jacobian(lambda s: bm.h_fc(s, side), y)
            assert np.max(np.abs(fd - bm.H_fc(y, side))) < FD_TOL


def test_assemble_measurement_cases(body):
    rng = np.random.default_rng(7)
    x = random_state(rng)
    noise = bm.NoiseParams()
    fr = random_imu_frame(rng, fc_left=False, fc_right=False)
    h, dz, r = bm.assemble_measurement(x, fr, noise, body)
    assert h.shape == (10, 27) and dz.shape == (10,) and r.shape == (10,)
    fr = random_imu_frame(rng, fc_left=True, fc_right=True)
    h, dz, r = bm.assemble_measurement(x, fr, noise, body)
    assert h.shape == (18, 27)
    assert np.array_equal(r[:9], noise.sigma2_ori)
    assert r[9] == noise.sigma2_mp
    assert np.array_equal(r[10:14], noise.sigma2_ls)
    assert np.array_equal(r[14:18], noise.sigma2_rs)
    fr = random_imu_frame(rng, fc_left=True, fc_right=False)
    h, dz, r = bm.assemble_measurement(x, fr, noise, body)
    assert h.shape == (14, 27)
    assert np.array_equal(h[10:14], bm.H_fc(x, bm.LEFT))


def test_h_lim():
    h = bm.H_lim()
    assert h.shape == (18, 27)
    assert np.linalg.matrix_rank(h) == 18
    assert np.array_equal(h[:, :18], np.eye(18))
    rng = np.random.default_rng(8)
    x = random_state(rng)
    fd = oracles.numeric_jacobian(lambda s: st.error_between(x, s)[:18], x)
    assert np.max(np.abs(fd - h)) < FD_TOL


# --- constraints -------------------------------------------------------------------

def test_thigh_vector_constructed(body):
    x = place_leg(body, bm.LEFT, [0.0, 0.0, body.d_lthigh])
    assert np.max(np.abs(bm.thigh_vector(x, body, bm.LEFT) - [0, 0, body.d_lthigh])) < 1e-15


def test_thigh_vector_translation_invariant(body):
    rng = np.random.default_rng(9)
    x = random_state(rng)
    tau = bm.thigh_vector(x, body, bm.RIGHT)
    w = rng.normal(size=3)
    y = x.copy()
    y.pelvis[:3, 3] += w
    y.right_shank[:3, 3] += w
    assert np.max(np.abs(bm.thigh_vector(y, body, bm.RIGHT) - tau)) < 1e-12


def test_thigh_vector_matches_joint_positions(body):
    rng = np.random.default_rng(10)
    for _ in range(20):
        x = random_state(rng)
        for side in SIDES:
            hip = (x.pelvis @ bm.hip_point(body, side))[:3]
            shank = x.left_shank if side == bm.LEFT else x.right_shank
            knee = (shank @ bm.knee_point(body, side))[:3]
            assert np.max(np.abs(bm.thigh_vector(x, body, side) - (hip - knee))) < 1e-12


def test_c_ltl_examples_and_fd(body):
    x = place_leg(body, bm.LEFT, [0.0, 0.0, body.d_lthigh])
    assert abs(bm.c_ltl(x, body, bm.LEFT)) < 1e-12
    delta = 0.003
    y = place_leg(body, bm.LEFT, [0.0, 0.0, body.d_lthigh + delta])
    expected = 2.0 * body.d_lthigh * delta + delta * delta
    assert abs(bm.c_ltl(y, body, bm.LEFT) - expected) < 1e-12
    rng = np.random.default_rng(11)
    for _ in range(20):
        x = random_state(rng)
        for side in SIDES:
            fd = oracles.numeric_jacobian(lambda s: np.array([bm.c_ltl(s, body, side)]), x)
            assert np.max(np.abs(fd - bm.C_ltl(x, body, side))) < FD_TOL


def test_c_lkh_examples_and_fd(body):
    x = place_leg(body, bm.LEFT, [0.0, 0.0, body.d_lthigh])
    assert abs(bm.c_lkh(x, body, bm.LEFT)) < 1e-15  # shank y orthogonal to tau
    # rotate shank 90 deg about x so its y axis points along +z, parallel to tau
    x = place_leg(body, bm.LEFT, [0.0, 0.0, body.d_lthigh], shank_rot=so3_exp([np.pi / 2, 0, 0]))
    assert abs(bm.c_lkh(x, body, bm.LEFT) - body.d_lthigh) < 1e-12
    rng = np.random.default_rng(12)
    for _ in range(20):
        x = random_state(rng)
        for side in SIDES:
            fd = oracles.numeric_jacobian(lambda s: np.array([bm.c_lkh(s, body, side)]), x)
            assert np.max(np.abs(fd - bm.C_lkh(x, body, side))) < FD_TOL


def test_knee_angle_reference_directions(body):
    d = body.d_lthigh
    x = place_leg(body, bm.LEFT, [0.0, 0.0, d])  # tau along shank +z
    assert abs(bm.knee_angle(x, body, bm.LEFT)) < 1e-12
    x = place_leg(body, bm.LEFT, [-d, 0.0, 0.0])  # tau along shank -x
    assert abs(bm.knee_angle(x, body, bm.LEFT) - np.pi / 2) < 1e-12
    x = place_leg(body, bm.LEFT, [0.0, 0.0, -d])  # tau along shank -z
    assert abs(bm.knee_angle(x, body, bm.LEFT) - np.pi) < 1e-12


def test_knee_angle_degenerate(body):
    x = place_leg(body, bm.LEFT, [0.0, body.d_lthigh, 0.0])  # tau along hinge axis
    with pytest.raises(DegenerateProjection):
        bm.knee_angle(x, body, bm.LEFT)


def test_knee_angle_rigid_transform_invariant(body):
    rng = np.random.default_rng(13)
    for _ in range(20):
        x = random_state(rng)
        try:
            alpha = bm.knee_angle(x, body, bm.LEFT)
        except DegenerateProjection:
            continue
        world = se3_exp(rng.normal(size=6))
        y = x.copy()
        y.pelvis = world @ y.pelvis
        y.left_shank = world @ y.left_shank
        y.right_shank = world @ y.right_shank
        assert abs(bm.knee_angle(y, body, bm.LEFT) - alpha) < 1e-12


def test_clamp_knee(body):
    assert bm.clamp_knee(0.5, body) == 0.5
    assert bm.clamp_knee(-0.1, body) == body.knee_rom_min == 0.0
    over = bm.BodyParams(knee_rom_max=np.pi)
    assert bm.clamp_knee(np.radians(200.0), over) == np.pi


def test_c_lkr_examples_and_fd(body):
    rng = np.random.default_rng(14)
    # residual vanishes when the actual knee angle equals the clamped target
    x = place_leg(body, bm.LEFT, [-0.2, 0.0, 0.3])
    alpha = bm.knee_angle(x, body, bm.LEFT)
    assert abs(bm.c_lkr(x, body, bm.LEFT, alpha)) < 1e-12
    # psi evaluates to i_z at alpha' = pi/2 and to -i_x at alpha' = pi
    tau = bm.thigh_vector(x, body, bm.LEFT)
    r_x = x.left_shank[:3, 0]
    r_z = x.left_shank[:3, 2]
    assert abs(bm.c_lkr(x, body, bm.LEFT, np.pi / 2) - (r_z @ tau)) < 1e-12
    assert abs(bm.c_lkr(x, body, bm.LEFT, np.pi) - (-(r_x @ tau))) < 1e-12
    for _ in range(20):
        x = random_state(rng)
        alpha_c = rng.uniform(0.0, np.pi)
        for side in SIDES:
            fd = oracles.numeric_jacobian(lambda s: np.array([bm.c_lkr(s, body, side, alpha_c)]), x)
            assert np.max(np.abs(fd - bm.C_lkr(x, body, side, alpha_c))) < FD_TOL


def test_assemble_constraints_active_set(body):
    from lgpose.gaitsim import standing_state

    x = standing_state(body)
    c, resid, rom = bm.assemble_constraints(x, body)
    assert c.shape == (4, 27)
    assert rom == (False, False)
    assert np.max(np.abs(resid)) < 1e-12  # satisfied state
    # hyperextend the left knee to -5 degrees (tau(a) = d(-sin a, 0, cos a))
    alpha = np.radians(-5.0)
    tau = body.d_lthigh * np.array([-np.sin(alpha), 0.0, np.cos(alpha)])
    y = place_leg(body, bm.LEFT, tau)
    assert abs(bm.knee_angle(y, body, bm.LEFT) - alpha) < 1e-12
    y.right_shank = x.right_shank.copy()
    c, resid, rom = bm.assemble_constraints(y, body)
    assert rom[0] is True
    assert c.shape[0] == 4 + int(rom[0]) + int(rom[1])


def test_assemble_constraints_rows_match_standalone(body):
    rng = np.random.default_rng(15)
    for _ in range(10):
        x = random_state(rng)
        c, resid, rom = bm.assemble_constraints(x, body)
        assert np.max(np.abs(c[0] - bm.C_ltl(x, body, bm.LEFT)[0])) < 1e-14
        assert np.max(np.abs(c[1] - bm.C_lkh(x, body, bm.LEFT)[0])) < 1e-14
        assert abs(resid[0] + bm.c_ltl(x, body, bm.LEFT)) < 1e-14
        assert abs(resid[1] + bm.c_lkh(x, body, bm.LEFT)) < 1e-14
        next_right = 2 + (1 if rom[0] else 0)
        assert np.max(np.abs(c[next_right] - bm.C_ltl(x, body, bm.RIGHT)[0])) < 1e-14


# --- post-processing ----------------------------------------------------------------

def test_thigh_orientation_straight_leg(body):
    x = place_leg(body, bm.LEFT, [0.0, 0.0, body.d_lthigh])
    assert np.max(np.abs(bm.thigh_orientation(x, body, bm.LEFT) - np.eye(3))) < 1e-12


def test_thigh_orientation_properties(body):
    rng = np.random.default_rng(16)
    for _ in range(30):
        x = random_state(rng)
        try:
            r = bm.thigh_orientation(x, body, bm.RIGHT)
        except DegenerateProjection:
            continue
        assert np.max(np.abs(r.T @ r - np.eye(3))) < 1e-12
        assert abs(np.linalg.det(r) - 1.0) < 1e-12
        tau = bm.thigh_vector(x, body, bm.RIGHT)
        # reconstructed long axis is along tau and its hinge axis is orthogonal to tau
        assert np.max(np.abs(r[:, 2] - tau / np.linalg.norm(tau))) < 1e-12
        assert abs(r[:, 1] @ tau) < 1e-12


def test_hip_angles_match_scipy():
    from scipy.spatial.transform import Rotation

    rng = np.random.default_rng(17)
    for _ in range(50):
        rp = random_rotation(rng)
        rt = random_rotation(rng)
        ay, ax, az = bm.hip_angles_yxz(rp, rt)
        ref = Rotation.from_matrix(rp.T @ rt).as_euler("YXZ")
        assert np.max(np.abs(np.array([ay, ax, az]) - ref)) < 1e-9
