import numpy as np
import pytest

from lgpose import biomech as bm
from lgpose import state as st
from lgpose.liegroups import make_pose, so3_exp


def random_rotation(rng, max_angle=np.pi - 0.1):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return so3_exp(axis * rng.uniform(0.0, max_angle))


def random_pose(rng, max_angle=np.pi - 0.1, max_trans=2.0):
    return make_pose(random_rotation(rng, max_angle), rng.uniform(-max_trans, max_trans, 3))


def random_state(rng, max_angle=np.radians(170.0), max_trans=2.0):
    return st.PoseState(
        random_pose(rng, max_angle, max_trans),
        random_pose(rng, max_angle, max_trans),
        random_pose(rng, max_angle, max_trans),
        rng.normal(0.0, 1.0, 3),
        rng.normal(0.0, 1.0, 3),
        rng.normal(0.0, 1.0, 3),
    )


def random_imu_frame(rng, t=0.0, fc_left=False, fc_right=False):
    return bm.ImuFrame(
        t=t,
        acc_p=rng.normal(0.0, 1.0, 3),
        acc_ls=rng.normal(0.0, 1.0, 3),
        acc_rs=rng.normal(0.0, 1.0, 3),
        rot_p=random_rotation(rng),
        rot_ls=random_rotation(rng),
        rot_rs=random_rotation(rng),
        fc_left=fc_left,
        fc_right=fc_right,
    )


def place_leg(body, side, tau, shank_rot=None, pelvis_rot=None):
    """State whose thigh vector for `side` equals tau exactly."""
    from lgpose.liegroups import make_pose as _mk

    shank_rot = np.eye(3) if shank_rot is None else shank_rot
    pelvis_rot = np.eye(3) if pelvis_rot is None else pelvis_rot
    shank = _mk(shank_rot, np.zeros(3))
    knee = (shank @ bm.knee_point(body, side))[:3]
    hip = knee + np.asarray(tau, dtype=float)
    pelvis_t = hip - pelvis_rot @ bm.hip_point(body, side)[:3]
    x = st.PoseState.identity()
    x.pelvis = _mk(pelvis_rot, pelvis_t)
    if side == bm.LEFT:
        x.left_shank = shank
    else:
        x.right_shank = shank
    return x


@pytest.fixture(scope="session")
def body():
    return bm.BodyParams()


@pytest.fixture(scope="session")
def short_walk():
    """10 s default straight walk shared by tests that only read it."""
    from lgpose import gaitsim

    params = gaitsim.GaitParams(duration=10.0)
    return params, gaitsim.generate(params)
