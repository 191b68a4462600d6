"""Independent numerical oracles: finite differences and dense embeddings.

These exist to machine-check the analytic Jacobians and the blockwise group
operators; nothing in the filter path depends on them.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import liegroups as lie
from . import state as st


def numeric_jacobian(
    f: Callable[[st.PoseState], np.ndarray], mu: st.PoseState, h: float = 1e-6
) -> np.ndarray:
    """Central-difference Jacobian of f through the right perturbation.

    Column j is (f(mu exp(+h e_j)) - f(mu exp(-h e_j))) / (2h).  Group-valued
    functions must be wrapped so f returns the vee-log of a relative element.
    """
    if h <= 0.0:
        raise ValueError("step must be > 0")
    f0 = np.atleast_1d(np.asarray(f(mu), dtype=float))
    out = np.empty((f0.size, st.STATE_DIM))
    for j in range(st.STATE_DIM):
        e = np.zeros(st.STATE_DIM)
        e[j] = h
        fp = np.atleast_1d(np.asarray(f(st.perturb(mu, e)), dtype=float))
        e[j] = -h
        fm = np.atleast_1d(np.asarray(f(st.perturb(mu, e)), dtype=float))
        out[:, j] = (fp - fm) / (2.0 * h)
    return out


# dense matrix embedding of G = SE(3)^3 x R^9: three 4x4 blocks plus the
# 10x10 affine block, 22x22 in total
DENSE_DIM = 22
_POSE_SLOTS = (slice(0, 4), slice(4, 8), slice(8, 12))
_VEL_SLOT = slice(12, 22)


def dense_hat(e: np.ndarray) -> np.ndarray:
    """Embed a 27-vector into the block-diagonal algebra matrix."""
    m = np.zeros((DENSE_DIM, DENSE_DIM))
    for slot, cols in zip(_POSE_SLOTS, (st.PELVIS, st.LEFT_SHANK, st.RIGHT_SHANK)):
        m[slot, slot] = lie.se3_hat(e[cols])
    m[_VEL_SLOT, _VEL_SLOT] = lie.rn_hat(e[18:27])
    return m


def dense_embed(x: st.PoseState) -> np.ndarray:
    """Embed a PoseState into the dense block-diagonal group matrix."""
    m = np.zeros((DENSE_DIM, DENSE_DIM))
    for slot, pose in zip(_POSE_SLOTS, x.poses()):
        m[slot, slot] = pose
    m[_VEL_SLOT, _VEL_SLOT] = lie.rn_exp(x.velocities())
    return m


def dense_extract(m: np.ndarray) -> st.PoseState:
    """Inverse of dense_embed."""
    v = lie.rn_log(m[_VEL_SLOT, _VEL_SLOT])
    return st.PoseState(
        m[_POSE_SLOTS[0], _POSE_SLOTS[0]].copy(),
        m[_POSE_SLOTS[1], _POSE_SLOTS[1]].copy(),
        m[_POSE_SLOTS[2], _POSE_SLOTS[2]].copy(),
        v[0:3],
        v[3:6],
        v[6:9],
    )
