"""Product-group state G = SE(3)^3 x R^9 for pelvis + two shanks.

Error vectors are 27-dimensional, ordered as three (rho, phi) twists for
pelvis / left shank / right shank followed by the three velocity errors.
The dense block-diagonal matrix embedding of the group exists only in test
oracles; here the state is kept as structured fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import liegroups as lie

# column/row offsets of the error-vector blocks
PELVIS = slice(0, 6)
LEFT_SHANK = slice(6, 12)
RIGHT_SHANK = slice(12, 18)
VEL_PELVIS = slice(18, 21)
VEL_LEFT = slice(21, 24)
VEL_RIGHT = slice(24, 27)

STATE_DIM = 27

_EYE9 = np.eye(9)
_EYE9.setflags(write=False)


@dataclass
class PoseState:
    """Poses of the three instrumented segments plus their world velocities."""

    pelvis: np.ndarray  # 4x4
    left_shank: np.ndarray  # 4x4
    right_shank: np.ndarray  # 4x4
    v_pelvis: np.ndarray  # (3,)
    v_left_shank: np.ndarray  # (3,)
    v_right_shank: np.ndarray  # (3,)

    def copy(self) -> "PoseState":
        return PoseState(
            self.pelvis.copy(),
            self.left_shank.copy(),
            self.right_shank.copy(),
            self.v_pelvis.copy(),
            self.v_left_shank.copy(),
            self.v_right_shank.copy(),
        )

    def poses(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.pelvis, self.left_shank, self.right_shank

    def velocities(self) -> np.ndarray:
        return np.concatenate([self.v_pelvis, self.v_left_shank, self.v_right_shank])

    @staticmethod
    def identity() -> "PoseState":
        return PoseState(np.eye(4), np.eye(4), np.eye(4), np.zeros(3), np.zeros(3), np.zeros(3))


@dataclass
class Belief:
    """Concentrated Gaussian on G: mean state and 27x27 error covariance."""

    mu: PoseState
    cov: np.ndarray

    def copy(self) -> "Belief":
        return Belief(self.mu.copy(), self.cov.copy())


def state_exp(e: np.ndarray) -> PoseState:
    """Blockwise exp of a 27-vector: three SE(3) twists and a velocity block."""
    return PoseState(
        lie.se3_exp(e[PELVIS]),
        lie.se3_exp(e[LEFT_SHANK]),
        lie.se3_exp(e[RIGHT_SHANK]),
        e[VEL_PELVIS].copy(),
        e[VEL_LEFT].copy(),
        e[VEL_RIGHT].copy(),
    )


def state_log(x: PoseState) -> np.ndarray:
    """Blockwise inverse of state_exp."""
    out = np.empty(STATE_DIM)
    out[PELVIS] = lie.se3_log(x.pelvis)
    out[LEFT_SHANK] = lie.se3_log(x.left_shank)
    out[RIGHT_SHANK] = lie.se3_log(x.right_shank)
    out[VEL_PELVIS] = x.v_pelvis
    out[VEL_LEFT] = x.v_left_shank
    out[VEL_RIGHT] = x.v_right_shank
    return out


def compose(a: PoseState, b: PoseState) -> PoseState:
    """Blockwise group composition (poses multiply, velocities add)."""
    return PoseState(
        a.pelvis @ b.pelvis,
        a.left_shank @ b.left_shank,
        a.right_shank @ b.right_shank,
        a.v_pelvis + b.v_pelvis,
        a.v_left_shank + b.v_left_shank,
        a.v_right_shank + b.v_right_shank,
    )


def inverse(x: PoseState) -> PoseState:
    return PoseState(
        lie.se3_inverse(x.pelvis),
        lie.se3_inverse(x.left_shank),
        lie.se3_inverse(x.right_shank),
        -x.v_pelvis,
        -x.v_left_shank,
        -x.v_right_shank,
    )


def perturb(mu: PoseState, e: np.ndarray) -> PoseState:
    """Right perturbation mu * exp(e)."""
    return compose(mu, state_exp(e))


def error_between(mu: PoseState, x: PoseState) -> np.ndarray:
    """e such that x = mu * exp(e), i.e. log(mu^-1 x)."""
    return state_log(compose(inverse(mu), x))


def state_adjoint(x: PoseState) -> np.ndarray:
    """block-diag(Ad(T_p), Ad(T_ls), Ad(T_rs), I_9)."""
    out = np.zeros((STATE_DIM, STATE_DIM))
    out[PELVIS, PELVIS] = lie.se3_adjoint(x.pelvis)
    out[LEFT_SHANK, LEFT_SHANK] = lie.se3_adjoint(x.left_shank)
    out[RIGHT_SHANK, RIGHT_SHANK] = lie.se3_adjoint(x.right_shank)
    out[18:, 18:] = _EYE9
    return out


def state_small_adjoint(e: np.ndarray) -> np.ndarray:
    """block-diag(ad of each twist, 0_9x9)."""
    out = np.zeros((STATE_DIM, STATE_DIM))
    out[PELVIS, PELVIS] = lie.se3_small_adjoint(e[PELVIS])
    out[LEFT_SHANK, LEFT_SHANK] = lie.se3_small_adjoint(e[LEFT_SHANK])
    out[RIGHT_SHANK, RIGHT_SHANK] = lie.se3_small_adjoint(e[RIGHT_SHANK])
    return out


def state_right_jacobian(v: np.ndarray, n_terms: int = 10) -> np.ndarray:
    """block-diag(SE(3) right Jacobians, I_9); exact identity on velocities."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    out = np.zeros((STATE_DIM, STATE_DIM))
    np.fill_diagonal(out, 1.0)
    if n_terms == 1:
        return out
    if not (v[3:6].any() or v[9:12].any() or v[15:18].any()):
        # pure-translation twists: ad is nilpotent (ad^2 = 0), series is exact
        out[0:3, 3:6] = -0.5 * lie.so3_hat(v[0:3])
        out[6:9, 9:12] = -0.5 * lie.so3_hat(v[6:9])
        out[12:15, 15:18] = -0.5 * lie.so3_hat(v[12:15])
        return out
    ads = np.stack(
        [
            lie.se3_small_adjoint(v[PELVIS]),
            lie.se3_small_adjoint(v[LEFT_SHANK]),
            lie.se3_small_adjoint(v[RIGHT_SHANK]),
        ]
    )
    term = np.broadcast_to(np.eye(6), (3, 6, 6)).copy()
    acc = term.copy()
    for i in range(1, n_terms):
        term = term @ ads
        term *= -1.0 / (i + 1.0)
        acc += term
    out[PELVIS, PELVIS] = acc[0]
    out[LEFT_SHANK, LEFT_SHANK] = acc[1]
    out[RIGHT_SHANK, RIGHT_SHANK] = acc[2]
    return out


def symmetrize(p: np.ndarray) -> np.ndarray:
    return 0.5 * (p + p.T)
