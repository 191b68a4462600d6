"""SO(3), SE(3) and R^n group/algebra operators.

Conventions: rotations are 3x3 orthonormal matrices, rigid transforms are
4x4 homogeneous matrices, and se(3) coordinates are ordered (rho, phi) with
the translation part first.  All functions are pure and allocation-light.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import MalformedAlgebra, NearPiRotation, NonSkewInput

# Below this angle the Rodrigues / J-matrix closed forms switch to their
# 2nd-order Taylor expansions (error O(|phi|^3)).
SMALL_ANGLE = 1e-7

_EYE3 = np.eye(3)
_EYE3.setflags(write=False)


def so3_hat(phi: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector."""
    phi = np.asarray(phi, dtype=float)
    m = np.zeros((3, 3))
    m[0, 1] = -phi[2]
    m[0, 2] = phi[1]
    m[1, 0] = phi[2]
    m[1, 2] = -phi[0]
    m[2, 0] = -phi[1]
    m[2, 1] = phi[0]
    return m


def so3_vee(m: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Inverse of so3_hat; rejects matrices that are not skew within tol."""
    if np.max(np.abs(m + m.T)) > tol:
        raise NonSkewInput(f"symmetry violation {np.max(np.abs(m + m.T)):.3e} exceeds {tol:.1e}")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def _rot_and_left_jacobian(phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rodrigues rotation and the J matrix of the SE(3) exp, sharing work."""
    phi = np.asarray(phi, dtype=float)
    theta = math.sqrt(float(phi @ phi))
    k = so3_hat(phi)
    if theta < SMALL_ANGLE:
        kk = k @ k
        return _EYE3 + k + 0.5 * kk, _EYE3 + 0.5 * k + kk / 6.0
    s, c = math.sin(theta), math.cos(theta)
    a = phi / theta
    outer = np.outer(a, a)
    ka = k / theta
    rot = c * _EYE3 + (1.0 - c) * outer + s * ka
    sr = s / theta
    jac = sr * _EYE3 + (1.0 - sr) * outer + ((1.0 - c) / theta) * ka
    return rot, jac


def so3_exp(phi: np.ndarray) -> np.ndarray:
    """Rodrigues formula, exp: so(3) -> SO(3)."""
    return _rot_and_left_jacobian(phi)[0]


def so3_log(r: np.ndarray) -> np.ndarray:
    """Log map of SO(3); raises NearPiRotation within 1e-6 of theta = pi."""
    half_tr = (r[0, 0] + r[1, 1] + r[2, 2] - 1.0) / 2.0
    theta = math.acos(min(1.0, max(-1.0, half_tr)))
    if theta >= math.pi - 1e-6:
        raise NearPiRotation(f"rotation angle {theta:.9f} too close to pi")
    if theta < SMALL_ANGLE:
        # theta/(2 sin theta) -> 1/2 + theta^2/12
        scale = 0.5 + theta * theta / 12.0
    else:
        scale = theta / (2.0 * math.sin(theta))
    m = scale * (r - r.T)
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def _so3_left_jacobian(phi: np.ndarray) -> np.ndarray:
    """J such that exp_se3((rho, phi)) has translation J @ rho."""
    return _rot_and_left_jacobian(phi)[1]


def se3_hat(xi: np.ndarray) -> np.ndarray:
    """4x4 algebra matrix of a twist (rho, phi)."""
    xi = np.asarray(xi, dtype=float)
    m = np.zeros((4, 4))
    m[:3, :3] = so3_hat(xi[3:6])
    m[:3, 3] = xi[0:3]
    return m


def se3_vee(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Inverse of se3_hat; rejects matrices with a nonzero bottom row."""
    if np.max(np.abs(m[3, :])) > tol:
        raise MalformedAlgebra("bottom row of an se(3) element must be zero")
    phi = so3_vee(m[:3, :3])
    return np.concatenate([m[:3, 3], phi])


def se3_exp(xi: np.ndarray) -> np.ndarray:
    """Exp map se(3) -> SE(3): rotation by Rodrigues, translation J(phi) rho."""
    xi = np.asarray(xi, dtype=float)
    rot, jac = _rot_and_left_jacobian(xi[3:6])
    t = np.zeros((4, 4))
    t[:3, :3] = rot
    t[:3, 3] = jac @ xi[0:3]
    t[3, 3] = 1.0
    return t


def se3_log(t: np.ndarray) -> np.ndarray:
    """Log map of SE(3); rho recovered by a linear solve against J(phi)."""
    phi = so3_log(t[:3, :3])
    rho = np.linalg.solve(_so3_left_jacobian(phi), t[:3, 3])
    return np.concatenate([rho, phi])


def se3_inverse(t: np.ndarray) -> np.ndarray:
    """Inverse transform [C^T, -C^T r; 0, 1]."""
    out = np.eye(4)
    rt = t[:3, :3].T
    out[:3, :3] = rt
    out[:3, 3] = -rt @ t[:3, 3]
    return out


def se3_adjoint(t: np.ndarray) -> np.ndarray:
    """6x6 adjoint [C, hat(r) C; 0, C] in (rho, phi) ordering."""
    c = t[:3, :3]
    ad = np.zeros((6, 6))
    ad[:3, :3] = c
    ad[:3, 3:] = so3_hat(t[:3, 3]) @ c
    ad[3:, 3:] = c
    return ad


def se3_small_adjoint(xi: np.ndarray) -> np.ndarray:
    """6x6 algebra adjoint [hat(phi), hat(rho); 0, hat(phi)]."""
    xi = np.asarray(xi, dtype=float)
    ad = np.zeros((6, 6))
    hp = so3_hat(xi[3:6])
    ad[:3, :3] = hp
    ad[:3, 3:] = so3_hat(xi[0:3])
    ad[3:, 3:] = hp
    return ad


def se3_odot(b: np.ndarray) -> np.ndarray:
    """4x6 operator turning se3_hat(a) @ b into a linear function of a.

    Satisfies se3_hat(a) @ b == se3_odot(b) @ a for all a in R^6.
    """
    b = np.asarray(b, dtype=float)
    out = np.zeros((4, 6))
    out[:3, :3] = b[3] * np.eye(3)
    out[:3, 3:] = -so3_hat(b[:3])
    return out


def se3_right_jacobian(xi: np.ndarray, n_terms: int = 10) -> np.ndarray:
    """Right Jacobian of SE(3) via the truncated adjoint series."""
    return right_jacobian_series(se3_small_adjoint(xi), n_terms)


# --- R^n as a matrix group (affine embedding) -------------------------------

def rn_hat(v: np.ndarray) -> np.ndarray:
    """(n+1)x(n+1) algebra matrix with v in the top-right column."""
    v = np.asarray(v, dtype=float)
    n = len(v)
    m = np.zeros((n + 1, n + 1))
    m[:n, n] = v
    return m


def rn_vee(m: np.ndarray) -> np.ndarray:
    n = m.shape[0] - 1
    return m[:n, n].copy()


def rn_exp(v: np.ndarray) -> np.ndarray:
    """Affine embedding of v; composition of exps adds the vectors."""
    v = np.asarray(v, dtype=float)
    n = len(v)
    m = np.eye(n + 1)
    m[:n, n] = v
    return m


def rn_log(m: np.ndarray) -> np.ndarray:
    n = m.shape[0] - 1
    return m[:n, n].copy()


def rn_inverse(m: np.ndarray) -> np.ndarray:
    out = m.copy()
    n = m.shape[0] - 1
    out[:n, n] = -m[:n, n]
    return out


def rn_adjoint(n: int) -> np.ndarray:
    return np.eye(n)


def rn_small_adjoint(n: int) -> np.ndarray:
    return np.zeros((n, n))


# --- generic series oracles --------------------------------------------------

def exp_series(a: np.ndarray, n_terms: int = 20) -> np.ndarray:
    """Truncated matrix exponential: powers 0..n_terms of A over k!; oracle only."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    a = np.asarray(a, dtype=float)
    out = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, n_terms + 1):
        term = term @ a / k
        out = out + term
    return out


def right_jacobian_series(ad: np.ndarray, n_terms: int = 10) -> np.ndarray:
    """Truncated sum_i (-1)^i/(i+1)! ad^i; exact identity when ad == 0.

    Stops early once a power of ad vanishes (nilpotent twists).
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    out = np.eye(ad.shape[0])
    term = np.eye(ad.shape[0])
    for i in range(1, n_terms):
        term = term @ ad * (-1.0 / (i + 1.0))
        if not term.any():
            break
        out = out + term
    return out


# --- quaternion helpers (w, x, y, z convention) ------------------------------

def rotation_to_quat(r: np.ndarray) -> np.ndarray:
    """Rotation matrix to unit quaternion (w, x, y, z), w >= 0."""
    tr = np.trace(r)
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s])
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        q = np.array([(r[2, 1] - r[1, 2]) / s, 0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s])
    elif r[1, 1] > r[2, 2]:
        s = np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        q = np.array([(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        q = np.array([(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s])
    if q[0] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def quat_to_rotation(q: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) to rotation matrix."""
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def make_pose(r: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Assemble a 4x4 transform from rotation and translation."""
    out = np.eye(4)
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    out[:3, :3] = r
    out[:3, 3] = t
    return out


def is_rotation(r: np.ndarray, tol: float = 1e-9) -> bool:
    return (
        r.shape == (3, 3)
        and np.max(np.abs(r.T @ r - np.eye(3))) <= tol
        and abs(np.linalg.det(r) - 1.0) <= tol
    )
