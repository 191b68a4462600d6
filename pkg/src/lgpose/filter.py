"""Three-phase Lie-group constrained EKF: predict, measure, project.

Means live on G = SE(3)^3 x R^9 and are updated by right-multiplying the
exponential of the gain-weighted innovation; covariances live on the
27-dimensional right-perturbation error.  The covariance limiter augments
the measurement rows with a pseudo-measurement of the current SE(3) state
so unobservable directions cannot grow without bound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import biomech as bm
from . import state as st
from .errors import LgposeError, NonFiniteState, SingularConstraintGram, SingularInnovation

_COND_LIMIT = 1e12


@dataclass
class FilterConfig:
    noise: bm.NoiseParams = field(default_factory=bm.NoiseParams)
    body: bm.BodyParams = field(default_factory=bm.BodyParams)
    p0_scale: float = 0.5
    jacobian_terms: int = 10
    limiter: bool = True
    clamp_psd: bool = False  # diagnostic: floor covariance eigenvalues at 0

    def __post_init__(self):
        if self.p0_scale <= 0.0:
            raise ValueError("p0_scale must be > 0")
        if self.jacobian_terms < 1:
            raise ValueError("jacobian_terms must be >= 1")

    def initial_covariance(self) -> np.ndarray:
        return self.p0_scale * np.eye(st.STATE_DIM)


@dataclass
class FilterTrace:
    """Per-frame diagnostics recorded by run_filter."""

    mu_pred: list = field(default_factory=list)
    mu_meas: list = field(default_factory=list)
    mu_constrained: list = field(default_factory=list)
    cov_trace: list = field(default_factory=list)
    cov_min_eig: list = field(default_factory=list)
    max_asymmetry: list = field(default_factory=list)
    innovation_norm: list = field(default_factory=list)
    n_meas_rows: list = field(default_factory=list)
    rom_active: list = field(default_factory=list)
    runtime_s: float = 0.0


def _require_finite(belief: st.Belief, where: str) -> None:
    mu = belief.mu
    ok = (
        np.isfinite(belief.cov).all()
        and np.isfinite(mu.pelvis).all()
        and np.isfinite(mu.left_shank).all()
        and np.isfinite(mu.right_shank).all()
        and np.isfinite(mu.v_pelvis).all()
        and np.isfinite(mu.v_left_shank).all()
        and np.isfinite(mu.v_right_shank).all()
    )
    if not ok:
        raise NonFiniteState(f"non-finite entries after {where}")


def _finish_cov(p: np.ndarray, cfg: FilterConfig) -> tuple[np.ndarray, float]:
    """Symmetrize, optionally clamp, and report the raw asymmetry."""
    asym = float(np.max(np.abs(p - p.T)))
    p = st.symmetrize(p)
    if cfg.clamp_psd:
        w, v = np.linalg.eigh(p)
        if w[0] < 0.0:
            p = (v * np.maximum(w, 0.0)) @ v.T
            p = st.symmetrize(p)
    return p, asym


def _spd_wellconditioned(s: np.ndarray) -> bool:
    """Cheap SPD + condition screen: Cholesky, then eigenvalues only if suspect."""
    try:
        ell = np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        return False
    d = np.diag(ell)
    if (d.max() / d.min()) ** 2 <= _COND_LIMIT:
        return True
    w = np.linalg.eigvalsh(s)
    return w[0] > 0.0 and w[-1] / w[0] <= _COND_LIMIT


def _spd_solve(s: np.ndarray, rhs: np.ndarray, err: type, what: str) -> np.ndarray:
    """Solve s @ x = rhs for symmetric positive-definite s with a cond guard."""
    try:
        ell = np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        raise err(f"{what} is not positive definite") from None
    d = np.diag(ell)
    if (d.max() / d.min()) ** 2 > _COND_LIMIT:
        w = np.linalg.eigvalsh(s)
        if w[0] <= 0.0 or w[-1] / w[0] > _COND_LIMIT:
            raise err(f"{what} condition number exceeds {_COND_LIMIT:.0e}")
    return np.linalg.solve(s, rhs)


def _predict(
    belief: st.Belief, imu: bm.ImuFrame, cfg: FilterConfig, q: np.ndarray | None = None
) -> tuple[st.Belief, float]:
    om = bm.omega(belief.mu, imu, cfg.noise.dt)
    mu_pred = st.perturb(belief.mu, om)
    jac = st.state_right_jacobian(om, cfg.jacobian_terms)
    f = st.state_adjoint(st.state_exp(-om)) + jac @ bm.motion_jacobian(imu, cfg.noise.dt)
    if q is None:
        q = bm.process_noise(cfg.noise)
    p = f @ belief.cov @ f.T + jac @ q @ jac.T
    p, asym = _finish_cov(p, cfg)
    out = st.Belief(mu_pred, p)
    _require_finite(out, "predict")
    return out, asym


def _measurement_update(
    belief: st.Belief, imu: bm.ImuFrame, cfg: FilterConfig
) -> tuple[st.Belief, float, int, float]:
    h, dz, r_diag = bm.assemble_measurement(belief.mu, imu, cfg.noise, cfg.body)
    pht = belief.cov @ h.T
    s = st.symmetrize(h @ pht + np.diag(r_diag))
    gain = _spd_solve(s, pht.T, SingularInnovation, "innovation covariance").T
    nu = gain @ dz
    mu_post = st.perturb(belief.mu, nu)

    if cfg.limiter:
        h_aug = np.vstack([h, bm.H_lim()])
        r_aug = np.concatenate([r_diag, cfg.noise.sigma2_lim])
    else:
        h_aug, r_aug = h, r_diag
    pht_aug = belief.cov @ h_aug.T
    s_aug = st.symmetrize(h_aug @ pht_aug + np.diag(r_aug))
    gain_aug = _spd_solve(s_aug, pht_aug.T, SingularInnovation, "limiter innovation covariance").T
    inner = belief.cov - gain_aug @ pht_aug.T
    jac = st.state_right_jacobian(nu, cfg.jacobian_terms)
    p, asym = _finish_cov(jac @ inner @ jac.T, cfg)
    out = st.Belief(mu_post, p)
    _require_finite(out, "measurement update")
    return out, float(np.linalg.norm(dz)), h.shape[0], asym


def _constraint_update(
    belief: st.Belief, cfg: FilterConfig
) -> tuple[st.Belief, tuple[bool, bool]]:
    c, resid, rom = bm.assemble_constraints(belief.mu, cfg.body)
    pct = belief.cov @ c.T
    gram = st.symmetrize(c @ pct)
    if not _spd_wellconditioned(gram):
        gram = gram + 1e-12 * np.trace(gram) * np.eye(gram.shape[0])
        if not _spd_wellconditioned(gram):
            raise SingularConstraintGram("constraint Gram matrix stayed ill-conditioned after jitter")
    gain = np.linalg.solve(gram, pct.T).T
    nu = gain @ resid
    out = st.Belief(st.perturb(belief.mu, nu), belief.cov)
    _require_finite(out, "constraint update")
    return out, rom


def predict(belief: st.Belief, imu: bm.ImuFrame, cfg: FilterConfig) -> st.Belief:
    """Propagate mean and covariance through the motion model."""
    return _predict(belief, imu, cfg)[0]


def measurement_update(belief: st.Belief, imu: bm.ImuFrame, cfg: FilterConfig) -> st.Belief:
    """Fuse orientation, pelvis-height and stance-foot measurements.

    The mean uses the unaugmented gain; the covariance is computed from the
    limiter-augmented system and transported by the right Jacobian of the
    correction.
    """
    return _measurement_update(belief, imu, cfg)[0]


def constraint_update(belief: st.Belief, cfg: FilterConfig) -> st.Belief:
    """Single projection of the mean onto the active constraint set."""
    return _constraint_update(belief, cfg)[0]


def run_filter(
    frames: list[bm.ImuFrame],
    init: st.Belief,
    cfg: FilterConfig,
    record_eigenvalues: bool = False,
) -> tuple[list[st.PoseState], FilterTrace]:
    """Run predict -> measurement -> constraint over an IMU sequence.

    Frame k's prediction uses frame k-1's accelerations (the increment that
    carries t_{k-1} to t_k); frame 0 is measurement/constraint only.  One
    output state and one trace record per input frame.
    """
    if len(frames) == 0:
        raise ValueError("frames must be non-empty")
    times = np.array([f.t for f in frames])
    if np.any(np.diff(times) <= 0.0):
        raise ValueError("frame timestamps must be strictly increasing")

    belief = init.copy()
    q = bm.process_noise(cfg.noise)
    trace = FilterTrace()
    trajectory: list[st.PoseState] = []
    started = time.perf_counter()
    for k, frame in enumerate(frames):
        try:
            asym_pred = 0.0
            if k > 0:
                belief, asym_pred = _predict(belief, frames[k - 1], cfg, q)
            trace.mu_pred.append(belief.mu)
            belief, dz_norm, n_rows, asym_meas = _measurement_update(belief, frame, cfg)
            trace.mu_meas.append(belief.mu)
            belief, rom = _constraint_update(belief, cfg)
            trace.mu_constrained.append(belief.mu)
        except LgposeError as exc:
            raise type(exc)(f"frame {k}: {exc}") from exc
        trajectory.append(belief.mu)
        trace.cov_trace.append(float(np.trace(belief.cov)))
        trace.cov_min_eig.append(
            float(np.linalg.eigvalsh(belief.cov)[0]) if record_eigenvalues else np.nan
        )
        trace.max_asymmetry.append(max(asym_pred, asym_meas))
        trace.innovation_norm.append(dz_norm)
        trace.n_meas_rows.append(n_rows)
        trace.rom_active.append(rom)
    trace.runtime_s = time.perf_counter() - started
    return trajectory, trace
