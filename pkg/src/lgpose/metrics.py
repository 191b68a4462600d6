"""Evaluation metrics: bias-removed RMSE, Pearson CC, travelled-distance deviation."""

from __future__ import annotations

import numpy as np

from .errors import LengthMismatch, ZeroReferenceDistance


def rmse_bias_removed(est: np.ndarray, ref: np.ndarray) -> float:
    """RMS of the mean-subtracted error series (units follow the inputs)."""
    est = np.asarray(est, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if est.shape != ref.shape or est.size < 2:
        raise LengthMismatch(f"series shapes {est.shape} vs {ref.shape} (need equal, length >= 2)")
    e = est - ref
    e = e - np.mean(e)
    return float(np.sqrt(np.mean(e * e)))


def pearson_cc(est: np.ndarray, ref: np.ndarray) -> float:
    """Pearson correlation; NaN when either series is constant."""
    est = np.asarray(est, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if est.shape != ref.shape or est.size < 2:
        raise LengthMismatch(f"series shapes {est.shape} vs {ref.shape} (need equal, length >= 2)")
    a = est - np.mean(est)
    b = ref - np.mean(ref)
    denom = np.sqrt(np.sum(a * a) * np.sum(b * b))
    if denom < 1e-15:
        return float("nan")
    return float(np.sum(a * b) / denom)


def ttd_deviation(est_positions: np.ndarray, ref_positions: np.ndarray) -> float:
    """Total-travelled-distance deviation in percent.

    |sum ||d est|| - sum ||d ref||| / sum ||d ref|| * 100 over per-frame
    position increments.
    """
    est_positions = np.atleast_2d(np.asarray(est_positions, dtype=float))
    ref_positions = np.atleast_2d(np.asarray(ref_positions, dtype=float))
    if est_positions.shape != ref_positions.shape or est_positions.shape[0] < 2:
        raise LengthMismatch(
            f"trajectory shapes {est_positions.shape} vs {ref_positions.shape} (need equal, length >= 2)"
        )
    ttd_est = float(np.sum(np.linalg.norm(np.diff(est_positions, axis=0), axis=1)))
    ttd_ref = float(np.sum(np.linalg.norm(np.diff(ref_positions, axis=0), axis=1)))
    if ttd_ref == 0.0:
        raise ZeroReferenceDistance("reference trajectory has zero path length")
    return abs(ttd_est - ttd_ref) / ttd_ref * 100.0
