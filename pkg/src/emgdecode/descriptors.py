"""Multichannel linear descriptors over block fields.

Three descriptors summarize each (window, block) segment X of shape (L, K):

* sigma — effective field strength, sqrt of the mean integral power per
  channel: sqrt( sum(X^2) / (K*L) ). Equals the pooled RMS of the segment.
* phi — field-strength variation rate in Hz: (1/2pi) * sqrt( sum of squared
  forward differences scaled by fs^2 over the signal power ). A generalized
  frequency: for a pure sinusoid it converges to the sinusoid's frequency.
* omega — spatial complexity: exp of the Shannon entropy of the normalized
  eigenvalues of the second-moment matrix X^T X / L. Ranges from 1 (one
  spatial mode) to K (variance spread uniformly over all modes).

Degenerate segments (zero energy) use the continuity conventions
sigma = 0, phi = 0, omega = 1 so no NaNs propagate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .blocks import BlockPlan, WindowPlan, window_diff_sumsq, window_sumsq, window_view
from .errors import InvalidInputError
from .signal_core import SignalMatrix

TWO_PI = 2.0 * math.pi


def _as_segment(seg) -> np.ndarray:
    arr = np.asarray(seg, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError("segment must be a (L, K) matrix with L, K >= 1")
    return arr


def sigma(seg) -> float:
    """Effective field strength: pooled RMS over all entries of the segment."""
    arr = _as_segment(seg)
    per_channel = np.einsum("lk,lk->k", arr, arr)
    return float(np.sqrt(per_channel.sum() / arr.size))


def phi(seg, fs: float) -> float:
    """Field-strength variation rate in Hz; 0 for zero-energy segments."""
    arr = _as_segment(seg)
    if arr.shape[0] < 2:
        raise InvalidInputError("phi requires at least two samples")
    d = np.diff(arr, axis=0)
    num = float(np.einsum("lk,lk->", d, d)) * fs * fs
    den = float(np.einsum("lk,lk->", arr, arr))
    if den == 0.0:
        return 0.0
    return math.sqrt(num / den) / TWO_PI


def block_covariance(seg) -> np.ndarray:
    """Second-moment matrix X^T X / L (no mean subtraction); symmetric PSD."""
    arr = _as_segment(seg)
    return (arr.T @ arr) / arr.shape[0]


def _round_robin_pairs(k: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule covering every (p, q) pair once per sweep in
    rounds of disjoint pairs (odd k gets a bye slot that is dropped)."""
    n = k + (k % 2)
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        ps, qs = [], []
        for i in range(n // 2):
            a, b = players[i], players[n - 1 - i]
            if a < k and b < k:
                ps.append(a)
                qs.append(b)
        rounds.append((np.asarray(ps, dtype=np.intp), np.asarray(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigvals(mats, tol: float = 1e-12, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of symmetric matrices by cyclic Jacobi rotations.

    Accepts a single (K, K) matrix or a batch (..., K, K). Each sweep cycles
    through all pairs in a fixed round-robin order; the disjoint pairs of a
    round rotate simultaneously across the whole batch, so the result does
    not depend on any evaluation order. Convergence: off-diagonal Frobenius
    norm <= tol * trace for every matrix in the batch.

    Returns eigenvalues sorted descending along the last axis.
    """
    A = np.asarray(mats, dtype=np.float64)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise InvalidInputError("expected square matrices of shape (..., K, K)")
    batch_shape = A.shape[:-2]
    k = A.shape[-1]
    A = A.reshape((-1, k, k)).copy()
    if k == 1:
        return A[:, 0, 0].reshape(batch_shape + (1,))
    diag_idx = np.arange(k)
    iu_r, iu_c = np.triu_indices(k, 1)
    rounds = _round_robin_pairs(k)
    for _ in range(max_sweeps):
        # off-diagonal norm gathered directly (a sum-of-squares subtraction
        # would cancel near convergence and never reach the tolerance)
        off = np.sqrt(2.0 * np.einsum("ni,ni->n", A[:, iu_r, iu_c], A[:, iu_r, iu_c]))
        trace = np.abs(A[:, diag_idx, diag_idx]).sum(axis=1)
        active = np.flatnonzero(off > tol * trace)
        if active.size == 0:
            break
        sub = A[active]
        for p_arr, q_arr in rounds:
            apq = sub[:, p_arr, q_arr]
            nz = apq != 0.0
            if not nz.any():
                continue
            app = sub[:, p_arr, p_arr]
            aqq = sub[:, q_arr, q_arr]
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                tau = np.where(nz, (aqq - app) / (2.0 * apq), 0.0)
                t = np.where(
                    nz,
                    np.where(tau >= 0.0, 1.0, -1.0)
                    / (np.abs(tau) + np.sqrt(1.0 + tau * tau)),
                    0.0,
                )
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp = sub[:, p_arr, :]
            rq = sub[:, q_arr, :]
            sub[:, p_arr, :] = c[:, :, None] * rp - s[:, :, None] * rq
            sub[:, q_arr, :] = s[:, :, None] * rp + c[:, :, None] * rq
            cp = sub[:, :, p_arr]
            cq = sub[:, :, q_arr]
            sub[:, :, p_arr] = c[:, None, :] * cp - s[:, None, :] * cq
            sub[:, :, q_arr] = s[:, None, :] * cp + c[:, None, :] * cq
            # zero the rotated pairs exactly; skipped (apq == 0) entries keep theirs
            zeroed = np.where(nz, 0.0, sub[:, p_arr, q_arr])
            sub[:, p_arr, q_arr] = zeroed
            sub[:, q_arr, p_arr] = zeroed
        A[active] = sub
    eig = A[:, diag_idx, diag_idx]
    eig = np.sort(eig, axis=-1)[:, ::-1]
    return eig.reshape(batch_shape + (k,))


def spectral_complexity(eigvals) -> np.ndarray | float:
    """Omega from eigenvalues: exp(-sum lam_i * log lam_i) after normalizing
    to unit sum. Negative eigenvalues (numerical noise) are clamped to zero;
    zero total variance yields 1 by convention."""
    ev = np.maximum(np.asarray(eigvals, dtype=np.float64), 0.0)
    scalar = ev.ndim == 1
    if scalar:
        ev = ev[None, :]
    total = ev.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0.0, ev / np.where(total > 0.0, total, 1.0), 0.0)
        plogp = np.where(p > 0.0, p * np.log(p), 0.0)
    omega_vals = np.exp(-plogp.sum(axis=-1))
    omega_vals = np.where(total[..., 0] > 0.0, omega_vals, 1.0)
    return float(omega_vals[0]) if scalar else omega_vals


def omega(seg) -> float:
    """Spatial complexity of a segment, in [1, K]."""
    return float(spectral_complexity(jacobi_eigvals(block_covariance(seg))))


class MLDTriple(NamedTuple):
    sigma: float
    phi: float
    omega: float


def mld_triple(seg, fs: float) -> MLDTriple:
    """All three descriptors of one segment."""
    return MLDTriple(sigma(seg), phi(seg, fs), omega(seg))


@dataclass(frozen=True)
class FeatureTensor:
    """(windows, features) matrix with one provenance string per column."""

    values: np.ndarray
    columns: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", tuple(self.columns))
        if values.ndim != 2:
            raise InvalidInputError("feature values must be a 2-D matrix")
        if values.shape[1] != len(self.columns):
            raise InvalidInputError("one provenance string required per feature column")
        if len(set(self.columns)) != len(self.columns):
            raise InvalidInputError("feature column provenance must be unique")
        if not np.isfinite(values).all():
            raise InvalidInputError("feature values must be finite (no NaN/Inf)")

    @property
    def n_windows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


DESCRIPTOR_NAMES = ("sigma", "phi", "omega")


def mld_column_name(block_id: int, descriptor: str) -> str:
    return f"b{block_id:03d}:{descriptor}"


def extract_mld_bfm(
    x: SignalMatrix, block_plan: BlockPlan, window_plan: WindowPlan
) -> FeatureTensor:
    """MLD-BFM feature tensor: W x (3 * n_blocks), columns grouped per block
    as [sigma, phi, omega] in block enumeration order."""
    X = x.data
    L = window_plan.length
    n_b = block_plan.n_blocks
    K = block_plan.channels_per_block

    sumsq = window_sumsq(X, window_plan)
    diffsq = window_diff_sumsq(X, window_plan)
    idx = np.stack(block_plan.blocks)  # (n_B, K)

    block_sumsq = sumsq[:, idx].sum(axis=-1)
    block_diffsq = diffsq[:, idx].sum(axis=-1)

    sig = np.sqrt(block_sumsq / (K * L))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(block_sumsq > 0.0, block_diffsq / np.where(block_sumsq > 0.0, block_sumsq, 1.0), 0.0)
    phi_vals = np.sqrt(ratio) * (x.fs / TWO_PI)

    if K == 1:
        omega_vals = np.ones_like(sig)
    else:
        omega_vals = np.empty((window_plan.count, n_b))
        per_grid = {}
        for b, gi in enumerate(block_plan.grid_index):
            per_grid.setdefault(gi, []).append(b)
        for gi, block_ids in per_grid.items():
            g = block_plan.grids[gi]
            gslice = slice(g.channel_offset, g.channel_offset + g.n_channels)
            v = window_view(np.ascontiguousarray(X[:, gslice]), window_plan)  # (W, G, L)
            gram = v @ v.transpose(0, 2, 1)  # (W, G, G) = X^T X per window
            local = idx[block_ids] - g.channel_offset  # (n_bg, K)
            covs = gram[:, local[:, :, None], local[:, None, :]] / L  # (W, n_bg, K, K)
            ev = jacobi_eigvals(covs)
            omega_vals[:, block_ids] = spectral_complexity(ev)

    values = np.empty((window_plan.count, 3 * n_b))
    values[:, 0::3] = sig
    values[:, 1::3] = phi_vals
    values[:, 2::3] = omega_vals
    columns = tuple(
        mld_column_name(b, d) for b in range(n_b) for d in DESCRIPTOR_NAMES
    )
    return FeatureTensor(values=values, columns=columns)
