"""Decoding metrics: per-output R^2, RMSE, MAE, Pearson r, and their
variance-weighted aggregates (weights are the target variances)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


def _pair(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if yhat.ndim == 1:
        yhat = yhat[:, None]
    if y.shape != yhat.shape:
        raise InvalidInputError(f"shape mismatch: {y.shape} vs {yhat.shape}")
    if y.shape[0] < 2:
        raise InvalidInputError("metrics need at least two samples")
    return y, yhat


def r2_pred(y, yhat) -> float:
    """Coefficient of determination for one output series."""
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    sst = float(((y - y.mean()) ** 2).sum())
    if sst == 0.0:
        raise InvalidInputError("R^2 undefined for a zero-variance target")
    sse = float(((y - yhat) ** 2).sum())
    return 1.0 - sse / sst


def rmse(y, yhat) -> float:
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def mae(y, yhat) -> float:
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    return float(np.mean(np.abs(y - yhat)))


def pearson(y, yhat) -> float:
    """Pearson correlation; NaN (missing) when either series has no variance."""
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    yc = y - y.mean()
    hc = yhat - yhat.mean()
    denom = np.sqrt((yc**2).sum()) * np.sqrt((hc**2).sum())
    if denom == 0.0:
        return float("nan")
    return float((yc * hc).sum() / denom)


def variance_weighted(values, weights) -> float:
    """Aggregate per-output metric values with target-variance weights.
    NaN values (undefined metrics) are excluded together with their weight."""
    values = np.asarray(values, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    mask = np.isfinite(values) & (weights > 0.0)
    if not mask.any():
        return float("nan")
    return float((values[mask] * weights[mask]).sum() / weights[mask].sum())


def r2_vw(Y, Yhat) -> float:
    """Variance-weighted R^2 across outputs; zero-variance outputs are
    excluded from the aggregate with a warning."""
    Y, Yhat = _pair(Y, Yhat)
    weights = Y.var(axis=0)
    if (weights == 0.0).any():
        warnings.warn("zero-variance output excluded from variance-weighted R^2")
    scores = np.array(
        [r2_pred(Y[:, d], Yhat[:, d]) if weights[d] > 0 else np.nan for d in range(Y.shape[1])]
    )
    return variance_weighted(scores, weights)


@dataclass(frozen=True)
class MetricsReport:
    """Per-output metrics plus variance-weighted aggregates."""

    labels: tuple[str, ...]
    r2: tuple[float, ...]
    rmse: tuple[float, ...]
    mae: tuple[float, ...]
    pearson: tuple[float, ...]
    weights: tuple[float, ...]
    r2_vw: float
    rmse_vw: float
    mae_vw: float
    r_vw: float

    def to_dict(self) -> dict:
        per_output = {
            label: {
                "r2": self.r2[d],
                "rmse": self.rmse[d],
                "mae": self.mae[d],
                "pearson": self.pearson[d],
                "variance": self.weights[d],
            }
            for d, label in enumerate(self.labels)
        }
        return {
            "r2_vw": self.r2_vw,
            "rmse_vw": self.rmse_vw,
            "mae_vw": self.mae_vw,
            "r_vw": self.r_vw,
            "per_output": per_output,
        }


def compute_metrics(Y, Yhat, labels=None) -> MetricsReport:
    """Full report for a (samples, outputs) prediction against its target."""
    Y, Yhat = _pair(Y, Yhat)
    n_out = Y.shape[1]
    if labels is None:
        labels = tuple(f"out{d}" for d in range(n_out))
    weights = Y.var(axis=0)
    r2s, rmses, maes, rs = [], [], [], []
    for d in range(n_out):
        rmses.append(rmse(Y[:, d], Yhat[:, d]))
        maes.append(mae(Y[:, d], Yhat[:, d]))
        rs.append(pearson(Y[:, d], Yhat[:, d]))
        r2s.append(r2_pred(Y[:, d], Yhat[:, d]) if weights[d] > 0 else float("nan"))
    if (weights == 0.0).any():
        warnings.warn("zero-variance output excluded from variance-weighted aggregates")
    return MetricsReport(
        labels=tuple(labels),
        r2=tuple(r2s),
        rmse=tuple(rmses),
        mae=tuple(maes),
        pearson=tuple(rs),
        weights=tuple(float(w) for w in weights),
        r2_vw=variance_weighted(r2s, weights),
        rmse_vw=variance_weighted(rmses, weights),
        mae_vw=variance_weighted(maes, weights),
        r_vw=variance_weighted(rs, weights),
    )
