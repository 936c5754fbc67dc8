"""Multi-output regressors (Ridge, Lasso, KNN, MLP), input/output scaling,
time-windowed sequence construction, grid-search cross-validation, and
prediction post-filtering.

All regressors assume standardized inputs and normalized outputs; the
output normalization is one shared affine map across all outputs so the
amplitude relationships between fingers are preserved.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
import numpy as np
import scipy.linalg

from .errors import (
    InvalidInputError,
    InvalidSpecError,
    TrainingDivergedError,
)
from .metrics import r2_vw
from .signal_core import FilterSpec, apply_filtfilt, design_butterworth


@dataclass(frozen=True)
class ScalerPair:
    """Per-feature input standardization plus one pooled affine transform
    shared by every output column."""

    in_mean: np.ndarray
    in_std: np.ndarray
    out_mean: float
    out_std: float
    constant_features: tuple[int, ...]

    @classmethod
    def fit(cls, X: np.ndarray, Y: np.ndarray) -> "ScalerPair":
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        in_mean = X.mean(axis=0)
        in_std = X.std(axis=0)
        constant = tuple(int(i) for i in np.flatnonzero(in_std == 0.0))
        in_std = np.where(in_std == 0.0, 1.0, in_std)
        out_std = float(Y.std())
        return cls(
            in_mean=in_mean,
            in_std=in_std,
            out_mean=float(Y.mean()),
            out_std=out_std if out_std > 0.0 else 1.0,
            constant_features=constant,
        )

    def transform_inputs(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.in_mean) / self.in_std

    def transform_outputs(self, Y) -> np.ndarray:
        return (np.asarray(Y, dtype=np.float64) - self.out_mean) / self.out_std

    def inverse_outputs(self, Y) -> np.ndarray:
        return np.asarray(Y, dtype=np.float64) * self.out_std + self.out_mean


@dataclass(frozen=True)
class SequencePlan:
    """Sliding sequences of ``n_win`` consecutive feature/target rows,
    flattened time-major; the window advances by one row."""

    n_win: int
    n_feat: int
    n_out: int

    def __post_init__(self):
        if self.n_win < 1:
            raise InvalidSpecError("n_win must be >= 1")


def build_sequences(features, targets, plan: SequencePlan) -> tuple[np.ndarray, np.ndarray]:
    """Sliding-window sequences (stride 1). Must be applied to contiguous
    rows BEFORE any shuffling; row count shrinks to rows - n_win + 1."""
    X = np.asarray(getattr(features, "values", features), dtype=np.float64)
    Y = np.asarray(getattr(targets, "values", targets), dtype=np.float64)
    if X.shape[0] != Y.shape[0]:
        raise InvalidInputError("features and targets must be row-aligned")
    if X.shape[0] < plan.n_win:
        raise InvalidInputError(
            f"need at least n_win={plan.n_win} rows, got {X.shape[0]}"
        )
    if plan.n_win == 1:
        return X.copy(), Y.copy()
    n = X.shape[0] - plan.n_win + 1
    xv = np.lib.stride_tricks.sliding_window_view(X, plan.n_win, axis=0)
    yv = np.lib.stride_tricks.sliding_window_view(Y, plan.n_win, axis=0)
    x_seq = xv.transpose(0, 2, 1).reshape(n, plan.n_win * X.shape[1])
    y_seq = yv.transpose(0, 2, 1).reshape(n, plan.n_win * Y.shape[1])
    return np.ascontiguousarray(x_seq), np.ascontiguousarray(y_seq)


def reconstruct_series(pred_seq, plan: SequencePlan) -> np.ndarray:
    """Time series from sequence predictions: the last ``n_out`` entries of
    each prediction row, in sequence order."""
    P = np.asarray(pred_seq, dtype=np.float64)
    return P[:, -plan.n_out :].copy()


@dataclass(frozen=True)
class LinearModel:
    kind: str
    weights: np.ndarray
    intercept: np.ndarray
    alpha: float

    def predict(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.intercept

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "weights": self.weights.tolist(),
            "intercept": self.intercept.tolist(),
        }


def fit_ridge(X, Y, alpha: float) -> LinearModel:
    """Closed-form multi-output ridge: W = (X^T X + alpha I)^-1 X^T Y on
    centered data, with an unpenalized intercept recovered from the means.

    The shared (pooled) output scaler leaves per-output mean offsets in
    place, so the intercept cannot come from scaling alone."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if not (np.isfinite(X).all() and np.isfinite(Y).all()):
        raise InvalidInputError("ridge requires finite inputs")
    if Y.ndim == 1:
        Y = Y[:, None]
    x_mean = X.mean(axis=0)
    y_mean = Y.mean(axis=0)
    Xc = X - x_mean
    gram = Xc.T @ Xc + alpha * np.eye(X.shape[1])
    rhs = Xc.T @ (Y - y_mean)
    try:
        W = scipy.linalg.solve(gram, rhs, assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        W = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    return LinearModel(kind="ridge", weights=W, intercept=y_mean - x_mean @ W, alpha=float(alpha))


def _soft(x: float, lam: float) -> float:
    return math.copysign(max(abs(x) - lam, 0.0), x)


def fit_lasso(X, Y, alpha: float, max_iter: int = 10000, tol: float = 1e-3) -> LinearModel:
    """Cyclic coordinate descent per output on the mean-squared objective
    (1/2n)||y - Xw||^2 + alpha*||w||_1 with soft-thresholding updates, on
    centered data with an unpenalized intercept.

    The mean-based normalization keeps ``alpha`` comparable across dataset
    sizes. Stops when the largest coefficient update in a sweep drops below
    tol * max|w|.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    x_mean = X.mean(axis=0)
    y_mean = Y.mean(axis=0)
    Xc = X - x_mean
    Yc = Y - y_mean
    n, f = Xc.shape
    z = (Xc * Xc).mean(axis=0)
    W = np.zeros((f, Y.shape[1]))
    for d in range(Y.shape[1]):
        y = Yc[:, d]
        w = W[:, d]
        resid = y.copy()
        for _ in range(max_iter):
            max_delta = 0.0
            for j in range(f):
                if z[j] == 0.0:
                    continue
                old = w[j]
                if old != 0.0:
                    resid += old * Xc[:, j]
                rho = float(Xc[:, j] @ resid) / n
                new = _soft(rho, alpha) / z[j]
                if new != 0.0:
                    resid -= new * Xc[:, j]
                w[j] = new
                max_delta = max(max_delta, abs(new - old))
            if max_delta <= tol * float(np.abs(w).max(initial=0.0)):
                break
    return LinearModel(kind="lasso", weights=W, intercept=y_mean - x_mean @ W, alpha=float(alpha))


@dataclass(frozen=True)
class KNNModel:
    x_train: np.ndarray
    y_train: np.ndarray
    k: int
    weights: str

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((X.shape[0], self.y_train.shape[1]))
        # chunked pairwise distances to bound memory
        chunk = max(1, int(2e6 // max(self.x_train.shape[0], 1)))
        for s in range(0, X.shape[0], chunk):
            q = X[s : s + chunk]
            d2 = ((q[:, None, :] - self.x_train[None, :, :]) ** 2).sum(axis=2)
            order = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            for i in range(q.shape[0]):
                idx = order[i]
                dist = np.sqrt(d2[i, idx])
                targets = self.y_train[idx]
                if self.weights == "uniform":
                    out[s + i] = targets.mean(axis=0)
                else:
                    exact = dist == 0.0
                    if exact.any():
                        out[s + i] = targets[exact].mean(axis=0)
                    else:
                        w = 1.0 / dist
                        out[s + i] = (w[:, None] * targets).sum(axis=0) / w.sum()
        return out

    def to_jsonable(self) -> dict:
        return {
            "kind": "knn",
            "k": self.k,
            "weights": self.weights,
            "x_train": self.x_train.tolist(),
            "y_train": self.y_train.tolist(),
        }


def fit_knn(X, Y, k: int, weights: str = "uniform") -> KNNModel:
    """Store the training set; prediction averages the k nearest neighbors
    (1/d weights with an exact-match short-circuit when requested)."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if weights not in ("uniform", "distance"):
        raise InvalidSpecError(f"unknown KNN weighting {weights!r}")
    if not (1 <= k <= X.shape[0]):
        raise InvalidSpecError(f"k={k} must lie in [1, {X.shape[0]}] training rows")
    return KNNModel(x_train=X.copy(), y_train=Y.copy(), k=k, weights=weights)


def _mlp_forward_backward(params: dict, X: np.ndarray, Y: np.ndarray):
    """Loss (mean squared error over all entries) and analytic gradients for
    a one-hidden-layer ReLU network with linear outputs."""
    W1, b1, W2, b2 = params["W1"], params["b1"], params["W2"], params["b2"]
    Z = X @ W1 + b1
    Hid = np.maximum(Z, 0.0)
    P = Hid @ W2 + b2
    err = P - Y
    loss = float((err * err).mean())
    g = 2.0 * err / err.size
    gW2 = Hid.T @ g
    gb2 = g.sum(axis=0)
    gH = g @ W2.T
    gH[Z <= 0.0] = 0.0
    gW1 = X.T @ gH
    gb1 = gH.sum(axis=0)
    return loss, {"W1": gW1, "b1": gb1, "W2": gW2, "b2": gb2}


def _mlp_init(n_feat: int, hidden: int, n_out: int, rng: np.random.Generator) -> dict:
    # uniform init scaled by fan-in
    lim1 = 1.0 / math.sqrt(n_feat)
    lim2 = 1.0 / math.sqrt(hidden)
    return {
        "W1": rng.uniform(-lim1, lim1, size=(n_feat, hidden)),
        "b1": np.zeros(hidden),
        "W2": rng.uniform(-lim2, lim2, size=(hidden, n_out)),
        "b2": np.zeros(n_out),
    }


@dataclass(frozen=True)
class MLPModel:
    params: dict
    hidden: int
    lr: float
    n_epochs: int
    history: tuple[float, ...]

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        Hid = np.maximum(X @ self.params["W1"] + self.params["b1"], 0.0)
        return Hid @ self.params["W2"] + self.params["b2"]

    def to_jsonable(self) -> dict:
        return {
            "kind": "mlp",
            "hidden": self.hidden,
            "lr": self.lr,
            "n_epochs": self.n_epochs,
            "params": {k: v.tolist() for k, v in self.params.items()},
        }


def fit_mlp(
    X,
    Y,
    hidden: int,
    lr: float,
    max_iter: int = 200,
    patience: int = 20,
    seed: int = 0,
    batch_size: int = 200,
) -> MLPModel:
    """One hidden ReLU layer trained with adaptive-moment gradient descent on
    MSE, mini-batches of ``batch_size``, early stopping on a 10% validation
    split of the (already shuffled) training data.

    ``lr`` is the initial step size; it is divided by 5 whenever the epoch
    training loss fails to improve by 0.1% for 10 consecutive epochs, so a
    genuine step-size floor triggers annealing but steady descent never
    does."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    n = X.shape[0]
    n_val = max(1, int(round(0.1 * n)))
    if n - n_val < 1:
        raise InvalidInputError("not enough rows to hold out a validation split")
    x_tr, y_tr = X[: n - n_val], Y[: n - n_val]
    x_val, y_val = X[n - n_val :], Y[n - n_val :]

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    params = _mlp_init(X.shape[1], hidden, Y.shape[1], rng)
    m = {k: np.zeros_like(p) for k, p in params.items()}
    v = {k: np.zeros_like(p) for k, p in params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    def val_loss() -> float:
        pred = np.maximum(x_val @ params["W1"] + params["b1"], 0.0) @ params["W2"] + params["b2"]
        return float(((pred - y_val) ** 2).mean())

    best = math.inf
    best_params = {k: p.copy() for k, p in params.items()}
    stall = 0
    history = []
    n_tr = x_tr.shape[0]
    epochs_run = 0
    lr_now = lr
    best_train = math.inf
    lr_stall = 0
    for _ in range(max_iter):
        perm = rng.permutation(n_tr)
        epoch_losses = []
        for s in range(0, n_tr, batch_size):
            idx = perm[s : s + batch_size]
            loss, grads = _mlp_forward_backward(params, x_tr[idx], y_tr[idx])
            if not math.isfinite(loss):
                raise TrainingDivergedError("non-finite training loss")
            epoch_losses.append(loss)
            step += 1
            for key in params:
                m[key] = beta1 * m[key] + (1 - beta1) * grads[key]
                v[key] = beta2 * v[key] + (1 - beta2) * grads[key] ** 2
                mhat = m[key] / (1 - beta1**step)
                vhat = v[key] / (1 - beta2**step)
                params[key] = params[key] - lr_now * mhat / (np.sqrt(vhat) + eps)
        epochs_run += 1
        train_loss = float(np.mean(epoch_losses))
        if not math.isfinite(best_train) or train_loss < best_train * (1.0 - 1e-3):
            best_train = train_loss
            lr_stall = 0
        else:
            lr_stall += 1
            if lr_stall >= 10:
                lr_now /= 5.0
                lr_stall = 0
        vl = val_loss()
        if not math.isfinite(vl):
            raise TrainingDivergedError("non-finite validation loss")
        history.append(vl)
        if vl < best - 1e-12:
            best = vl
            best_params = {k: p.copy() for k, p in params.items()}
            stall = 0
        else:
            stall += 1
            if stall >= patience:
                break
    return MLPModel(
        params=best_params,
        hidden=hidden,
        lr=lr,
        n_epochs=epochs_run,
        history=tuple(history),
    )


DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "mlp": {"hidden": [10, 15, 20], "lr": [0.01, 0.1]},
    "ridge": {"alpha": [0.001, 0.01, 0.1, 1.0, 10.0]},
    "lasso": {"alpha": [0.01, 0.1, 1.0, 10.0]},
    "knn": {"k": [10, 30, 50], "weights": ["uniform", "distance"]},
}


@dataclass(frozen=True)
class RegressorSpec:
    """Regressor kind plus hyperparameter grid (defaults above) and seed."""

    kind: str
    grid: dict | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DEFAULT_GRIDS:
            raise InvalidSpecError(f"unknown regressor kind {self.kind!r}")
        if self.grid is not None:
            unknown = set(self.grid) - set(DEFAULT_GRIDS[self.kind])
            if unknown:
                raise InvalidSpecError(f"unknown grid keys for {self.kind}: {sorted(unknown)}")

    def grid_points(self) -> list[dict]:
        grid = {**DEFAULT_GRIDS[self.kind], **(self.grid or {})}
        keys = list(grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def fit_regressor(kind: str, X, Y, hyper: dict, seed: int = 0):
    if kind == "ridge":
        return fit_ridge(X, Y, alpha=hyper["alpha"])
    if kind == "lasso":
        return fit_lasso(X, Y, alpha=hyper["alpha"])
    if kind == "knn":
        return fit_knn(X, Y, k=hyper["k"], weights=hyper["weights"])
    if kind == "mlp":
        return fit_mlp(X, Y, hidden=hyper["hidden"], lr=hyper["lr"], seed=seed)
    raise InvalidSpecError(f"unknown regressor kind {kind!r}")


@dataclass(frozen=True)
class FittedRegressor:
    kind: str
    model: object
    hyperparams: dict
    fold_scores: tuple[tuple[float, ...], ...]
    mean_scores: tuple[float, ...]
    grid_points: tuple[dict, ...] = field(default=())

    def predict(self, X) -> np.ndarray:
        return self.model.predict(X)

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "hyperparams": self.hyperparams,
            "grid_points": list(self.grid_points),
            "fold_scores": [list(f) for f in self.fold_scores],
            "mean_scores": list(self.mean_scores),
            "model": self.model.to_jsonable(),
        }


def _fold_slices(n: int, folds: int) -> list[slice]:
    bounds = [int(math.floor(i * n / folds)) for i in range(folds + 1)]
    return [slice(bounds[i], bounds[i + 1]) for i in range(folds)]


def grid_search_cv(spec: RegressorSpec, X, Y, folds: int = 5) -> FittedRegressor:
    """Grid search over the spec's hyperparameters with contiguous k-fold
    cross-validation on the (pre-shuffled) training rows; variance-weighted
    R^2 is the selection criterion and the winner is refit on all rows.

    A grid point whose fit fails scores -inf; ties go to the first-listed
    point. Per-fit seeds are derived from the spec seed so results do not
    depend on evaluation order.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    n = X.shape[0]
    if n < folds:
        raise InvalidInputError(f"need at least {folds} rows for {folds}-fold CV")
    points = spec.grid_points()
    fold_slc = _fold_slices(n, folds)
    all_fold_scores: list[tuple[float, ...]] = []
    mean_scores: list[float] = []
    for gi, hyper in enumerate(points):
        scores = []
        for fi, slc in enumerate(fold_slc):
            mask = np.ones(n, dtype=bool)
            mask[slc] = False
            try:
                seed = _derived_seed(spec.seed, gi, fi)
                model = fit_regressor(spec.kind, X[mask], Y[mask], hyper, seed=seed)
                scores.append(r2_vw(Y[slc], model.predict(X[slc])))
            except Exception:
                scores.append(-math.inf)
        all_fold_scores.append(tuple(scores))
        mean_scores.append(float(np.mean(scores)))
    best = int(np.argmax(mean_scores))
    if not math.isfinite(mean_scores[best]):
        raise TrainingDivergedError("every grid point failed during cross-validation")
    final_seed = _derived_seed(spec.seed, best, folds)
    model = fit_regressor(spec.kind, X, Y, points[best], seed=final_seed)
    return FittedRegressor(
        kind=spec.kind,
        model=model,
        hyperparams=points[best],
        fold_scores=tuple(all_fold_scores),
        mean_scores=tuple(mean_scores),
        grid_points=tuple(points),
    )


def _derived_seed(base: int, grid_index: int, fold_index: int) -> int:
    return int(
        np.random.SeedSequence(base, spawn_key=(grid_index, fold_index)).generate_state(1)[0]
    )


def postprocess(
    pred: np.ndarray, pred_rate: float, cutoff_hz: float = 5.0, order: int = 4
) -> tuple[np.ndarray, bool]:
    """Zero-phase low-pass of predicted trajectories (test set, in temporal
    order). Returns (filtered, bypassed); the filter is bypassed when the
    cutoff reaches the prediction Nyquist (cutoff >= 0.499 * pred_rate)."""
    pred = np.asarray(pred, dtype=np.float64)
    if cutoff_hz >= 0.499 * pred_rate:
        return pred.copy(), True
    coeffs = design_butterworth(
        FilterSpec(kind="lowpass", order=order, band=cutoff_hz), fs=pred_rate
    )
    return apply_filtfilt(coeffs, pred, axis=0), False
