"""The four regressors on one small decoding problem.

Features are targets mixed through a random linear map plus noise, so every
model has something to learn; grid-search five-fold CV picks hyperparameters
exactly as the pipeline does.
"""

import time

import numpy as np

from emgdecode import RegressorSpec, ScalerPair, grid_search_cv, r2_vw

rng = np.random.default_rng(5)
n, f, d = 900, 12, 3
t = np.arange(n) / 10.0
phases = rng.uniform(0, 2 * np.pi, d)
freqs = rng.uniform(0.05, 0.15, d)
Y = 25 * np.sin(2 * np.pi * freqs * t[:, None] + phases) + 40  # degree-ish scale
X = Y @ rng.standard_normal((d, f)) + 0.8 * rng.standard_normal((n, f))

half = n // 2
perm = rng.permutation(half)
x_tr, y_tr = X[:half][perm], Y[:half][perm]
x_te, y_te = X[half:], Y[half:]

scaler = ScalerPair.fit(x_tr, y_tr)
xs, ys = scaler.transform_inputs(x_tr), scaler.transform_outputs(y_tr)
xt = scaler.transform_inputs(x_te)

print("model   r2_vw   chosen hyperparameters          fit time")
for kind in ("ridge", "lasso", "knn", "mlp"):
    t0 = time.perf_counter()
    fitted = grid_search_cv(RegressorSpec(kind, seed=0), xs, ys)
    pred = scaler.inverse_outputs(fitted.predict(xt))
    score = r2_vw(y_te, pred)
    print(f"{kind:6s}  {score:.4f}  {str(fitted.hyperparams):30s}  {time.perf_counter() - t0:5.1f}s")
