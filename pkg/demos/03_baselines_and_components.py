"""Baseline feature sets and plateau-based component selection.

Extracts RMS and MAV+WL features from a short synthetic task, then runs the
variance-explained curve for PCA and NMF on the training half and lets the
plateau rule pick the component count.
"""

import numpy as np

from emgdecode import (
    SynthConfig,
    extract_mav_wl,
    extract_rms,
    generate_task,
    select_components,
)
from emgdecode.blocks import plan_windows_seconds
from emgdecode.signal_core import crop

cfg = SynthConfig(seed=42, duration_s=10.0)
x, traj = generate_task(cfg, 7)  # five-finger grasp
x = crop(x, 0.5, 9.5)
wp = plan_windows_seconds(x.n_samples, x.fs, 0.150, 0.050)

rms = extract_rms(x, wp)
mavwl = extract_mav_wl(x, wp)
print(f"RMS tensor    : {rms.values.shape} columns like {rms.columns[0]}")
print(f"MAV+WL tensor : {mavwl.values.shape} columns like {mavwl.columns[0]}, {mavwl.columns[128]}")

train = rms.values[: rms.n_windows // 2]
for kind in ("pca", "nmf"):
    sel = select_components(train, kind, seed=0)
    curve = ", ".join(f"{v:.4f}" for v in sel.curve[:8])
    print(f"\n{kind}: N* = {sel.n_components} (plateau found: {sel.plateau_found})")
    print(f"  variance-explained curve head: {curve} ...")
