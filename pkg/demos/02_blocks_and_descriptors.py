"""Block fields and the three spatial descriptors.

Builds a tiny two-grid recording in which one localized patch carries a
strong correlated burst, then walks the block plan and prints sigma (field
strength), phi (variation rate, Hz), and omega (spatial complexity) for a
few blocks so the roles of the three numbers are visible.
"""

import numpy as np

from emgdecode import (
    default_grids,
    extract_mld_bfm,
    mld_triple,
    plan_blocks,
    plan_windows,
    slice_segment,
)
from emgdecode.signal_core import SignalMatrix

FS = 2052.52
rng = np.random.default_rng(0)

grids = default_grids()
n = int(1.0 * FS)
data = 0.05 * rng.standard_normal((n, 128))

# a correlated 80 Hz burst under a 2x2 patch of the EDC grid (rows 2-3, cols 5-6)
t = np.arange(n) / FS
burst = np.sin(2 * np.pi * 80.0 * t) * np.exp(-((t - 0.5) ** 2) / 0.02)
for r, c in ((2, 5), (2, 6), (3, 5), (3, 6)):
    data[:, grids[0].channel_index(r, c)] += burst

x = SignalMatrix(data=data, fs=FS, grids=grids)
bp = plan_blocks(x.grids, 2, 1)
wp = plan_windows(x.n_samples, 308, 103)
print(f"{bp.n_blocks} blocks of {bp.channels_per_block} channels, {wp.count} windows")

w_mid = wp.count // 2  # window over the burst peak
print(f"\ndescriptors at window {w_mid} (burst peak):")
print("  block  grid  origin   sigma     phi(Hz)  omega")
for b in (0, 12, 20, 48, 60):
    seg = slice_segment(x, bp, wp, w_mid, b)
    trip = mld_triple(seg, x.fs)
    g = bp.grids[bp.grid_index[b]]
    print(
        f"  {b:5d}  {g.name:4s}  {bp.origins[b]}   {trip.sigma:7.4f}  {trip.phi:7.1f}  {trip.omega:5.2f}"
    )

tensor = extract_mld_bfm(x, bp, wp)
sig = tensor.values[w_mid, 0::3]
hot = int(np.argmax(sig))
print(f"\nstrongest block at the peak: {hot} origin={bp.origins[hot]} (the planted patch)")
print(f"its omega: {tensor.values[w_mid, 3 * hot + 2]:.2f}  (correlated burst -> near 1)")
quiet = tensor.values[w_mid, 2::3]
print(f"median omega over noise-only blocks: {np.median(quiet):.2f} (uncorrelated -> near K=4)")
