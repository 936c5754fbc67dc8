"""Filter design and zero-phase application.

Designs the preprocessing chain used on raw recordings (10-500 Hz bandpass
plus a 60 Hz notch), inspects the frequency responses, and shows that
forward-backward application leaves an in-band sinusoid without phase shift
while wiping out a planted powerline tone.
"""

import numpy as np

from emgdecode import FilterSpec, design_butterworth, frequency_response
from emgdecode.signal_core import apply_filtfilt

FS = 2052.52

bandpass = design_butterworth(FilterSpec("bandpass", order=4, band=(10.0, 500.0)), FS)
notch = design_butterworth(FilterSpec("notch", band=60.0, q=30.0), FS)

print("single-pass magnitude responses")
for f in (1.0, 10.0, 60.0, 100.0, 500.0, 900.0):
    bp, nt = frequency_response(bandpass, [f], FS)[0], frequency_response(notch, [f], FS)[0]
    print(f"  {f:7.1f} Hz   bandpass {bp:6.3f}   notch {nt:6.3f}")

t = np.arange(int(4 * FS)) / FS
clean = np.sin(2 * np.pi * 100.0 * t)
hum = 0.8 * np.sin(2 * np.pi * 60.0 * t + 1.2)
drift = 0.5  # DC offset, far below the 10 Hz edge

x = clean + hum + drift
y = apply_filtfilt(notch, apply_filtfilt(bandpass, x))

core = slice(int(FS), int(3 * FS))
amp = y[core].max()
lags = range(-4, 5)
xc = [float(np.dot(y[core], np.roll(clean, lag)[core])) for lag in lags]
print(f"\nrecovered 100 Hz amplitude : {amp:.4f} (ideal 1.0)")
print(f"cross-correlation peak lag : {list(lags)[int(np.argmax(xc))]} samples (zero phase)")
residual_hum = np.sqrt(np.mean((y[core] - clean[core]) ** 2))
print(f"residual after cleanup     : {residual_hum:.4f} RMS")
