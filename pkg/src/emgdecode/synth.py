"""Deterministic synthetic HD sEMG and finger-kinematics generator.

Eight movement tasks mirror the recording protocol: each task drives a
subset of the five fingers with a raised-cosine angle profile starting fully
extended, while the inactive fingers carry a small low-frequency coupling
wiggle. Muscle activity is modeled as amplitude-modulated band-limited noise
sources with Gaussian spatial footprints on the two electrode grids: flexor
sources follow the normalized angle, extensor sources its complement.
Sensor noise and a 60 Hz powerline component are added on top.

The model is intentionally simple: windowed RMS is close to linear in the
joint angles, so every regressor in the pool can learn the mapping and
pipeline-level checks have meaningful headroom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .signal_core import (
    FINGER_LABELS,
    FilterSpec,
    GridLayout,
    SignalMatrix,
    Trajectory,
    apply_filtfilt,
    default_grids,
    design_butterworth,
)

# Active fingers per task, indexing (thumb, index, middle, ring, little):
# index F/E; middle F/E; ring+little F/E; thumb opposition; thumb-index
# pinch; thumb-middle pinch; tripod; five-finger grasp.
DEFAULT_TASKS: tuple[tuple[int, ...], ...] = (
    (1,),
    (2,),
    (3, 4),
    (0,),
    (0, 1),
    (0, 2),
    (0, 1, 2),
    (0, 1, 2, 3, 4),
)

# (row, col) source centers per finger, one entry per grid, chosen in the
# proximal-lateral quadrant of each array.
DEFAULT_CENTERS_EDC: tuple[tuple[float, float], ...] = (
    (1.0, 5.5),
    (1.5, 4.0),
    (2.5, 5.5),
    (3.5, 4.5),
    (4.5, 5.5),
)
DEFAULT_CENTERS_FDS: tuple[tuple[float, float], ...] = (
    (2.0, 6.0),
    (2.5, 4.5),
    (3.5, 6.0),
    (4.5, 5.0),
    (5.5, 6.0),
)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    fs: float = 2052.52
    fs_kin: float = 100.0
    movement_hz: float = 0.5
    duration_s: float = 45.0
    amplitude_deg: float = 90.0
    spread: float = 1.2
    noise: float = 1.0
    powerline: float = 0.5
    powerline_hz: float = 60.0
    coupling: float = 0.02
    effort: float = 2.0
    effort_spread: float = 6.0
    carrier_band: tuple[float, float] = (20.0, 450.0)
    tasks: tuple[tuple[int, ...], ...] = DEFAULT_TASKS
    centers_edc: tuple[tuple[float, float], ...] = DEFAULT_CENTERS_EDC
    centers_fds: tuple[tuple[float, float], ...] = DEFAULT_CENTERS_FDS

    def __post_init__(self):
        if self.noise < 0 or self.powerline < 0 or self.coupling < 0 or self.effort < 0:
            raise ValueError("amplitudes must be nonnegative")
        for centers in (self.centers_edc, self.centers_fds):
            for r, c in centers:
                if not (0 <= r <= 7 and 0 <= c <= 7):
                    raise ValueError("source centers must lie within the 8x8 grid")

    def to_jsonable(self) -> dict:
        return {
            "seed": self.seed,
            "fs": self.fs,
            "fs_kin": self.fs_kin,
            "movement_hz": self.movement_hz,
            "duration_s": self.duration_s,
            "amplitude_deg": self.amplitude_deg,
            "spread": self.spread,
            "noise": self.noise,
            "powerline": self.powerline,
            "powerline_hz": self.powerline_hz,
            "coupling": self.coupling,
            "effort": self.effort,
            "effort_spread": self.effort_spread,
            "carrier_band": list(self.carrier_band),
            "tasks": [list(t) for t in self.tasks],
            "centers_edc": [list(c) for c in self.centers_edc],
            "centers_fds": [list(c) for c in self.centers_fds],
        }


def _task_rng(cfg: SynthConfig, task_index: int) -> np.random.Generator:
    # per-task generator: deterministic regardless of generation order
    return np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(task_index,)))


def _footprint(grid: GridLayout, center: tuple[float, float], spread: float) -> np.ndarray:
    rows, cols = np.divmod(np.arange(grid.n_channels), grid.n_cols)
    d2 = (rows - center[0]) ** 2 + (cols - center[1]) ** 2
    return np.exp(-d2 / (2.0 * spread * spread))


def _angle_params(cfg: SynthConfig, rng: np.random.Generator, active: Sequence[int]):
    """Per-finger closures come down to a few drawn numbers: inactive fingers
    get three low-frequency sinusoids (< 1.5 Hz, so angle traces stay
    band-limited below 2 Hz)."""
    params = []
    for d in range(len(FINGER_LABELS)):
        freqs = rng.uniform(0.1, 1.2, size=3)
        phases = rng.uniform(0.0, 2.0 * math.pi, size=3)
        params.append((d in active, freqs, phases))
    return params


def _angles_at(cfg: SynthConfig, params, t: np.ndarray) -> np.ndarray:
    out = np.empty((t.shape[0], len(FINGER_LABELS)))
    amp = cfg.amplitude_deg
    for d, (is_active, freqs, phases) in enumerate(params):
        if is_active:
            out[:, d] = amp * (1.0 - np.cos(2.0 * math.pi * cfg.movement_hz * t)) / 2.0
        else:
            wiggle = np.zeros_like(t)
            for f, ph in zip(freqs, phases):
                wiggle += np.sin(2.0 * math.pi * f * t + ph)
            out[:, d] = (cfg.coupling * amp / 3.0) * wiggle
    return out


def generate_task(cfg: SynthConfig, task_index: int) -> tuple[SignalMatrix, Trajectory]:
    """One task's synchronized recording pair (HD sEMG, joint angles)."""
    active = cfg.tasks[task_index]
    rng = _task_rng(cfg, task_index)
    params = _angle_params(cfg, rng, active)

    n_kin = int(round(cfg.duration_s * cfg.fs_kin))
    t_kin = np.arange(n_kin) / cfg.fs_kin
    traj = Trajectory(angles=_angles_at(cfg, params, t_kin), fs_kin=cfg.fs_kin)

    n_sig = int(round(cfg.duration_s * cfg.fs))
    t_sig = np.arange(n_sig) / cfg.fs
    theta = _angles_at(cfg, params, t_sig) / cfg.amplitude_deg  # normalized

    grids = default_grids()
    carrier_coeffs = design_butterworth(
        FilterSpec(kind="bandpass", order=4, band=cfg.carrier_band), fs=cfg.fs
    )
    data = np.zeros((n_sig, grids[0].n_channels + grids[1].n_channels))
    centers = (cfg.centers_edc, cfg.centers_fds)
    for d in range(len(FINGER_LABELS)):
        for gi, grid in enumerate(grids):
            carrier = apply_filtfilt(carrier_coeffs, rng.standard_normal(n_sig))
            carrier /= carrier.std()
            envelope = (1.0 - theta[:, d]) if grid.name == "EDC" else theta[:, d]
            source = envelope * carrier
            foot = _footprint(grid, centers[gi][d], cfg.spread)
            sl = slice(grid.channel_offset, grid.channel_offset + grid.n_channels)
            data[:, sl] += source[:, None] * foot[None, :]
    if cfg.effort > 0:
        # shared common-drive source: broad footprint, tracks overall grip,
        # dominates the RMS variance the way gross contraction intensity does
        grip = theta.mean(axis=1)
        for grid in grids:
            carrier = apply_filtfilt(carrier_coeffs, rng.standard_normal(n_sig))
            carrier /= carrier.std()
            envelope = (1.0 - grip) if grid.name == "EDC" else grip
            foot = _footprint(grid, (3.5, 3.5), cfg.effort_spread)
            sl = slice(grid.channel_offset, grid.channel_offset + grid.n_channels)
            data[:, sl] += (cfg.effort * envelope * carrier)[:, None] * foot[None, :]
    if cfg.noise > 0:
        data += cfg.noise * rng.standard_normal(data.shape)
    if cfg.powerline > 0:
        phase = rng.uniform(0.0, 2.0 * math.pi)
        data += cfg.powerline * np.sin(2.0 * math.pi * cfg.powerline_hz * t_sig + phase)[:, None]
    return SignalMatrix(data=data, fs=cfg.fs, grids=grids), traj


def iter_tasks(cfg: SynthConfig) -> Iterator[tuple[SignalMatrix, Trajectory]]:
    """Lazily generate all tasks (one raw recording in memory at a time)."""
    for i in range(len(cfg.tasks)):
        yield generate_task(cfg, i)


def generate_tasks(cfg: SynthConfig) -> list[tuple[SignalMatrix, Trajectory]]:
    return list(iter_tasks(cfg))
