"""Synthetic dataset generator: determinism, decodability, spectra."""

import numpy as np
import pytest

from emgdecode import RunConfig, SynthConfig, generate_task, generate_tasks, run_pipeline
from emgdecode.blocks import plan_windows_seconds, window_sumsq
from emgdecode.synth import DEFAULT_TASKS


class TestStructure:
    def test_eight_tasks_cover_protocol(self):
        assert len(DEFAULT_TASKS) == 8
        assert DEFAULT_TASKS[0] == (1,)  # index flexion/extension
        assert DEFAULT_TASKS[2] == (3, 4)  # ring + little together
        assert DEFAULT_TASKS[7] == (0, 1, 2, 3, 4)  # five-finger grasp
        covered = set()
        for task in DEFAULT_TASKS:
            covered.update(task)
        assert covered == {0, 1, 2, 3, 4}

    def test_shapes_and_rates(self):
        cfg = SynthConfig(seed=0, duration_s=5.0)
        x, traj = generate_task(cfg, 0)
        assert x.n_channels == 128
        assert x.n_samples == int(round(5.0 * cfg.fs))
        assert traj.angles.shape == (500, 5)
        assert traj.labels == ("thumb", "index", "middle", "ring", "little")

    def test_angle_range_of_active_dof(self):
        cfg = SynthConfig(seed=1, duration_s=6.0)
        _, traj = generate_task(cfg, 0)  # index active
        active = traj.angles[:, 1]
        assert active.min() >= -1e-9
        assert active.max() == pytest.approx(cfg.amplitude_deg, rel=1e-3)
        # inactive fingers stay near zero
        assert np.abs(traj.angles[:, 3]).max() <= 0.1 * cfg.amplitude_deg


class TestDeterminism:
    def test_same_seed_bitwise_identical(self):
        cfg = SynthConfig(seed=11, duration_s=3.0)
        x1, t1 = generate_task(cfg, 2)
        x2, t2 = generate_task(cfg, 2)
        assert np.array_equal(x1.data, x2.data)
        assert np.array_equal(t1.angles, t2.angles)

    def test_generation_order_independent(self):
        cfg = SynthConfig(seed=5, duration_s=2.0)
        direct = generate_task(cfg, 3)[0].data
        after_others = generate_tasks(cfg)[3][0].data
        assert np.array_equal(direct, after_others)

    def test_different_seeds_differ(self):
        cfg_a = SynthConfig(seed=1, duration_s=2.0)
        cfg_b = SynthConfig(seed=2, duration_s=2.0)
        assert not np.array_equal(generate_task(cfg_a, 0)[0].data, generate_task(cfg_b, 0)[0].data)


class TestSignalContent:
    def test_rms_tracks_envelope_without_noise(self):
        cfg = SynthConfig(seed=3, duration_s=8.0, noise=0.0, powerline=0.0, effort=0.0)
        x, traj = generate_task(cfg, 0)  # index finger only
        plan = plan_windows_seconds(x.n_samples, x.fs, 0.150, 0.050)
        rms = np.sqrt(window_sumsq(x.data, plan) / plan.length)
        # FDS channel nearest the index source center
        r, c = cfg.centers_fds[1]
        ch = 64 + int(round(r)) * 8 + int(round(c))
        env_times = (plan.starts + plan.length) / x.fs
        env = np.interp(env_times, traj.times, traj.angles[:, 1]) / cfg.amplitude_deg
        rho = np.corrcoef(rms[:, ch], env)[0, 1]
        assert rho >= 0.95

    def test_angles_band_limited(self):
        # Hann window suppresses rectangular-window leakage from the
        # non-integer-period sinusoids; the process itself is < 1.5 Hz
        cfg = SynthConfig(seed=4, duration_s=10.0)
        for task in range(8):
            _, traj = generate_task(cfg, task)
            n = traj.angles.shape[0]
            window = np.hanning(n)
            freqs = np.fft.rfftfreq(n, 1.0 / traj.fs_kin)
            for d in range(5):
                spec = np.abs(np.fft.rfft(traj.angles[:, d] * window)) ** 2
                high = spec[freqs > 2.0].sum()
                assert high <= 0.01 * spec.sum()

    def test_powerline_present_when_requested(self):
        cfg = SynthConfig(seed=6, duration_s=4.0, noise=0.0, powerline=1.0)
        x, _ = generate_task(cfg, 0)
        spec = np.abs(np.fft.rfft(x.data[:, 0])) ** 2
        freqs = np.fft.rfftfreq(x.n_samples, 1.0 / x.fs)
        band = spec[(freqs > 58) & (freqs < 62)].sum()
        assert band >= 0.5 * spec.sum() * 0.01  # clearly visible line


class TestDecodability:
    def test_noise_monotonically_degrades_decoding(self):
        scores = []
        for noise in (0.1, 1.0, 10.0):
            cfg = SynthConfig(seed=21, duration_s=8.0, noise=noise)
            rc = RunConfig(crop_s=(0.5, 7.5), seed=0)
            res = run_pipeline(rc, iter(generate_tasks(cfg)))
            scores.append(res.metrics.r2_vw)
        assert scores[0] > scores[1] > scores[2]

    def test_notch_improves_rmse_with_powerline(self, small_tasks, small_config):
        with_notch = run_pipeline(small_config, iter(small_tasks))
        without = run_pipeline(small_config.replace(notch_hz=None), iter(small_tasks))
        assert with_notch.metrics.rmse_vw < without.metrics.rmse_vw
