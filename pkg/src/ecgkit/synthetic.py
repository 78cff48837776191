"""Seeded synthetic ECG: each beat is a sum of Gaussian bumps for P, Q, R, S and T."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal_model import EcgSignal


@dataclass(frozen=True)
class Wave:
    offset_s: float  # relative to the R peak
    amplitude_mv: float
    width_s: float  # Gaussian standard deviation


@dataclass(frozen=True)
class BeatShape:
    p: Wave = Wave(-0.17, 0.15, 0.020)
    q: Wave = Wave(-0.035, -0.15, 0.008)
    r: Wave = Wave(0.0, 1.0, 0.010)
    s: Wave = Wave(0.035, -0.25, 0.008)
    t: Wave = Wave(0.27, 0.35, 0.040)

    def waves(self) -> tuple[Wave, ...]:
        return (self.p, self.q, self.r, self.s, self.t)


def beat_times(duration_s: float, bpm: float, first_beat_s: float | None = None) -> np.ndarray:
    """R-peak times spaced ``60/bpm`` apart, starting half an interval in by default."""
    rr = 60.0 / bpm
    start = rr / 2 if first_beat_s is None else first_beat_s
    return np.arange(start, duration_s, rr)


def synthetic_ecg(
    duration_s: float = 10.0,
    fs: float = 360.0,
    bpm: float = 75.0,
    shape: BeatShape = BeatShape(),
    first_beat_s: float | None = None,
    snr_db: float | None = None,
    powerline_hz: float | None = None,
    powerline_mv: float = 0.0,
    seed: int = 0,
    record_id: str = "synthetic",
) -> EcgSignal:
    """Build a beat train and optionally add white noise and a powerline sinusoid.

    ``snr_db`` is the ratio of clean-signal power to white-noise power. The
    noise is drawn from ``numpy.random.default_rng(seed)``, so a fixed seed
    gives a bit-identical signal.
    """
    n = int(round(duration_s * fs))
    t = np.arange(n) / fs
    x = np.zeros(n)
    for tb in beat_times(duration_s, bpm, first_beat_s):
        for w in shape.waves():
            if w.amplitude_mv == 0:
                continue
            centre = tb + w.offset_s
            # bumps are negligible beyond 6 sigma
            lo = max(0, int((centre - 6 * w.width_s) * fs))
            hi = min(n, int((centre + 6 * w.width_s) * fs) + 2)
            seg = t[lo:hi]
            x[lo:hi] += w.amplitude_mv * np.exp(-0.5 * ((seg - centre) / w.width_s) ** 2)
    if snr_db is not None:
        rng = np.random.default_rng(seed)
        noise_power = np.mean(x * x) / 10 ** (snr_db / 10)
        x = x + rng.normal(0.0, np.sqrt(noise_power), n)
    if powerline_hz is not None and powerline_mv:
        x = x + powerline_mv * np.sin(2 * np.pi * powerline_hz * t)
    return EcgSignal(x, fs, record_id, "ECG1")


def spike_train(
    duration_s: float,
    fs: float,
    period_s: float,
    fwhm_s: float = 0.020,
    amplitude_mv: float = 1.0,
    first_spike_s: float | None = None,
) -> tuple[EcgSignal, np.ndarray]:
    """Gaussian spikes every ``period_s``; returns the signal and the true centre indices."""
    n = int(round(duration_s * fs))
    start = period_s / 2 if first_spike_s is None else first_spike_s
    centres = np.rint(np.arange(start, duration_s, period_s) * fs).astype(int)
    sigma = fwhm_s / (2 * np.sqrt(2 * np.log(2))) * fs
    idx = np.arange(n)
    x = np.zeros(n)
    for c in centres:
        lo, hi = max(0, int(c - 6 * sigma)), min(n, int(c + 6 * sigma) + 1)
        x[lo:hi] += amplitude_mv * np.exp(-0.5 * ((idx[lo:hi] - c) / sigma) ** 2)
    return EcgSignal(x, fs, "spikes", "ECG1"), centres


def sine(freq_hz: float, duration_s: float, fs: float, amplitude: float = 1.0, phase: float = 0.0) -> EcgSignal:
    t = np.arange(int(round(duration_s * fs))) / fs
    return EcgSignal(amplitude * np.sin(2 * np.pi * freq_hz * t + phase), fs, "sine", "tone")
