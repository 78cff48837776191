"""Value types shared by the pipeline: signals, spectra, spectrograms, histograms.

Every container is immutable. Array fields are copied on construction and
marked read-only, so a stage can never mutate its input behind the caller's back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import EmptyInputError, SignalRangeError

if TYPE_CHECKING:
    from .spectral import WindowSpec


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EcgSignal:
    """Uniformly sampled single-channel waveform in millivolts."""

    samples: np.ndarray
    sample_rate_hz: float
    record_id: str = ""
    channel: str = ""

    def __post_init__(self):
        if not np.isfinite(self.sample_rate_hz) or self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        samples = _frozen(self.samples, float)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, EcgSignal):
            return NotImplemented
        return (
            self.sample_rate_hz == other.sample_rate_hz
            and self.record_id == other.record_id
            and self.channel == other.channel
            and np.array_equal(self.samples, other.samples)
        )

    __hash__ = None

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    @property
    def times_s(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate_hz

    def with_samples(self, samples) -> "EcgSignal":
        """Return a new signal carrying this one's metadata and ``samples``."""
        return EcgSignal(samples, self.sample_rate_hz, self.record_id, self.channel)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex transform bins ``X[k]`` for ``k = 0..n-1``."""

    bins: np.ndarray
    bin_width_hz: float
    n: int

    def __post_init__(self):
        bins = _frozen(self.bins, complex)
        if bins.size != self.n:
            raise ValueError(f"expected {self.n} bins, got {bins.size}")
        if self.bin_width_hz <= 0:
            raise ValueError("bin_width_hz must be positive")
        object.__setattr__(self, "bins", bins)

    @property
    def freqs_hz(self) -> np.ndarray:
        return np.arange(self.n) * self.bin_width_hz


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Magnitude grid with rows as time frames and columns as frequency bins."""

    frames: np.ndarray
    hop_samples: int
    window: "WindowSpec"
    frame_times_s: np.ndarray
    bin_freqs_hz: np.ndarray

    def __post_init__(self):
        frames = _frozen(self.frames, float)
        if frames.ndim != 2:
            raise ValueError("frames must be a 2-D grid")
        if np.any(frames < 0):
            raise ValueError("magnitudes must be non-negative")
        if self.hop_samples < 1:
            raise ValueError("hop_samples must be >= 1")
        times = _frozen(self.frame_times_s, float)
        freqs = _frozen(self.bin_freqs_hz, float)
        if times.size != frames.shape[0] or freqs.size != frames.shape[1]:
            raise ValueError("axis lengths do not match the grid shape")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "frame_times_s", times)
        object.__setattr__(self, "bin_freqs_hz", freqs)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True, eq=False)
class AmplitudeHistogram:
    edges: np.ndarray
    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        edges = _frozen(self.edges, float)
        counts = _frozen(self.counts, np.int64)
        if counts.size != edges.size - 1:
            raise ValueError("need exactly one more edge than counts")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly ascending")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)


def slice_signal(signal: EcgSignal, start_s: float, end_s: float) -> EcgSignal:
    """Return the samples falling in ``[start_s, end_s)``.

    Bounds are converted to sample indices by rounding to the nearest sample,
    so ``slice_signal(s, 2, 3)`` at 100 Hz yields indices 200..299.
    """
    duration = signal.duration_s
    if not (0 <= start_s < end_s <= duration):
        raise SignalRangeError(
            f"slice bounds [{start_s}, {end_s}) outside valid interval [0, {duration}]"
        )
    fs = signal.sample_rate_hz
    i0 = int(round(start_s * fs))
    i1 = min(int(round(end_s * fs)), len(signal))
    return signal.with_samples(signal.samples[i0:i1])


def histogram(signal: EcgSignal, n_bins: int) -> AmplitudeHistogram:
    """Equal-width amplitude histogram over ``[min, max]`` of the samples.

    The maximum value lands in the last bin. A constant signal gets each edge
    pushed one floating-point step past the previous one, so bins keep a
    positive width and every sample falls in the first bin.
    """
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    x = signal.samples
    if x.size == 0:
        raise EmptyInputError("cannot histogram an empty signal")
    lo, hi = float(x.min()), float(x.max())
    edges = np.linspace(lo, hi, n_bins + 1)
    if hi <= lo or np.any(np.diff(edges) <= 0):
        edges = np.empty(n_bins + 1)
        edges[0] = lo
        for i in range(1, n_bins + 1):
            edges[i] = max(np.nextafter(edges[i - 1], np.inf), lo + (hi - lo) * i / n_bins)
    idx = np.searchsorted(edges, x, side="right") - 1
    idx = np.clip(idx, 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    return AmplitudeHistogram(edges, counts)
