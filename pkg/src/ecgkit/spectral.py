"""Windows, radix-2 FFT, STFT spectrograms and harmonic distortion.

All windows use the symmetric convention (``N - 1`` in the denominators), so
``w[n] == w[N-1-n]``. The FFT is an unnormalised forward transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DegenerateFundamentalError,
    DesignError,
    EmptyInputError,
    InsufficientDataError,
    SignalRangeError,
    UnsupportedSizeError,
)
from .signal_model import EcgSignal, Spectrogram, Spectrum

DB_FLOOR = -120.0


class WindowFamily(str, Enum):
    HAMMING = "hamming"
    KAISER = "kaiser"
    BLACKMAN = "blackman"
    GAUSSIAN = "gaussian"
    RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class WindowSpec:
    """Window family and shape. ``beta`` only affects Kaiser, ``sigma`` only Gaussian.

    ``sigma`` is the standard deviation as a fraction of the half-length
    ``(N - 1) / 2``.
    """

    family: WindowFamily = WindowFamily.HAMMING
    length_n: int = 256
    beta: float = 8.6
    sigma: float = 0.4

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", WindowFamily(self.family))
        except ValueError:
            raise DesignError(f"unknown window family {self.family!r}") from None
        if int(self.length_n) != self.length_n or self.length_n < 2:
            raise DesignError(f"window length must be an integer >= 2, got {self.length_n}")
        if self.beta < 0:
            raise DesignError("Kaiser beta must be non-negative")
        if not self.sigma > 0:
            raise DesignError("Gaussian sigma must be positive")


def make_window(spec: WindowSpec) -> np.ndarray:
    n_len = int(spec.length_n)
    n = np.arange(n_len)
    m = n_len - 1
    fam = spec.family
    if fam is WindowFamily.HAMMING:
        w = 0.54 - 0.46 * np.cos(2 * np.pi * n / m)
    elif fam is WindowFamily.BLACKMAN:
        w = 0.42 - 0.5 * np.cos(2 * np.pi * n / m) + 0.08 * np.cos(4 * np.pi * n / m)
    elif fam is WindowFamily.KAISER:
        ratio = 2.0 * n / m - 1.0
        arg = np.sqrt(np.clip(1.0 - ratio * ratio, 0.0, None))
        w = np.i0(spec.beta * arg) / np.i0(spec.beta)
    elif fam is WindowFamily.GAUSSIAN:
        half = m / 2.0
        w = np.exp(-0.5 * ((n - half) / (spec.sigma * half)) ** 2)
    else:
        w = np.ones(n_len)
    # tiny negative round-off at Blackman's end points
    return np.clip(w, 0.0, 1.0)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def _bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def _radix2(x: np.ndarray) -> np.ndarray:
    """Iterative decimation-in-time FFT along the last axis (length a power of two)."""
    n = x.shape[-1]
    lead = x.shape[:-1]
    y = x[..., _bit_reverse_permutation(n)].astype(complex)
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / size)
        y = y.reshape(*lead, n // size, size)
        even = y[..., :half]
        odd = y[..., half:] * tw
        y = np.concatenate([even + odd, even - odd], axis=-1)
        size *= 2
    return y.reshape(*lead, n)


def fft(frame, n: int | None = None, sample_rate_hz: float = 1.0) -> Spectrum:
    """Zero-pad ``frame`` to ``n`` points and transform.

    ``X[k] = sum_m x[m] exp(-2j pi k m / n)``; ``n`` defaults to the next
    power of two at or above the frame length.
    """
    x = np.asarray(frame, dtype=complex).ravel()
    if n is None:
        n = next_power_of_two(max(1, x.size))
    if not is_power_of_two(int(n)) or int(n) != n:
        raise UnsupportedSizeError(f"transform length {n} is not a power of two")
    n = int(n)
    if x.size > n:
        raise SignalRangeError(f"frame of {x.size} samples does not fit in a {n}-point transform")
    padded = np.zeros(n, dtype=complex)
    padded[: x.size] = x
    return Spectrum(_radix2(padded), sample_rate_hz / n, n)


def dft(frame) -> np.ndarray:
    """Direct O(N^2) DFT; reference for checking :func:`fft`."""
    x = np.asarray(frame, dtype=complex)
    n = x.size
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


def stft(
    signal: EcgSignal,
    window: WindowSpec | None = None,
    hop: int | None = None,
    nfft: int | None = None,
) -> Spectrogram:
    """Magnitude spectrogram; frame ``t`` covers samples ``[t*hop, t*hop + N)``.

    Defaults: Hamming N=256, ``hop = N // 4``, ``nfft`` the next power of two
    at or above N. Only bins ``0..nfft/2`` are kept, frame times are frame
    centres, and a trailing partial frame is dropped.
    """
    window = window or WindowSpec()
    n_win = int(window.length_n)
    hop = int(hop) if hop is not None else max(1, n_win // 4)
    nfft = int(nfft) if nfft is not None else next_power_of_two(n_win)
    if hop < 1:
        raise DesignError(f"hop must be >= 1, got {hop}")
    if not is_power_of_two(nfft):
        raise UnsupportedSizeError(f"nfft {nfft} is not a power of two")
    if nfft < n_win:
        raise DesignError(f"nfft {nfft} is shorter than the window ({n_win})")
    x = signal.samples
    if x.size < n_win:
        raise EmptyInputError(f"signal has {x.size} samples, fewer than one {n_win}-sample window")

    n_frames = (x.size - n_win) // hop + 1
    starts = np.arange(n_frames) * hop
    w = make_window(window)
    framed = np.zeros((n_frames, nfft))
    framed[:, :n_win] = x[starts[:, None] + np.arange(n_win)] * w
    mags = np.abs(_radix2(framed)[:, : nfft // 2 + 1])
    fs = signal.sample_rate_hz
    times = (starts + (n_win - 1) / 2.0) / fs
    freqs = np.arange(nfft // 2 + 1) * fs / nfft
    return Spectrogram(mags, hop, window, times, freqs)


def to_db(magnitude, ref: float = 1.0, floor_db: float = DB_FLOOR) -> np.ndarray:
    """``20 log10(|m| / ref)`` clipped below at ``floor_db``."""
    mag = np.abs(np.asarray(magnitude, dtype=float)) / ref
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    return np.maximum(db, floor_db)


@dataclass(frozen=True)
class HarmonicAnalysis:
    fundamental_hz: float
    v1_rms: float
    harmonic_rms: tuple[float, ...]
    thd_percent: float
    n_periods: int
    n_samples_used: int

    def to_dict(self) -> dict:
        return {
            "fundamental_hz": self.fundamental_hz,
            "v1_rms_mv": self.v1_rms,
            "harmonic_rms_mv": list(self.harmonic_rms),
            "thd_percent": self.thd_percent,
            "n_periods": self.n_periods,
            "n_samples_used": self.n_samples_used,
        }


def _integer_period_span(n_samples: int, fs: float, f0: float) -> tuple[int, int]:
    """Pick the period count whose span is closest to a whole number of samples.

    Searches from the longest span that fits downwards, preferring longer
    spans when residuals tie; returns ``(periods, samples)``.
    """
    period = fs / f0
    k_max = int(math.floor(n_samples / period + 1e-9))
    if k_max < 2:
        raise InsufficientDataError(
            f"{n_samples} samples hold fewer than two periods of {f0} Hz at {fs} Hz"
        )
    k = np.arange(k_max, max(1, k_max // 2) - 1, -1)
    spans = k * period
    residual = np.abs(spans - np.rint(spans))
    best = int(np.argmin(residual + 1e-12 * (k_max - k)))
    length = min(int(np.rint(spans[best])), n_samples)
    return int(k[best]), length


def tone_rms(x: np.ndarray, freq_hz: float, fs: float) -> float:
    """RMS of the sinusoid at ``freq_hz`` by single-bin projection (Goertzel bin)."""
    n = np.arange(x.size)
    proj = np.dot(x, np.exp(-2j * np.pi * freq_hz * n / fs))
    return float(math.sqrt(2.0) * abs(proj) / x.size)


def thd(signal: EcgSignal, fundamental_hz: float, n_max: int = 5) -> HarmonicAnalysis:
    """Total harmonic distortion ``100 * sqrt(sum_{n=2..n_max} Vn^2) / V1`` in percent.

    Each harmonic RMS comes from a single-bin projection over a whole number
    of fundamental periods, so harmonics are orthogonal to one another.
    """
    fs = signal.sample_rate_hz
    if n_max < 2:
        raise DesignError(f"n_max must be >= 2, got {n_max}")
    if not fundamental_hz > 0:
        raise DesignError("fundamental frequency must be positive")
    if n_max * fundamental_hz >= fs / 2:
        raise SignalRangeError(
            f"harmonic {n_max} of {fundamental_hz} Hz reaches the {fs / 2} Hz Nyquist limit"
        )
    periods, length = _integer_period_span(len(signal), fs, fundamental_hz)
    x = signal.samples[:length]
    x = x - x.mean()
    v = [tone_rms(x, h * fundamental_hz, fs) for h in range(1, n_max + 1)]
    v1, harmonics = v[0], tuple(v[1:])
    if v1 < 1e-12:
        raise DegenerateFundamentalError(f"fundamental RMS {v1:.3g} mV is too small")
    ratio = math.sqrt(sum(h * h for h in harmonics)) / v1
    return HarmonicAnalysis(float(fundamental_hz), v1, harmonics, 100.0 * ratio, periods, length)


def max_harmonic(fundamental_hz: float, fs: float, cap: int = 10) -> int:
    """Largest harmonic index (at most ``cap``) strictly below Nyquist."""
    n = int(math.ceil(fs / 2 / fundamental_hz)) - 1
    return max(1, min(cap, n))
