"""Pan-Tompkins R-peak detection and fixed-window P/Q/S/T delineation."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.signal import find_peaks

from .errors import ConfigurationError, EmptyInputError
from .filters import BandpassDesign, apply, design_butterworth_bandpass, group_delay
from .signal_model import EcgSignal

MIN_DURATION_S = 2.0
MIN_SAMPLE_RATE_HZ = 100.0


@dataclass(frozen=True)
class PanTompkinsConfig:
    bandpass_low_hz: float = 5.0
    bandpass_high_hz: float = 15.0
    integration_window_s: float = 0.150
    refractory_s: float = 0.200
    threshold_fraction: float = 0.25
    searchback_factor: float = 1.66
    # seconds of integrated signal used to seed the signal/noise levels
    init_window_s: float = 2.0
    snap_window_s: float = 0.05
    rr_history: int = 8

    def __post_init__(self):
        for name in (
            "bandpass_low_hz",
            "bandpass_high_hz",
            "integration_window_s",
            "refractory_s",
            "threshold_fraction",
            "searchback_factor",
            "init_window_s",
            "snap_window_s",
        ):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if not self.bandpass_low_hz < self.bandpass_high_hz:
            raise ConfigurationError("bandpass_low_hz must be below bandpass_high_hz")
        if self.rr_history < 1:
            raise ConfigurationError("rr_history must be >= 1")


@dataclass(frozen=True)
class Landmarks:
    """Sample indices of the P, Q, S and T extrema of one beat (None when absent)."""

    p: Optional[int] = None
    q: Optional[int] = None
    s: Optional[int] = None
    t: Optional[int] = None


@dataclass(frozen=True, eq=False)
class BeatAnnotations:
    r_indices: np.ndarray
    sample_rate_hz: float
    landmarks: tuple[Landmarks, ...] = field(default=())

    def __post_init__(self):
        r = np.array(self.r_indices, dtype=np.int64, copy=True).ravel()
        if r.size > 1 and np.any(np.diff(r) <= 0):
            raise ValueError("R indices must be strictly increasing")
        r.setflags(write=False)
        object.__setattr__(self, "r_indices", r)
        lm = tuple(self.landmarks)
        if lm and len(lm) != r.size:
            raise ValueError("need one landmark record per beat")
        for ri, m in zip(r, lm):
            chain = [v for v in (m.p, m.q) if v is not None] + [int(ri)]
            chain += [v for v in (m.s, m.t) if v is not None]
            if any(b <= a for a, b in zip(chain, chain[1:])):
                raise ValueError(f"landmarks out of order around R at {ri}: {m}")
        object.__setattr__(self, "landmarks", lm)

    def __len__(self) -> int:
        return self.r_indices.size

    @property
    def rr_intervals_s(self) -> np.ndarray:
        return np.diff(self.r_indices) / self.sample_rate_hz

    @property
    def is_delineated(self) -> bool:
        return len(self.landmarks) == self.r_indices.size

    def to_csv(self) -> str:
        """Columns ``beat_index, r_sample, p_sample, q_sample, s_sample, t_sample, rr_prev_s``."""
        rows = ["beat_index,r_sample,p_sample,q_sample,s_sample,t_sample,rr_prev_s"]
        lms = self.landmarks if self.is_delineated else (Landmarks(),) * len(self)
        rr = self.rr_intervals_s

        def cell(v):
            return "" if v is None else str(v)

        for i, (r, m) in enumerate(zip(self.r_indices, lms)):
            rr_prev = "" if i == 0 else repr(float(rr[i - 1]))
            rows.append(
                ",".join([str(i), str(int(r)), cell(m.p), cell(m.q), cell(m.s), cell(m.t), rr_prev])
            )
        return "\n".join(rows) + "\n"


class PanTompkinsStages(NamedTuple):
    bandpassed: np.ndarray
    derivative: np.ndarray
    squared: np.ndarray
    integrated: np.ndarray
    delay_samples: float


def derivative_5pt(x: np.ndarray) -> np.ndarray:
    """Causal ``y[n] = (2x[n] + x[n-1] - x[n-3] - 2x[n-4]) / 8`` (2-sample delay)."""
    xp = np.concatenate([np.zeros(4), x])
    return (2 * xp[4:] + xp[3:-1] - xp[1:-3] - 2 * xp[:-4]) / 8.0


def moving_window_integral(x: np.ndarray, width: int) -> np.ndarray:
    """Causal mean over the last ``width`` samples."""
    c = np.cumsum(np.concatenate([np.zeros(width), x]))
    return (c[width:] - c[:-width]) / width


def pan_tompkins_stages(signal: EcgSignal, config: PanTompkinsConfig | None = None) -> PanTompkinsStages:
    config = config or PanTompkinsConfig()
    fs = signal.sample_rate_hz
    bp = design_butterworth_bandpass(
        BandpassDesign(config.bandpass_low_hz, config.bandpass_high_hz, 2, fs)
    )
    filtered = apply(bp, signal).samples
    deriv = derivative_5pt(filtered)
    squared = deriv * deriv
    width = max(1, int(round(config.integration_window_s * fs)))
    integrated = moving_window_integral(squared, width)
    centre = math.sqrt(config.bandpass_low_hz * config.bandpass_high_hz)
    delay = float(group_delay(bp, [centre])[0]) + 2.0 + (width - 1) / 2.0
    return PanTompkinsStages(filtered, deriv, squared, integrated, delay)


def _adaptive_threshold_peaks(mwi: np.ndarray, fs: float, config: PanTompkinsConfig) -> list[int]:
    """Dual-threshold classification of integrated-signal peaks into QRS and noise."""
    refractory = max(1, int(round(config.refractory_s * fs)))
    candidates, _ = find_peaks(mwi, distance=refractory)
    if candidates.size == 0:
        return []

    seed = mwi[: int(round(config.init_window_s * fs))]
    spk = seed.max() / 2.0
    npk = seed.mean()

    def threshold():
        return npk + config.threshold_fraction * (spk - npk)

    accepted: list[int] = []
    noise: list[int] = []
    rr = deque(maxlen=config.rr_history)

    def accept(idx: int):
        nonlocal spk
        spk = 0.125 * mwi[idx] + 0.875 * spk
        if accepted:
            rr.append(idx - accepted[-1])
        accepted.append(idx)

    def search_back(now: int):
        if not (accepted and rr):
            return
        last = accepted[-1]
        if now - last <= config.searchback_factor * (sum(rr) / len(rr)):
            return
        low = 0.5 * threshold()
        pool = [j for j in noise if j - last >= refractory and mwi[j] > low]
        if pool:
            best = max(pool, key=lambda j: mwi[j])
            accept(best)
            noise[:] = [j for j in noise if j > best]

    for i in candidates:
        search_back(int(i))
        v = mwi[i]
        if v > threshold() and (not accepted or i - accepted[-1] >= refractory):
            accept(int(i))
            noise.clear()
        else:
            npk = 0.125 * v + 0.875 * npk
            noise.append(int(i))
    search_back(mwi.size)
    return accepted


def detect_r_peaks(signal: EcgSignal, config: PanTompkinsConfig | None = None) -> BeatAnnotations:
    """Locate R peaks with the classic Pan-Tompkins pipeline.

    Band-pass (two order-2 Butterworth biquads), 5-point derivative, squaring
    and moving-window integration feed adaptive signal/noise thresholds with
    refractory blanking and search-back. Each integrated-signal peak is moved
    back by the analytic pipeline delay and snapped to the largest sample of
    ``signal`` within ``snap_window_s``.
    """
    config = config or PanTompkinsConfig()
    fs = signal.sample_rate_hz
    if fs < MIN_SAMPLE_RATE_HZ:
        raise ConfigurationError(f"sample rate {fs} Hz is below the {MIN_SAMPLE_RATE_HZ} Hz minimum")
    if signal.duration_s < MIN_DURATION_S:
        raise EmptyInputError(
            f"signal lasts {signal.duration_s:.3f} s, detection needs at least {MIN_DURATION_S} s"
        )
    stages = pan_tompkins_stages(signal, config)
    peaks = _adaptive_threshold_peaks(stages.integrated, fs, config)

    x = signal.samples
    half = int(round(config.snap_window_s * fs))
    refractory = int(round(config.refractory_s * fs))
    r_out: list[int] = []
    for p in peaks:
        est = int(round(p - stages.delay_samples))
        lo, hi = max(0, est - half), min(x.size, est + half + 1)
        if lo >= hi:
            continue
        r = lo + int(np.argmax(x[lo:hi]))
        if r_out and r - r_out[-1] < refractory:
            if x[r] > x[r_out[-1]]:
                r_out[-1] = r
            continue
        r_out.append(r)
    return BeatAnnotations(np.array(r_out, dtype=np.int64), fs)


def delineate_pqst(signal: EcgSignal, beats: BeatAnnotations) -> BeatAnnotations:
    """Find P, Q, S, T extrema in fixed windows around each R peak.

    Q is the minimum in ``(R - 80 ms, R)``, S the minimum in ``(R, R + 80 ms)``;
    these windows are clipped at the signal edges and neighbouring R peaks and
    only go missing when nothing is left. P is the maximum in
    ``(R - 200 ms, Q)`` and T the maximum in ``(S + 40 ms, R + 400 ms)``;
    those windows must fit whole, otherwise the landmark is absent.
    """
    if len(beats) == 0:
        raise EmptyInputError("no beats to delineate")
    fs = beats.sample_rate_hz
    x = signal.samples
    n = x.size
    w_qs = int(round(0.08 * fs))
    w_p = int(round(0.20 * fs))
    gap_t = int(round(0.04 * fs))
    w_t = int(round(0.40 * fs))

    r = beats.r_indices
    out = []
    for i, ri in enumerate(r):
        ri = int(ri)
        prev_r = int(r[i - 1]) if i > 0 else -1
        next_r = int(r[i + 1]) if i + 1 < r.size else n

        q_lo, q_hi = max(ri - w_qs + 1, prev_r + 1, 0), ri
        q = q_lo + int(np.argmin(x[q_lo:q_hi])) if q_lo < q_hi else None
        s_lo, s_hi = ri + 1, min(ri + w_qs, next_r, n)
        s = s_lo + int(np.argmin(x[s_lo:s_hi])) if s_lo < s_hi else None

        p = None
        p_lo = ri - w_p + 1
        if q is not None and p_lo >= 0 and ri - w_p > prev_r and p_lo < q:
            p = p_lo + int(np.argmax(x[p_lo:q]))
        t = None
        if s is not None:
            t_lo, t_hi = s + gap_t + 1, ri + w_t
            if t_hi <= min(n, next_r) and t_lo < t_hi:
                t = t_lo + int(np.argmax(x[t_lo:t_hi]))
        out.append(Landmarks(p, q, s, t))
    return BeatAnnotations(r, fs, tuple(out))
