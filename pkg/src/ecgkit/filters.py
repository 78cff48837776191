"""Twin-T notch analysis, digital notch and Butterworth band-pass design, biquad filtering.

The Twin-T helpers reproduce the analog design numbers (notch frequency,
``1/RC`` and ``(1/RC)**2``). Runtime filtering uses digital biquads: a
unit-circle-zero notch and a bilinear-transformed Butterworth band-pass.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import signal as sps

from .errors import ConfigurationError, DesignError, SignalRangeError
from .signal_model import EcgSignal

# quality factor of an unbuffered, equal-component passive Twin-T
CANONICAL_TWIN_T_Q = 0.25

NOTCH_PRESETS = {"50hz": 50.0, "60hz": 60.0, "40hz": 40.0}
DEFAULT_NOTCH_HZ = NOTCH_PRESETS["50hz"]


@dataclass(frozen=True)
class TwinTParams:
    """Equal resistors ``R1=R2=R3=r_ohms`` and capacitors ``C1=C2=C3=c_farads``."""

    r_ohms: float
    c_farads: float

    def __post_init__(self):
        if not (self.r_ohms > 0 and self.c_farads > 0):
            raise DesignError("Twin-T resistance and capacitance must be positive")

    @property
    def omega0(self) -> float:
        """Null angular frequency ``1/(RC)`` in rad/s."""
        return 1.0 / (self.r_ohms * self.c_farads)


class TwinTVariant(str, Enum):
    CANONICAL = "canonical"
    # the (s^2 + w0 s)/(s^2 + w0 s + w0^2) form, kept to pin its behaviour
    LITERAL = "literal"


@dataclass(frozen=True)
class AnalogTransferFunction:
    """``H(s) = (b2 s^2 + b1 s + b0) / (a2 s^2 + a1 s + a0)``."""

    num: tuple[float, float, float]
    den: tuple[float, float, float]

    def __post_init__(self):
        if len(self.num) != 3 or len(self.den) != 3:
            raise DesignError("analog sections carry exactly three coefficients each")
        if self.den[0] == 0:
            raise DesignError("leading denominator coefficient must be non-zero")

    def __call__(self, s: complex | np.ndarray):
        s = np.asarray(s, dtype=complex)
        b2, b1, b0 = self.num
        a2, a1, a0 = self.den
        return (b2 * s * s + b1 * s + b0) / (a2 * s * s + a1 * s + a0)

    def magnitude(self, omega) -> np.ndarray:
        return np.abs(self(1j * np.asarray(omega, dtype=float)))


def twin_t_notch_frequency(p: TwinTParams) -> float:
    """Null frequency ``1 / (2 pi R C)`` in Hz."""
    return 1.0 / (2.0 * math.pi * p.r_ohms * p.c_farads)


def twin_t_transfer_function(
    p: TwinTParams, variant: TwinTVariant | str = TwinTVariant.CANONICAL
) -> AnalogTransferFunction:
    """Second-order Twin-T transfer function with ``w0 = 1/(RC)``.

    ``canonical`` is ``(s^2 + w0^2) / (s^2 + (w0/Q) s + w0^2)`` with
    ``Q = CANONICAL_TWIN_T_Q``, which has a true null at ``w0``.
    ``literal`` is ``(s^2 + w0 s) / (s^2 + w0 s + w0^2)``; its gain at ``w0``
    is ``sqrt(2)``, so it does not notch at all.
    """
    variant = TwinTVariant(variant)
    w0 = p.omega0
    if variant is TwinTVariant.CANONICAL:
        return AnalogTransferFunction((1.0, 0.0, w0 * w0), (1.0, w0 / CANONICAL_TWIN_T_Q, w0 * w0))
    return AnalogTransferFunction((1.0, w0, 0.0), (1.0, w0, w0 * w0))


@dataclass(frozen=True)
class Biquad:
    """``(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)``; ``a`` stores ``[1, a1, a2]``."""

    b: tuple[float, float, float]
    a: tuple[float, float, float]

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        a = tuple(float(v) for v in self.a)
        if len(b) != 3 or len(a) != 3:
            raise DesignError("a biquad has three feedforward and three feedback coefficients")
        if a[0] != 1.0:
            raise DesignError(f"feedback coefficients must be normalised (a0 = 1), got a0 = {a[0]}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)

    def poles(self) -> np.ndarray:
        return np.roots(self.a) if self.a[2] or self.a[1] else np.zeros(0, complex)

    def zeros(self) -> np.ndarray:
        b = np.trim_zeros(np.asarray(self.b), "b")
        return np.roots(b) if b.size > 1 else np.zeros(0, complex)


IDENTITY = Biquad((1.0, 0.0, 0.0), (1.0, 0.0, 0.0))


@dataclass(frozen=True)
class BiquadCascade:
    sections: tuple[Biquad, ...]
    sample_rate_hz: float

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise DesignError("sample_rate_hz must be positive")
        object.__setattr__(self, "sections", tuple(self.sections))

    @property
    def nyquist_hz(self) -> float:
        return self.sample_rate_hz / 2.0

    def poles(self) -> np.ndarray:
        return np.concatenate([s.poles() for s in self.sections]) if self.sections else np.zeros(0, complex)

    def zeros(self) -> np.ndarray:
        return np.concatenate([s.zeros() for s in self.sections]) if self.sections else np.zeros(0, complex)

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def then(self, other: "BiquadCascade") -> "BiquadCascade":
        """Series connection: this cascade followed by ``other``."""
        if other.sample_rate_hz != self.sample_rate_hz:
            raise ConfigurationError(
                f"cannot chain cascades at {self.sample_rate_hz} Hz and {other.sample_rate_hz} Hz"
            )
        return BiquadCascade(self.sections + other.sections, self.sample_rate_hz)

    def to_dict(self) -> dict:
        return {
            "sections": [{"b": list(s.b), "a": list(s.a)} for s in self.sections],
            "fs": self.sample_rate_hz,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BiquadCascade":
        return cls(tuple(Biquad(tuple(s["b"]), tuple(s["a"])) for s in d["sections"]), float(d["fs"]))

    def to_json(self) -> str:
        # float repr is the shortest string that round-trips exactly (<= 17 digits)
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "BiquadCascade":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "BiquadCascade":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class NotchDesign:
    notch_hz: float = DEFAULT_NOTCH_HZ
    quality_q: float = 30.0
    sample_rate_hz: float = 360.0

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise DesignError("sample_rate_hz must be positive")
        if not self.quality_q > 0:
            raise DesignError(f"quality factor must be positive, got {self.quality_q}")
        if not 0 < self.notch_hz < self.sample_rate_hz / 2:
            raise DesignError(
                f"notch frequency {self.notch_hz} Hz must lie in (0, {self.sample_rate_hz / 2}) Hz"
            )


@dataclass(frozen=True)
class BandpassDesign:
    low_hz: float = 0.5
    high_hz: float = 40.0
    order: int = 3
    sample_rate_hz: float = 360.0

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise DesignError("sample_rate_hz must be positive")
        if int(self.order) != self.order or self.order < 1:
            raise DesignError(f"order must be a positive integer, got {self.order}")
        if not 0 < self.low_hz < self.high_hz < self.sample_rate_hz / 2:
            raise DesignError(
                f"band edges must satisfy 0 < {self.low_hz} < {self.high_hz} < {self.sample_rate_hz / 2} Hz"
            )


def _notch_pole_radius(omega0: float, q: float) -> float:
    r = 1.0 - omega0 / (2.0 * q)
    return min(max(r, 1e-9), 1.0 - 1e-9)


def design_notch(d: NotchDesign) -> BiquadCascade:
    """Single biquad with zeros on the unit circle at ``+-w0`` and poles at radius ``r``.

    ``r = 1 - w0 / (2Q)`` (clamped inside the unit circle) sets the width;
    the numerator is scaled so the DC gain is exactly one.
    """
    w0 = 2.0 * math.pi * d.notch_hz / d.sample_rate_hz
    r = _notch_pole_radius(w0, d.quality_q)
    c = math.cos(w0)
    b = np.array([1.0, -2.0 * c, 1.0])
    a = np.array([1.0, -2.0 * r * c, r * r])
    b *= a.sum() / b.sum()
    return BiquadCascade((Biquad(tuple(b), tuple(a)),), d.sample_rate_hz)


def _prewarp(f_hz: float, fs: float) -> float:
    return 2.0 * fs * math.tan(math.pi * f_hz / fs)


def butterworth_prototype_poles(order: int) -> np.ndarray:
    """Left-half-plane poles of the unit-cutoff analog Butterworth low-pass."""
    k = np.arange(order)
    return np.exp(1j * math.pi * (2 * k + order + 1) / (2 * order))


def _pair_conjugates(roots: np.ndarray, tol: float = 1e-9) -> list[tuple[complex, complex]]:
    """Group roots into conjugate pairs, then pair the leftover real roots."""
    upper = sorted((r for r in roots if r.imag > tol), key=lambda r: -abs(r))
    lower = [r for r in roots if r.imag < -tol]
    if len(upper) != len(lower):
        raise DesignError("roots do not come in conjugate pairs")
    pairs = [(r, np.conj(r)) for r in upper]
    reals = sorted((complex(r.real, 0.0) for r in roots if abs(r.imag) <= tol), key=lambda r: -abs(r))
    if len(reals) % 2:
        raise DesignError("cannot split an odd number of real roots into biquads")
    pairs.extend((reals[i], reals[i + 1]) for i in range(0, len(reals), 2))
    return pairs


def design_butterworth_bandpass(d: BandpassDesign) -> BiquadCascade:
    """Butterworth band-pass realised as ``order`` biquads.

    Steps: unit analog low-pass prototype, low-pass to band-pass substitution
    ``s -> (s^2 + W0^2) / (B s)`` using pre-warped edges, bilinear transform,
    then grouping of conjugate poles into sections. Each section carries a
    zero at ``z = 1`` and one at ``z = -1``. Overall gain is set so the
    response is exactly one at the digital image of the analog centre
    frequency, which puts both pre-warped edges at ``1/sqrt(2)``.
    """
    fs = d.sample_rate_hz
    wl, wh = _prewarp(d.low_hz, fs), _prewarp(d.high_hz, fs)
    bw, w0sq = wh - wl, wl * wh

    analog = []
    for p in butterworth_prototype_poles(d.order):
        # roots of s^2 - p*B*s + W0^2
        disc = np.sqrt((p * bw) ** 2 - 4 * w0sq + 0j)
        analog.extend([(p * bw + disc) / 2, (p * bw - disc) / 2])
    analog = np.array(analog)
    k = 2.0 * fs
    digital = (k + analog) / (k - analog)

    sections = []
    for p1, p2 in _pair_conjugates(digital):
        a1 = float(-(p1 + p2).real)
        a2 = float((p1 * p2).real)
        sections.append(Biquad((1.0, 0.0, -1.0), (1.0, a1, a2)))
    cascade = BiquadCascade(tuple(sections), fs)

    f_center = fs / math.pi * math.atan(math.sqrt(w0sq) / k)
    gain = 1.0 / abs(frequency_response(cascade, [f_center])[0])
    first = sections[0]
    sections[0] = Biquad(tuple(gain * v for v in first.b), first.a)
    return BiquadCascade(tuple(sections), fs)


def prewarped_edges_hz(d: BandpassDesign) -> tuple[float, float]:
    """Digital frequencies where the pre-warped analog edges land.

    With pre-warping these coincide with the requested edges; exposed so
    tests can assert the -3 dB points without re-deriving the mapping.
    """
    fs = d.sample_rate_hz
    k = 2.0 * fs
    return tuple(fs / math.pi * math.atan(_prewarp(f, fs) / k) for f in (d.low_hz, d.high_hz))


def apply(cascade: BiquadCascade, signal: EcgSignal) -> EcgSignal:
    """Run ``signal`` through each section in order, zero initial state, causal."""
    if signal.sample_rate_hz != cascade.sample_rate_hz:
        raise ConfigurationError(
            f"signal sampled at {signal.sample_rate_hz} Hz but cascade designed for "
            f"{cascade.sample_rate_hz} Hz"
        )
    y = np.asarray(signal.samples, dtype=float)
    for s in cascade.sections:
        # lfilter evaluates direct form II transposed
        y = sps.lfilter(s.b, s.a, y)
    return signal.with_samples(y)


def _check_freqs(cascade: BiquadCascade, freqs_hz) -> np.ndarray:
    f = np.atleast_1d(np.asarray(freqs_hz, dtype=float))
    nyq = cascade.nyquist_hz
    if np.any(f < 0) or np.any(f > nyq * (1 + 1e-12)):
        raise SignalRangeError(f"frequencies must lie in [0, {nyq}] Hz")
    return f


def frequency_response(cascade: BiquadCascade, freqs_hz: Sequence[float]) -> np.ndarray:
    """Complex response of the cascade at each frequency in ``freqs_hz``."""
    f = _check_freqs(cascade, freqs_hz)
    zinv = np.exp(-2j * math.pi * f / cascade.sample_rate_hz)
    h = np.ones_like(zinv)
    for s in cascade.sections:
        b0, b1, b2 = s.b
        _, a1, a2 = s.a
        h = h * (b0 + zinv * (b1 + zinv * b2)) / (1.0 + zinv * (a1 + zinv * a2))
    return h


def group_delay(cascade: BiquadCascade, freqs_hz: Sequence[float]) -> np.ndarray:
    """Group delay in samples, summed over sections.

    For a polynomial ``P(z^-1) = sum c_k z^-k`` the delay contribution is
    ``Re(sum k c_k z^-k / P)``; each section adds numerator minus denominator.
    """
    f = _check_freqs(cascade, freqs_hz)
    zinv = np.exp(-2j * math.pi * f / cascade.sample_rate_hz)
    k = np.arange(3)[:, None]
    powers = zinv[None, :] ** k
    tau = np.zeros_like(f)
    for s in cascade.sections:
        for coeffs, sign in ((s.b, 1.0), (s.a, -1.0)):
            c = np.asarray(coeffs)[:, None]
            tau += sign * np.real((k * c * powers).sum(0) / (c * powers).sum(0))
    return tau


def impulse_response(cascade: BiquadCascade, n: int) -> np.ndarray:
    x = np.zeros(n)
    x[0] = 1.0
    return apply(cascade, EcgSignal(x, cascade.sample_rate_hz)).samples.copy()


def magnitude_db(h, floor_db: float = -400.0) -> np.ndarray:
    mag = np.abs(np.asarray(h))
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    return np.maximum(db, floor_db)
