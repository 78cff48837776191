"""Statistical and interval features, and rule-based normal/abnormal flagging.

Variance uses the population (1/N) convention throughout. The PR interval
is measured P peak to Q because the delineator finds peaks, not onsets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from statistics import median
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .detect import BeatAnnotations
from .errors import EmptyInputError, InsufficientDataError
from .signal_model import EcgSignal


class Verdict(str, Enum):
    NORMAL = "normal"
    ABNORMAL = "abnormal"


class BeatClass(str, Enum):
    """Five-class beat labels. Only ``N`` is ever assigned by the rule checks."""

    N = "N"
    VEB = "VEB"
    SVEB = "SVEB"
    FB = "FB"
    Q = "Q"


# violation names
HEART_RATE = "heart-rate"
PR_INTERVAL = "pr-interval"
QRS_DURATION = "qrs-duration"
ST_INTERVAL = "st-interval"
INSUFFICIENT_LANDMARKS = "insufficient-landmarks"
INSUFFICIENT_BEATS = "insufficient-beats"
NO_BEATS = "no-beats"


@dataclass(frozen=True)
class NormalityRules:
    """Inclusive bounds on heart rate (bpm) and interval medians (s)."""

    hbr_bpm: tuple[float, float] = (60.0, 90.0)
    pr_s: tuple[float, float] = (0.12, 0.20)
    qrs_s: tuple[float, float] = (0.06, 0.10)
    st_max_s: float = 0.40

    def __post_init__(self):
        for lo, hi in (self.hbr_bpm, self.pr_s, self.qrs_s):
            if not 0 < lo <= hi:
                raise ValueError(f"bad range [{lo}, {hi}]")
        if not self.st_max_s > 0:
            raise ValueError("st_max_s must be positive")


def mean(values: Sequence[float]) -> float:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise EmptyInputError("mean of an empty sequence")
    return float(x.sum() / x.size)


def std_dev(values: Sequence[float]) -> float:
    """Population standard deviation ``sqrt(sum((x - mu)^2) / N)``."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise EmptyInputError("standard deviation of an empty sequence")
    mu = x.sum() / x.size
    return float(math.sqrt(((x - mu) ** 2).sum() / x.size))


def sdsd(rr_intervals_s: Sequence[float]) -> float:
    """Standard deviation of successive R-R differences, in seconds."""
    rr = np.asarray(rr_intervals_s, dtype=float)
    if rr.size < 2:
        raise InsufficientDataError(f"SDSD needs at least 2 R-R intervals, got {rr.size}")
    return std_dev(np.diff(rr))


def heart_rate_bpm(rr_intervals_s: Sequence[float]) -> float:
    rr = np.asarray(rr_intervals_s, dtype=float)
    if rr.size == 0:
        raise InsufficientDataError("heart rate needs at least one R-R interval")
    return 60.0 / mean(rr)


class BeatIntervals(NamedTuple):
    pr_s: Optional[float]
    qrs_s: Optional[float]
    st_s: Optional[float]

    @property
    def complete(self) -> bool:
        return None not in self


def beat_intervals(beats: BeatAnnotations, fs: float | None = None) -> list[BeatIntervals]:
    """Per-beat PR (P peak to Q), QRS (Q to S) and ST (S to T peak) in seconds."""
    fs = fs or beats.sample_rate_hz
    if not beats.is_delineated:
        raise ValueError("beats must be delineated first")

    def span(a, b):
        return None if a is None or b is None else (b - a) / fs

    return [BeatIntervals(span(m.p, m.q), span(m.q, m.s), span(m.s, m.t)) for m in beats.landmarks]


def _median(values) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(median(present)) if present else None


class IntervalMedians(NamedTuple):
    pr_s: Optional[float]
    qrs_s: Optional[float]
    st_s: Optional[float]


def interval_medians(intervals: Sequence[BeatIntervals]) -> IntervalMedians:
    return IntervalMedians(
        _median(i.pr_s for i in intervals),
        _median(i.qrs_s for i in intervals),
        _median(i.st_s for i in intervals),
    )


def classify(
    hbr_bpm: Optional[float],
    intervals: Sequence[BeatIntervals],
    rules: NormalityRules = NormalityRules(),
) -> tuple[Verdict, list[str]]:
    """Check heart rate and interval medians against ``rules``.

    Bounds are inclusive. Without any beat carrying all three intervals the
    interval clauses cannot be judged and ``insufficient-landmarks`` is
    reported instead.
    """
    violations = []
    if hbr_bpm is None:
        violations.append(INSUFFICIENT_BEATS)
    elif not rules.hbr_bpm[0] <= hbr_bpm <= rules.hbr_bpm[1]:
        violations.append(HEART_RATE)

    if not any(i.complete for i in intervals):
        violations.append(INSUFFICIENT_LANDMARKS)
    else:
        med = interval_medians(intervals)
        if not rules.pr_s[0] <= med.pr_s <= rules.pr_s[1]:
            violations.append(PR_INTERVAL)
        if not rules.qrs_s[0] <= med.qrs_s <= rules.qrs_s[1]:
            violations.append(QRS_DURATION)
        if not med.st_s <= rules.st_max_s:
            violations.append(ST_INTERVAL)
    return (Verdict.NORMAL if not violations else Verdict.ABNORMAL), violations


@dataclass(frozen=True)
class FeatureReport:
    record_id: str
    mean_mv: float
    std_mv: float
    sdsd: Optional[float]
    hbr_bpm: Optional[float]
    intervals: IntervalMedians
    verdict: Verdict
    violations: tuple[str, ...] = field(default=())
    sdsd_unit: str = "s"
    n_beats: int = 0

    def __post_init__(self):
        if self.std_mv < 0 or (self.hbr_bpm is not None and self.hbr_bpm < 0):
            raise ValueError("std_mv and hbr_bpm must be non-negative")
        if (self.verdict is Verdict.NORMAL) != (not self.violations):
            raise ValueError("verdict must be normal exactly when there are no violations")

    @property
    def class_label(self) -> Optional[BeatClass]:
        return BeatClass.N if self.verdict is Verdict.NORMAL else None

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "mean_mv": self.mean_mv,
            "std_mv": self.std_mv,
            "sdsd": self.sdsd,
            "sdsd_unit": self.sdsd_unit,
            "hbr_bpm": self.hbr_bpm,
            "intervals": self.intervals._asdict(),
            "verdict": self.verdict.value,
            "violations": list(self.violations),
            "class_label": self.class_label.value if self.class_label else None,
            "n_beats": self.n_beats,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self) -> str:
        """Three-row summary: mean and SDSD to six decimals, heart rate to two."""
        def fmt(v, spec):
            return "n/a" if v is None else format(v, spec)

        return "\n".join(
            [
                f"Mean {fmt(self.mean_mv, '.6f')} mV",
                f"SDSD {fmt(self.sdsd, '.6f')} {self.sdsd_unit}",
                f"HBR {fmt(self.hbr_bpm, '.2f')} bpm",
            ]
        )


def build_report(
    signal: EcgSignal,
    beats: BeatAnnotations,
    rules: NormalityRules = NormalityRules(),
) -> FeatureReport:
    """Amplitude statistics of ``signal`` plus rhythm and interval checks on ``beats``."""
    m, sd = mean(signal.samples), std_dev(signal.samples)
    if len(beats) == 0:
        return FeatureReport(
            signal.record_id, m, sd, None, None, IntervalMedians(None, None, None),
            Verdict.ABNORMAL, (NO_BEATS,), n_beats=0,
        )
    rr = beats.rr_intervals_s
    hbr = heart_rate_bpm(rr) if rr.size else None
    sd_rr = sdsd(rr) if rr.size >= 2 else None
    intervals = beat_intervals(beats) if beats.is_delineated else []
    verdict, violations = classify(hbr, intervals, rules)
    return FeatureReport(
        signal.record_id, m, sd, sd_rr, hbr, interval_medians(intervals),
        verdict, tuple(violations), n_beats=len(beats),
    )
