"""Readers for PhysioNet WFDB records (format 212) and plain-text CSV.

Format 212 packs two 12-bit two's-complement samples into three bytes::

    byte0 = s0 & 0xFF
    byte1 = ((s0 >> 8) & 0x0F) | (((s1 >> 8) & 0x0F) << 4)
    byte2 = s1 & 0xFF

Samples of all signals sharing a file are interleaved frame by frame before
packing. Physical values are ``(adc - baseline) / gain`` in millivolts.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CorruptRecordError,
    EmptyInputError,
    HeaderError,
    ParseError,
    UnsupportedFormatError,
    ValidationError,
)
from .signal_model import EcgSignal

# multipliers taking a header unit to millivolts
_UNIT_TO_MV = {"mv": 1.0, "uv": 1e-3, "µv": 1e-3, "v": 1e3}


@dataclass(frozen=True)
class SignalSpec:
    """One signal line of a WFDB header."""

    file_name: str
    fmt: int
    gain: float
    baseline: int
    units: str = "mV"
    adc_resolution: int = 12
    adc_zero: int = 0
    byte_offset: int = 0
    label: str = ""

    def __post_init__(self):
        if not self.gain > 0:
            raise HeaderError(f"gain must be positive, got {self.gain}")


@dataclass(frozen=True)
class RecordHeader:
    record_name: str
    n_signals: int
    sample_rate_hz: float
    n_samples: int
    signals: tuple[SignalSpec, ...]

    def __post_init__(self):
        if self.n_signals < 1:
            raise HeaderError("a record needs at least one signal")
        if not self.sample_rate_hz > 0:
            raise HeaderError(f"sampling frequency must be positive, got {self.sample_rate_hz}")
        if self.n_samples < 0:
            raise HeaderError("sample count cannot be negative")
        if len(self.signals) != self.n_signals:
            raise HeaderError(
                f"header declares {self.n_signals} signals but lists {len(self.signals)}"
            )

    def to_text(self) -> str:
        lines = [f"{self.record_name} {self.n_signals} {_fmt_number(self.sample_rate_hz)} {self.n_samples}"]
        for s in self.signals:
            fmt = f"{s.fmt}+{s.byte_offset}" if s.byte_offset else f"{s.fmt}"
            gain = f"{_fmt_number(s.gain)}({s.baseline})/{s.units}"
            lines.append(
                f"{s.file_name} {fmt} {gain} {s.adc_resolution} {s.adc_zero} 0 0 0 {s.label}".rstrip()
            )
        return "\n".join(lines) + "\n"


def _fmt_number(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _leading_number(token: str, what: str, line_no: int) -> str:
    m = re.match(r"[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?", token)
    if not m:
        raise HeaderError(f"line {line_no}: cannot read {what} from {token!r}")
    return m.group(0)


def _parse_signal_line(line: str, line_no: int) -> SignalSpec:
    parts = line.split()
    if len(parts) < 2:
        raise HeaderError(f"line {line_no}: signal line needs at least file name and format")
    file_name = parts[0]
    fmt_token = parts[1]
    fmt = int(_leading_number(fmt_token, "format", line_no))
    offset = 0
    m = re.search(r"\+(\d+)", fmt_token)
    if m:
        offset = int(m.group(1))
    if len(parts) < 3:
        raise HeaderError(f"line {line_no}: missing gain for signal {file_name}")

    # gain field: gain[(baseline)][/units]
    gain_token = parts[2]
    units = "mV"
    if "/" in gain_token:
        gain_token, units = gain_token.split("/", 1)
    baseline = None
    m = re.fullmatch(r"([^()]+)\((-?\d+)\)", gain_token)
    if m:
        gain_token, baseline = m.group(1), int(m.group(2))
    try:
        gain = float(gain_token)
    except ValueError:
        raise HeaderError(f"line {line_no}: bad gain {parts[2]!r}") from None

    adc_res = int(parts[3]) if len(parts) > 3 else 12
    adc_zero = int(parts[4]) if len(parts) > 4 else 0
    if baseline is None:
        baseline = adc_zero
    label = " ".join(parts[8:]) if len(parts) > 8 else ""
    return SignalSpec(file_name, fmt, gain, baseline, units, adc_res, adc_zero, offset, label)


def parse_header(text: str) -> RecordHeader:
    """Parse WFDB header text (record line followed by one line per signal)."""
    lines = [
        (no, ln.strip())
        for no, ln in enumerate(text.splitlines(), start=1)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise HeaderError("header is empty")
    rec_no, rec_line = lines[0]
    parts = rec_line.split()
    if len(parts) < 2:
        raise HeaderError(f"line {rec_no}: record line needs a name and signal count")
    name = parts[0].split("/")[0]
    try:
        n_signals = int(parts[1])
    except ValueError:
        raise HeaderError(f"line {rec_no}: bad signal count {parts[1]!r}") from None
    # fs may carry a counter frequency and base counter: 360/720(0)
    fs = float(_leading_number(parts[2], "sampling frequency", rec_no)) if len(parts) > 2 else 250.0
    if len(parts) < 4:
        raise HeaderError(f"line {rec_no}: record line does not declare the sample count")
    try:
        n_samples = int(parts[3])
    except ValueError:
        raise HeaderError(f"line {rec_no}: bad sample count {parts[3]!r}") from None

    sig_lines = lines[1 : 1 + n_signals]
    signals = tuple(_parse_signal_line(ln, no) for no, ln in sig_lines)
    return RecordHeader(name, n_signals, fs, n_samples, signals)


def decode_212(data: bytes, count: int) -> np.ndarray:
    """Unpack ``count`` samples from format-212 bytes.

    An odd ``count`` still consumes a whole three-byte group; the unused
    second sample is dropped.
    """
    n_groups = (count + 1) // 2
    needed = 3 * n_groups
    if len(data) < needed:
        raise CorruptRecordError(
            f"signal data ends at byte offset {len(data)}, need {needed} bytes for {count} samples"
        )
    raw = np.frombuffer(data, dtype=np.uint8, count=needed).reshape(-1, 3).astype(np.int16)
    s0 = raw[:, 0] | ((raw[:, 1] & 0x0F) << 8)
    s1 = raw[:, 2] | ((raw[:, 1] & 0xF0) << 4)
    out = np.column_stack([s0, s1]).ravel()[:count]
    out = np.where(out >= 2048, out - 4096, out)
    return out.astype(np.int16)


def encode_212(values) -> bytes:
    """Pack 12-bit signed samples into format-212 bytes (odd length padded with 0)."""
    v = np.asarray(values, dtype=np.int64)
    if v.size and (v.min() < -2048 or v.max() > 2047):
        raise ValueError("format 212 holds values in [-2048, 2047]")
    if v.size % 2:
        v = np.append(v, 0)
    u = (v & 0xFFF).reshape(-1, 2)
    s0, s1 = u[:, 0], u[:, 1]
    out = np.column_stack([s0 & 0xFF, ((s0 >> 8) & 0x0F) | (((s1 >> 8) & 0x0F) << 4), s1 & 0xFF])
    return out.astype(np.uint8).tobytes()


def _to_mv(spec: SignalSpec, adc: np.ndarray) -> np.ndarray:
    scale = _UNIT_TO_MV.get(spec.units.lower(), 1.0)
    return (adc.astype(float) - spec.baseline) / spec.gain * scale


def read_wfdb(header_path, channel_index: int = 0) -> EcgSignal:
    """Read one channel of a WFDB record as a millivolt :class:`EcgSignal`.

    Args:
        header_path: path to the ``.hea`` file; the signal file is resolved
            relative to the header's directory.
        channel_index: which signal line to return (0 is the first, ECG1).
    """
    header_path = Path(header_path)
    header = parse_header(header_path.read_text())
    if not 0 <= channel_index < header.n_signals:
        raise HeaderError(
            f"channel {channel_index} requested but record has {header.n_signals} signals"
        )
    spec = header.signals[channel_index]
    if spec.fmt != 212:
        raise UnsupportedFormatError(f"format {spec.fmt} is not supported (only 212)")

    # signals stored in the same file are interleaved per frame
    group = [i for i, s in enumerate(header.signals) if s.file_name == spec.file_name]
    for i in group:
        if header.signals[i].fmt != 212:
            raise UnsupportedFormatError(
                f"format {header.signals[i].fmt} is not supported (only 212)"
            )
    data = (header_path.parent / spec.file_name).read_bytes()[spec.byte_offset :]
    width = len(group)
    adc = decode_212(data, header.n_samples * width)
    adc = adc.reshape(header.n_samples, width)[:, group.index(channel_index)]
    label = spec.label or f"signal{channel_index}"
    return EcgSignal(_to_mv(spec, adc), header.sample_rate_hz, header.record_name, label)


def write_wfdb(
    directory,
    record_name: str,
    signals,
    sample_rate_hz: float,
    gain: float = 200.0,
    baseline: int = 0,
    labels=None,
) -> Path:
    """Write millivolt signals as a format-212 record; returns the header path.

    ``signals`` is a sequence of equal-length 1-D arrays, all stored in one
    ``<record_name>.dat`` file. Values are rounded to the nearest ADC code.
    """
    directory = Path(directory)
    arrays = [np.asarray(s, dtype=float) for s in signals]
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        raise ValueError("all signals must have the same length")
    labels = list(labels) if labels else [f"ECG{i + 1}" for i in range(len(arrays))]
    adc = np.column_stack([np.rint(a * gain + baseline) for a in arrays]).astype(np.int64)
    dat_name = f"{record_name}.dat"
    (directory / dat_name).write_bytes(encode_212(adc.ravel()))
    specs = tuple(
        SignalSpec(dat_name, 212, gain, baseline, "mV", 12, baseline, 0, lab) for lab in labels
    )
    header = RecordHeader(record_name, len(arrays), sample_rate_hz, n, specs)
    hea = directory / f"{record_name}.hea"
    hea.write_text(header.to_text())
    return hea


def _parse_row(fields: list[str], line_no: int) -> float:
    if len(fields) > 2:
        raise ParseError(f"line {line_no}: expected 1 or 2 columns, got {len(fields)}")
    try:
        values = [float(f) for f in fields]
    except ValueError:
        raise ParseError(f"line {line_no}: non-numeric value in {','.join(fields)!r}") from None
    value = values[-1]
    if not math.isfinite(value):
        raise ValidationError(f"line {line_no}: amplitude {fields[-1]!r} is not finite")
    return value


def read_csv(path, sample_rate_hz: float, record_id: str | None = None) -> EcgSignal:
    """Read one amplitude (mV) per row; with two columns the first is time and ignored.

    A single non-numeric first line is accepted as a column header. Any other
    non-numeric row raises :class:`ParseError` naming its line number.
    """
    path = Path(path)
    rows = []
    with path.open() as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            fields = [f for f in re.split(r"[,;\s]+", stripped) if f]
            if line_no == 1 and not _is_numeric(fields):
                continue
            rows.append(_parse_row(fields, line_no))
    if not rows:
        raise EmptyInputError(f"{path} contains no samples")
    return EcgSignal(np.array(rows), sample_rate_hz, record_id or path.stem, "csv")


def _is_numeric(fields: list[str]) -> bool:
    try:
        [float(f) for f in fields]
    except ValueError:
        return False
    return True
