"""Command-line entry point: ``ecgkit {filter,spectrogram,analyze,design}``.

Exit codes: 0 on success, 1 for I/O or unreadable input files, 2 for invalid
flags or design parameters.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import detect, features, filters, ingest, spectral
from .errors import DegenerateFundamentalError, EcgToolkitError, IngestError, SignalRangeError
from .signal_model import EcgSignal, histogram

log = logging.getLogger("ecgkit")

EXIT_OK, EXIT_IO, EXIT_VALIDATION = 0, 1, 2
THREADS_ENV = "ECG_TOOLKIT_THREADS"
EMIT_CHOICES = ("csv", "json", "pgm")


class UsageError(EcgToolkitError):
    """Flag combination rejected before any computation."""


@dataclass(frozen=True)
class PipelineConfig:
    inputs: tuple[Path, ...]
    fmt: str = "wfdb"
    channel: int = 0
    fs: float | None = None
    notch_hz: float = filters.DEFAULT_NOTCH_HZ
    notch_q: float = 30.0
    notch: bool = True
    bp_low: float = 0.5
    bp_high: float = 40.0
    bp_order: int = 3
    bandpass: bool = True
    window: spectral.WindowSpec = field(default_factory=spectral.WindowSpec)
    hop: int | None = None
    nfft: int | None = None
    out_dir: Path = Path(".")
    emit: frozenset = frozenset(EMIT_CHOICES)
    hist_bins: int = 50
    db: bool = False
    thd_f0: float | None = None
    thd_harmonics: int | None = None

    def validate(self) -> None:
        """Check everything that does not depend on the record's sample rate."""
        if not self.inputs:
            raise UsageError("at least one --input is required")
        if self.fmt not in ("wfdb", "csv"):
            raise UsageError(f"unknown format {self.fmt!r}")
        if self.fmt == "csv" and not (self.fs and self.fs > 0):
            raise UsageError("--fs (a positive sample rate) is required with --format csv")
        if self.channel < 0:
            raise UsageError("--channel must be non-negative")
        if self.notch and not (self.notch_hz > 0 and self.notch_q > 0):
            raise UsageError("--notch-hz and --notch-q must be positive")
        if self.bandpass and not (0 < self.bp_low < self.bp_high and self.bp_order >= 1):
            raise UsageError("band-pass needs 0 < --bp-low < --bp-high and --bp-order >= 1")
        if self.hop is not None and self.hop < 1:
            raise UsageError("--hop must be >= 1")
        if self.nfft is not None:
            if not spectral.is_power_of_two(self.nfft):
                raise UsageError(f"--nfft {self.nfft} is not a power of two")
            if self.nfft < self.window.length_n:
                raise UsageError("--nfft must be at least the window length")
        if self.hist_bins < 1:
            raise UsageError("--bins must be >= 1")
        if self.thd_f0 is not None and not self.thd_f0 > 0:
            raise UsageError("--thd-f0 must be positive")
        if self.thd_harmonics is not None and self.thd_harmonics < 2:
            raise UsageError("--thd-harmonics must be >= 2")
        bad = set(self.emit) - set(EMIT_CHOICES)
        if bad:
            raise UsageError(f"unknown --emit entries: {sorted(bad)}")

    def cascade(self, fs: float) -> filters.BiquadCascade:
        """Notch then band-pass, as configured, for a record sampled at ``fs``."""
        cascade = filters.BiquadCascade((), fs)
        if self.notch:
            cascade = cascade.then(filters.design_notch(filters.NotchDesign(self.notch_hz, self.notch_q, fs)))
        if self.bandpass:
            cascade = cascade.then(
                filters.design_butterworth_bandpass(
                    filters.BandpassDesign(self.bp_low, self.bp_high, self.bp_order, fs)
                )
            )
        return cascade


def _load(cfg: PipelineConfig, path: Path) -> EcgSignal:
    if cfg.fmt == "csv":
        return ingest.read_csv(path, cfg.fs)
    return ingest.read_wfdb(path, cfg.channel)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _samples_csv(x: np.ndarray) -> str:
    return "".join(f"{float(v)!r}\n" for v in x)


def response_table(cascade: filters.BiquadCascade, extra_hz: Sequence[float] = (), n: int = 1025) -> str:
    nyq = cascade.nyquist_hz
    f = np.unique(np.concatenate([np.linspace(0.0, nyq, n), [v for v in extra_hz if 0 <= v <= nyq]]))
    h = filters.frequency_response(cascade, f)
    db = filters.magnitude_db(h)
    phase = np.degrees(np.angle(h))
    rows = ["f_hz,magnitude_db,phase_deg"]
    rows += [f"{float(fi)!r},{di:.6f},{pi:.6f}" for fi, di, pi in zip(f, db, phase)]
    return "\n".join(rows) + "\n"


def _filtered(cfg: PipelineConfig, sig: EcgSignal) -> tuple[EcgSignal, filters.BiquadCascade]:
    cascade = cfg.cascade(sig.sample_rate_hz)
    return filters.apply(cascade, sig), cascade


def run_filter(cfg: PipelineConfig, path: Path) -> str:
    sig = _load(cfg, path)
    out, cascade = _filtered(cfg, sig)
    rid = sig.record_id
    if "csv" in cfg.emit:
        _write(cfg.out_dir / f"{rid}_filtered.csv", _samples_csv(out.samples))
        extra = [cfg.notch_hz] if cfg.notch else []
        _write(cfg.out_dir / f"{rid}_response.csv", response_table(cascade, extra))
    if "json" in cfg.emit:
        _write(cfg.out_dir / f"{rid}_cascade.json", cascade.to_json() + "\n")
    return f"{rid}: filtered {len(out)} samples at {out.sample_rate_hz:g} Hz through {len(cascade.sections)} sections"


def spectrogram_csv(spec, db: bool = False) -> str:
    grid = spectral.to_db(spec.frames) if db else spec.frames
    head = "time_s," + ",".join(f"{f:.9g}" for f in spec.bin_freqs_hz)
    rows = [head]
    for t, row in zip(spec.frame_times_s, grid):
        rows.append(f"{t:.9g}," + ",".join(f"{v:.9g}" for v in row))
    return "\n".join(rows) + "\n"


def spectrogram_pgm(spec) -> bytes:
    """8-bit binary PGM; rows are frames, dB relative to the grid maximum mapped from [-120, 0]."""
    frames = spec.frames
    peak = frames.max()
    if peak > 0:
        db = spectral.to_db(frames, ref=peak)
        pix = np.rint((db - spectral.DB_FLOOR) / -spectral.DB_FLOOR * 255.0)
    else:
        pix = np.zeros_like(frames)
    pix = np.clip(pix, 0, 255).astype(np.uint8)
    h, w = pix.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pix.tobytes()


def histogram_csv(hist) -> str:
    rows = ["bin_low_mv,bin_high_mv,count"]
    rows += [
        f"{float(lo)!r},{float(hi)!r},{int(c)}"
        for lo, hi, c in zip(hist.edges[:-1], hist.edges[1:], hist.counts)
    ]
    return "\n".join(rows) + "\n"


def run_spectrogram(cfg: PipelineConfig, path: Path) -> str:
    sig = _load(cfg, path)
    filtered, _ = _filtered(cfg, sig)
    spec = spectral.stft(filtered, cfg.window, cfg.hop, cfg.nfft)
    rid = sig.record_id
    if "csv" in cfg.emit:
        _write(cfg.out_dir / f"{rid}_spectrogram.csv", spectrogram_csv(spec, cfg.db))
        _write(cfg.out_dir / f"{rid}_histogram.csv", histogram_csv(histogram(filtered, cfg.hist_bins)))
    if "pgm" in cfg.emit:
        p = cfg.out_dir / f"{rid}_spectrogram.pgm"
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(spectrogram_pgm(spec))
    if "json" in cfg.emit:
        meta = {
            "record_id": rid,
            "window": cfg.window.family.value,
            "length_n": cfg.window.length_n,
            "hop": spec.hop_samples,
            "nfft": 2 * (spec.frames.shape[1] - 1),
            "n_frames": spec.n_frames,
            "n_bins": spec.frames.shape[1],
        }
        _write(cfg.out_dir / f"{rid}_spectrogram.json", json.dumps(meta, indent=2) + "\n")
    return f"{rid}: {spec.n_frames} frames x {spec.frames.shape[1]} bins"


def _thd_summary(cfg: PipelineConfig, sig: EcgSignal, report: features.FeatureReport) -> dict:
    f0 = cfg.thd_f0 or (report.hbr_bpm / 60.0 if report.hbr_bpm else None)
    if f0 is None:
        return {"thd_percent": None, "reason": "no fundamental: no heart rate and no --thd-f0"}
    n_max = cfg.thd_harmonics or spectral.max_harmonic(f0, sig.sample_rate_hz)
    if n_max < 2:
        return {"thd_percent": None, "reason": f"no harmonic of {f0:g} Hz below Nyquist"}
    try:
        return spectral.thd(sig, f0, n_max).to_dict()
    except (DegenerateFundamentalError, SignalRangeError) as exc:
        return {"thd_percent": None, "fundamental_hz": f0, "reason": str(exc)}


def run_analyze(cfg: PipelineConfig, path: Path) -> str:
    sig = _load(cfg, path)
    filtered, _ = _filtered(cfg, sig)
    beats = detect.detect_r_peaks(filtered)
    if len(beats):
        beats = detect.delineate_pqst(filtered, beats)
    report = features.build_report(filtered, beats)
    thd = _thd_summary(cfg, filtered, report)
    rid = sig.record_id
    if "csv" in cfg.emit:
        _write(cfg.out_dir / f"{rid}_annotations.csv", beats.to_csv())
    if "json" in cfg.emit:
        _write(cfg.out_dir / f"{rid}_features.json", report.to_json() + "\n")
        _write(cfg.out_dir / f"{rid}_thd.json", json.dumps(thd, indent=2) + "\n")
    hbr = "n/a" if report.hbr_bpm is None else f"{report.hbr_bpm:.2f}"
    thd_s = "n/a" if thd.get("thd_percent") is None else f"{thd['thd_percent']:.2f}%"
    extra = f" [{', '.join(report.violations)}]" if report.violations else ""
    return f"{rid} hbr={hbr} bpm verdict={report.verdict.value}{extra} thd={thd_s}"


def run_design(args) -> str:
    p = filters.TwinTParams(args.r, args.c)
    w0 = p.omega0
    lines = [
        f"R = {args.r:g} ohm, C = {args.c:g} F",
        f"f_notch = 1/(2 pi R C) = {filters.twin_t_notch_frequency(p):.4f} Hz",
        f"1/RC = {w0:.4f} rad/s",
        f"(1/RC)^2 = {w0 * w0:.6g}",
    ]
    for variant in filters.TwinTVariant:
        tf = filters.twin_t_transfer_function(p, variant)
        b2, b1, b0 = tf.num
        a2, a1, a0 = tf.den
        lines.append(
            f"H_{variant.value}(s) = ({b2:g} s^2 + {b1:.6g} s + {b0:.6g}) / "
            f"({a2:g} s^2 + {a1:.6g} s + {a0:.6g});  |H(j w0)| = {tf.magnitude(w0):.6g}"
        )
    if args.export:
        fs = args.fs
        cascade = filters.design_notch(filters.NotchDesign(args.notch_hz, args.notch_q, fs))
        if not args.no_bandpass:
            cascade = cascade.then(
                filters.design_butterworth_bandpass(
                    filters.BandpassDesign(args.bp_low, args.bp_high, args.bp_order, fs)
                )
            )
        Path(args.export).parent.mkdir(parents=True, exist_ok=True)
        cascade.save(args.export)
        lines.append(f"wrote {len(cascade.sections)} sections at {fs:g} Hz to {args.export}")
    return "\n".join(lines)


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", action="append", required=True, type=Path,
                   help="record header (.hea) or CSV file; repeat for several records")
    p.add_argument("--format", dest="fmt", choices=("wfdb", "csv"), default="wfdb")
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--fs", type=float, help="sample rate in Hz (csv only)")
    p.add_argument("--notch-hz", type=float, default=filters.DEFAULT_NOTCH_HZ)
    p.add_argument("--notch-q", type=float, default=30.0)
    p.add_argument("--no-notch", action="store_true")
    p.add_argument("--bp-low", type=float, default=0.5)
    p.add_argument("--bp-high", type=float, default=40.0)
    p.add_argument("--bp-order", type=int, default=3)
    p.add_argument("--no-bandpass", action="store_true")
    p.add_argument("--window", choices=[f.value for f in spectral.WindowFamily], default="hamming")
    p.add_argument("--wlen", type=int, default=256)
    p.add_argument("--beta", type=float, default=8.6)
    p.add_argument("--sigma", type=float, default=0.4)
    p.add_argument("--hop", type=int)
    p.add_argument("--nfft", type=int)
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--emit", default=",".join(EMIT_CHOICES),
                   help="comma-separated subset of csv,json,pgm")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecgkit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="notch + band-pass filter records")
    _add_pipeline_flags(p)

    p = sub.add_parser("spectrogram", help="STFT grid and amplitude histogram")
    _add_pipeline_flags(p)
    p.add_argument("--bins", type=int, default=50, help="histogram bin count")
    p.add_argument("--db", action="store_true", help="write spectrogram CSV in dB")

    p = sub.add_parser("analyze", help="detect beats, delineate, compute features and verdict")
    _add_pipeline_flags(p)
    p.add_argument("--thd-f0", type=float, help="THD fundamental (default: heart rate)")
    p.add_argument("--thd-harmonics", type=int, help="highest harmonic in THD (default: up to 10)")

    p = sub.add_parser("design", help="print Twin-T design numbers; optionally export a cascade")
    p.add_argument("--r", type=float, default=32e3, help="Twin-T resistance in ohm")
    p.add_argument("--c", type=float, default=100e-9, help="Twin-T capacitance in farad")
    p.add_argument("--export", type=Path, help="write notch(+band-pass) cascade JSON here")
    p.add_argument("--fs", type=float, default=360.0)
    p.add_argument("--notch-hz", type=float, default=filters.DEFAULT_NOTCH_HZ)
    p.add_argument("--notch-q", type=float, default=30.0)
    p.add_argument("--bp-low", type=float, default=0.5)
    p.add_argument("--bp-high", type=float, default=40.0)
    p.add_argument("--bp-order", type=int, default=3)
    p.add_argument("--no-bandpass", action="store_true")
    return parser


def config_from_args(args) -> PipelineConfig:
    window = spectral.WindowSpec(args.window, args.wlen, args.beta, args.sigma)
    emit = frozenset(e.strip() for e in args.emit.split(",") if e.strip())
    return PipelineConfig(
        inputs=tuple(args.input),
        fmt=args.fmt,
        channel=args.channel,
        fs=args.fs,
        notch_hz=args.notch_hz,
        notch_q=args.notch_q,
        notch=not args.no_notch,
        bp_low=args.bp_low,
        bp_high=args.bp_high,
        bp_order=args.bp_order,
        bandpass=not args.no_bandpass,
        window=window,
        hop=args.hop,
        nfft=args.nfft,
        out_dir=args.out_dir,
        emit=emit,
        hist_bins=getattr(args, "bins", 50),
        db=getattr(args, "db", False),
        thd_f0=getattr(args, "thd_f0", None),
        thd_harmonics=getattr(args, "thd_harmonics", None),
    )


def worker_count(n_jobs: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return max(1, min(limit, n_jobs))


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (IngestError, OSError)):
        return EXIT_IO
    return EXIT_VALIDATION


def _run_records(cfg: PipelineConfig, job: Callable[[PipelineConfig, Path], str]) -> int:
    def guarded(path):
        try:
            return EXIT_OK, job(cfg, path)
        except (EcgToolkitError, OSError) as exc:
            return _exit_code(exc), f"{path}: {exc}"

    with ThreadPoolExecutor(max_workers=worker_count(len(cfg.inputs))) as pool:
        results = list(pool.map(guarded, cfg.inputs))
    code = EXIT_OK
    for rc, message in results:
        if rc == EXIT_OK:
            print(message)
        else:
            print(f"error: {message}", file=sys.stderr)
            code = max(code, rc)
    return code


JOBS = {"filter": run_filter, "spectrogram": run_spectrogram, "analyze": run_analyze}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "design":
            print(run_design(args))
            return EXIT_OK
        cfg = config_from_args(args)
        cfg.validate()
        worker_count(len(cfg.inputs))
    except (EcgToolkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    return _run_records(cfg, JOBS[args.command])


if __name__ == "__main__":
    sys.exit(main())
