"""Exit criteria for the toolkit, one test per criterion.

Each test prints a single ``[PASS]`` or ``[FAIL]`` line (also repeated in the
terminal summary) and then asserts every check it made.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from ecgkit.detect import BeatAnnotations, Landmarks, detect_r_peaks
from ecgkit.features import Verdict, build_report
from ecgkit.filters import (
    BandpassDesign,
    NotchDesign,
    TwinTParams,
    TwinTVariant,
    apply,
    design_butterworth_bandpass,
    design_notch,
    frequency_response,
    impulse_response,
    magnitude_db,
    prewarped_edges_hz,
    twin_t_notch_frequency,
    twin_t_transfer_function,
)
from ecgkit.ingest import decode_212, encode_212, read_wfdb
from ecgkit.signal_model import EcgSignal
from ecgkit.spectral import WindowFamily, WindowSpec, dft, fft, make_window, thd
from ecgkit.synthetic import beat_times, sine, synthetic_ecg

pytestmark = pytest.mark.acceptance


def report(tag: str, title: str, checks: list[tuple[str, bool]]) -> None:
    ok = all(passed for _, passed in checks)
    detail = "; ".join(f"{name}{'' if passed else ' FAILED'}" for name, passed in checks)
    line = f"[{'PASS' if ok else 'FAIL'}] {tag} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    failed = [name for name, passed in checks if not passed]
    assert not failed, f"{tag} failed checks: {failed}"


def rel_close(value, target, rel):
    return abs(value - target) <= rel * abs(target)


def test_ac01_twin_t_design_numbers():
    t0 = time.perf_counter()
    p = TwinTParams(32e3, 100e-9)
    f = twin_t_notch_frequency(p)
    w0 = p.omega0
    w0sq = w0 * w0
    elapsed = time.perf_counter() - t0
    report("AC1", "Twin-T design numbers", [
        (f"f_notch={f:.4f} Hz vs 49.74", rel_close(f, 49.74, 1e-3)),
        (f"1/RC={w0:.4f} vs 312.5", rel_close(w0, 312.5, 1e-3)),
        (f"(1/RC)^2={w0sq:.5g} vs 9.766e4", rel_close(w0sq, 9.766e4, 1e-3)),
        (f"runtime {elapsed * 1e3:.3f} ms < 1 ms", elapsed < 1e-3),
    ])


def test_ac02_notch_behaviour():
    fs = 360.0
    t0 = time.perf_counter()
    cascade = design_notch(NotchDesign(50.0, 30.0, fs))
    tail = slice(int(5 * fs), int(10 * fs))

    def gain_db(freq):
        x = sine(freq, 10.0, fs)
        y = apply(cascade, x).samples
        rms_in = np.sqrt(np.mean(x.samples[tail] ** 2))
        rms_out = np.sqrt(np.mean(y[tail] ** 2))
        return 20 * math.log10(rms_out / rms_in)

    g50, g10 = gain_db(50.0), gain_db(10.0)
    elapsed = time.perf_counter() - t0
    report("AC2", "50 Hz notch at 360 Hz", [
        (f"50 Hz attenuation {-g50:.1f} dB >= 40", -g50 >= 40.0),
        (f"10 Hz change {g10:+.4f} dB within 0.5", abs(g10) <= 0.5),
        (f"runtime {elapsed:.3f} s < 1 s", elapsed < 1.0),
    ])


def test_ac03_butterworth_contract():
    design = BandpassDesign(0.5, 40.0, 3, 360.0)
    cascade = design_butterworth_bandpass(design)
    lo, hi = prewarped_edges_hz(design)
    edge_db = magnitude_db(frequency_response(cascade, [lo, hi]))
    dc_db = magnitude_db(frequency_response(cascade, [0.0]))[0]

    # independent route: FFT of a long impulse response sampled on the same grid
    n = 1 << 16
    h_imp = np.fft.fft(impulse_response(cascade, n))
    grid = np.arange(n // 2 + 1) * design.sample_rate_hz / n
    h_fr = frequency_response(cascade, grid)
    oracle_err = float(np.max(np.abs(h_imp[: n // 2 + 1] - h_fr)))
    k_lo, k_hi = (int(round(f * n / design.sample_rate_hz)) for f in (lo, hi))
    fft_edges = 20 * np.log10(np.abs(h_imp[[k_lo, k_hi]]))
    report("AC3", "Butterworth 0.5-40 Hz order 3", [
        (f"edge gains {edge_db[0]:.4f}/{edge_db[1]:.4f} dB = -3 +/- 0.1",
         bool(np.all(np.abs(edge_db + 3.0) <= 0.1))),
        (f"DC {dc_db:.1f} dB < -60", dc_db < -60.0),
        (f"impulse-FFT max deviation {oracle_err:.2e} <= 1e-3", oracle_err <= 1e-3),
        (f"impulse-FFT edges {fft_edges[0]:.3f}/{fft_edges[1]:.3f} dB = -3 +/- 0.1",
         bool(np.all(np.abs(fft_edges + 3.0) <= 0.1))),
    ])


def test_ac04_fft_matches_dft():
    rng = np.random.default_rng(4)
    worst_rel, worst_parseval = 0.0, 0.0
    sizes = [1 << k for k in range(1, 9)]
    for n in sizes:
        for _ in range(100):
            x = rng.normal(size=n) + 1j * rng.normal(size=n)
            got = fft(x).bins
            ref = dft(x)
            worst_rel = max(worst_rel, float(np.max(np.abs(got - ref)) / np.max(np.abs(ref))))
            e_time = float(np.sum(np.abs(x) ** 2))
            e_freq = float(np.sum(np.abs(got) ** 2)) / n
            worst_parseval = max(worst_parseval, abs(e_freq - e_time) / e_time)
    report("AC4", "radix-2 FFT vs direct DFT", [
        (f"sizes {sizes[0]}..{sizes[-1]} x 100 frames, max rel error {worst_rel:.2e} <= 1e-9", worst_rel <= 1e-9),
        (f"Parseval max rel error {worst_parseval:.2e} <= 1e-9", worst_parseval <= 1e-9),
    ])


def test_ac05_window_values():
    ham = make_window(WindowSpec(WindowFamily.HAMMING, 4))
    ham_err = float(np.max(np.abs(ham - [0.08, 0.77, 0.77, 0.08])))
    black_ends = max(
        float(max(abs(w[0]), abs(w[-1])))
        for w in (make_window(WindowSpec(WindowFamily.BLACKMAN, n)) for n in (2, 3, 4, 7, 64, 256, 1001))
    )
    kaiser_err = max(
        float(np.max(np.abs(make_window(WindowSpec(WindowFamily.KAISER, n, beta=0.0)) - 1.0)))
        for n in (2, 5, 64, 257)
    )
    report("AC5", "window values", [
        (f"Hamming N=4 max deviation {ham_err:.1e} <= 1e-12", ham_err <= 1e-12),
        (f"Blackman endpoints max {black_ends:.1e} (= 0)", black_ends <= 1e-15),
        (f"Kaiser beta=0 max |w-1| {kaiser_err:.1e} (= 0)", kaiser_err <= 1e-15),
    ])


def test_ac06_thd():
    checks = []
    fs = 360.0
    for f0 in (5.0, 1.23):
        t = np.arange(int(20 * fs)) / fs
        two_tone = EcgSignal(np.sin(2 * np.pi * f0 * t) + 0.1 * np.sin(2 * np.pi * 3 * f0 * t), fs)
        pure = EcgSignal(np.sin(2 * np.pi * f0 * t + 0.3), fs)
        got = thd(two_tone, f0, 5).thd_percent
        clean = thd(pure, f0, 5).thd_percent
        checks.append((f"f0={f0} Hz two-tone {got:.4f}% = 10 +/- 0.2", abs(got - 10.0) <= 0.2))
        checks.append((f"f0={f0} Hz pure tone {clean:.2e}% <= 0.1", clean <= 0.1))
    report("AC6", "total harmonic distortion", checks)


def test_ac07_pan_tompkins_desk_scale():
    fs, duration, bpm = 360.0, 60.0, 75.0
    expected = len(beat_times(duration, bpm))
    t0 = time.perf_counter()
    counts, rates = [], []
    for seed in range(100):
        beats = detect_r_peaks(synthetic_ecg(duration, fs, bpm, snr_db=20.0, seed=seed))
        counts.append(len(beats))
        rates.append(60.0 / np.mean(beats.rr_intervals_s) if len(beats) > 1 else 0.0)
    elapsed = time.perf_counter() - t0
    counts, rates = np.array(counts), np.array(rates)
    count_bad = int(np.sum(np.abs(counts - expected) > 1))
    rate_bad = int(np.sum(np.abs(rates - bpm) > 1.0))
    report("AC7", "Pan-Tompkins on 100 seeded 75 bpm records", [
        (f"beat count within +/-1 of {expected} for {100 - count_bad}/100 seeds "
         f"(range {counts.min()}..{counts.max()})", count_bad == 0),
        (f"HBR 75 +/- 1 for {100 - rate_bad}/100 seeds (range {rates.min():.2f}..{rates.max():.2f})",
         rate_bad == 0),
        (f"synthesis + detection runtime {elapsed:.2f} s < 5 s", elapsed < 5.0),
    ])


def constructed_report(bpm=75.0, pr=0.16, qrs=0.08, st=0.30, n_beats=10, fs=1000.0):
    rr = int(round(60.0 * fs / bpm))
    r = 400 + rr * np.arange(n_beats)
    half_qrs = int(round(qrs * fs / 2))
    lms = []
    for ri in r:
        q, s = ri - half_qrs, ri + (int(round(qrs * fs)) - half_qrs)
        lms.append(Landmarks(p=q - int(round(pr * fs)), q=int(q), s=int(s), t=int(s + round(st * fs))))
    beats = BeatAnnotations(r, fs, tuple(lms))
    signal = EcgSignal(np.zeros(int(r[-1] + rr)), fs, "constructed")
    return build_report(signal, beats)


def test_ac08_classification_rules():
    base = constructed_report()
    cases = {
        "heart-rate": constructed_report(bpm=100.0),
        "pr-interval": constructed_report(pr=0.25),
        "qrs-duration": constructed_report(qrs=0.14),
        "st-interval": constructed_report(st=0.45),
    }
    checks = [(f"baseline verdict {base.verdict.value}, violations {list(base.violations)}",
               base.verdict is Verdict.NORMAL and base.violations == ())]
    for name, rep in cases.items():
        checks.append((f"perturb {name} -> {rep.verdict.value} {list(rep.violations)}",
                       rep.verdict is Verdict.ABNORMAL and rep.violations == (name,)))
    report("AC8", "rule-based classification", checks)


def test_ac09_format_212(tmp_path):
    rng = np.random.default_rng(9)
    raw = rng.integers(0, 256, size=3 * 100_000, dtype=np.uint8).tobytes()
    round_trip = encode_212(decode_212(raw, 200_000)) == raw

    n = 650_000
    values = rng.integers(-2048, 2048, size=n)
    (tmp_path / "100.dat").write_bytes(encode_212(values))
    (tmp_path / "100.hea").write_text(
        f"100 1 360 {n}\n100.dat 212 200 12 0 0 0 0 MLII\n"
    )
    sig = read_wfdb(tmp_path / "100.hea")
    exact = np.array_equal(np.rint(sig.samples * 200.0).astype(int), values)
    report("AC9", "format 212 storage", [
        ("encode(decode(b)) == b over 1e5 random 3-byte groups", round_trip),
        (f"650000-sample header ingests {len(sig)} samples", len(sig) == n),
        ("decoded millivolts match the written ADC codes", exact),
    ])


def test_ac10_literal_transfer_function():
    p = TwinTParams(32e3, 100e-9)
    lit = float(twin_t_transfer_function(p, TwinTVariant.LITERAL).magnitude(p.omega0))
    can = float(twin_t_transfer_function(p, TwinTVariant.CANONICAL).magnitude(p.omega0))
    report("AC10", "Twin-T transfer-function variants at w0", [
        (f"|H_literal(j w0)| = {lit:.6f} = 1.414 +/- 0.01", abs(lit - 1.414) <= 0.01),
        (f"|H_canonical(j w0)| = {can:.1e} <= 1e-12", can <= 1e-12),
    ])
