import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import signal as sps

from ecgkit.errors import ConfigurationError, DesignError, SignalRangeError
from ecgkit.filters import (
    CANONICAL_TWIN_T_Q,
    IDENTITY,
    NOTCH_PRESETS,
    BandpassDesign,
    Biquad,
    BiquadCascade,
    NotchDesign,
    TwinTParams,
    apply,
    butterworth_prototype_poles,
    design_butterworth_bandpass,
    design_notch,
    frequency_response,
    group_delay,
    impulse_response,
    prewarped_edges_hz,
    twin_t_notch_frequency,
    twin_t_transfer_function,
)
from ecgkit.signal_model import EcgSignal
from ecgkit.synthetic import sine

GOLDEN = json.loads((Path(__file__).parent / "golden" / "notch_50hz_q30_fs360.json").read_text())
REFERENCE_RC = TwinTParams(32e3, 100e-9)


def df2t_reference(b, a, x):
    """Sample-by-sample direct form II transposed, zero initial state."""
    z1 = z2 = 0.0
    y = []
    for xn in x:
        yn = b[0] * xn + z1
        z1 = b[1] * xn - a[1] * yn + z2
        z2 = b[2] * xn - a[2] * yn
        y.append(yn)
    return np.array(y)


def rms(x):
    return float(np.sqrt(np.mean(np.square(x))))


# --- Twin-T analysis -------------------------------------------------------


def test_twin_t_notch_frequency():
    assert twin_t_notch_frequency(REFERENCE_RC) == pytest.approx(49.736, abs=0.01)
    assert twin_t_notch_frequency(TwinTParams(1 / (2 * math.pi), 1.0)) == pytest.approx(1.0, rel=1e-15)
    # halving R doubles f
    expected = 1 / (2 * math.pi * 16e3 * 100e-9)
    assert twin_t_notch_frequency(TwinTParams(16e3, 100e-9)) == pytest.approx(expected, rel=1e-15)
    assert expected == pytest.approx(99.47, abs=0.01)


def test_twin_t_params_validation():
    with pytest.raises(DesignError):
        TwinTParams(0, 1e-9)
    with pytest.raises(DesignError):
        TwinTParams(1e3, -1e-9)


def test_literal_transfer_function_coefficients():
    tf = twin_t_transfer_function(REFERENCE_RC, "literal")
    assert tf.num == (1.0, 312.5, 0.0)
    assert tf.den[1] == pytest.approx(312.5)
    assert tf.den[2] == pytest.approx(9.77e4, rel=1e-3)
    # gain sqrt(2) at w0: |(-w0^2 + j w0^2) / (j w0^2)|
    assert tf.magnitude(REFERENCE_RC.omega0) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_canonical_transfer_function_nulls_at_w0():
    tf = twin_t_transfer_function(REFERENCE_RC)
    w0 = REFERENCE_RC.omega0
    assert tf.den[1] == pytest.approx(w0 / CANONICAL_TWIN_T_Q)
    assert tf.magnitude(w0) <= 1e-12
    assert tf.magnitude(0.0) == pytest.approx(1.0)
    assert tf.magnitude(1e6 * w0) == pytest.approx(1.0, abs=1e-5)


def test_unknown_variant():
    with pytest.raises(ValueError):
        twin_t_transfer_function(REFERENCE_RC, "bogus")


# --- digital notch ---------------------------------------------------------


@pytest.fixture(scope="module")
def notch50():
    return design_notch(NotchDesign(50.0, 30.0, 360.0))


def test_notch_examples(notch50):
    h = np.abs(frequency_response(notch50, [50.0, 0.0, 45.0, 55.0]))
    assert h[0] < 1e-6
    assert h[1] == pytest.approx(1.0, abs=1e-9)
    assert h[2] >= 0.7 and h[3] >= 0.7


def test_notch_matches_golden_oracle(notch50):
    for f, mag in GOLDEN["magnitude"].items():
        assert abs(frequency_response(notch50, [float(f)])[0]) == pytest.approx(mag, abs=1e-12)
    lo, hi = GOLDEN["minus3db_edges_hz"]
    edges = np.abs(frequency_response(notch50, [lo, hi]))
    np.testing.assert_allclose(edges, 1 / math.sqrt(2), atol=1e-9)


def test_notch_structure(notch50):
    (sec,) = notch50.sections
    assert notch50.poles().size == 2 and notch50.zeros().size == 2
    np.testing.assert_allclose(np.abs(notch50.zeros()), 1.0, atol=1e-12)
    w0 = 2 * math.pi * 50 / 360
    np.testing.assert_allclose(sorted(np.angle(notch50.zeros())), [-w0, w0], atol=1e-9)
    np.testing.assert_allclose(np.abs(notch50.poles()), 1 - w0 / 60, atol=1e-12)


def test_notch_presets():
    assert NOTCH_PRESETS == {"50hz": 50.0, "60hz": 60.0, "40hz": 40.0}
    assert NotchDesign().notch_hz == 50.0


@pytest.mark.parametrize("kwargs", [dict(notch_hz=180.0), dict(notch_hz=200.0), dict(notch_hz=0.0), dict(quality_q=0.0)])
def test_notch_design_errors(kwargs):
    with pytest.raises(DesignError):
        NotchDesign(**{"notch_hz": 50.0, "quality_q": 30.0, "sample_rate_hz": 360.0, **kwargs})


@settings(max_examples=200, deadline=None)
@given(st.floats(100.0, 2000.0), st.floats(0.002, 0.7), st.floats(5.0, 200.0))
def test_notch_depth_property(fs, frac, q):
    c = design_notch(NotchDesign(frac * fs / 2, q, fs))
    h = np.abs(frequency_response(c, [frac * fs / 2, 0.0, 0.95 * fs / 2]))
    assert h[0] < 1e-6
    assert h[1] >= 0.9 and h[2] >= 0.9
    assert c.is_stable()


@settings(max_examples=200, deadline=None)
@given(st.floats(50.0, 2000.0), st.floats(0.001, 0.999), st.floats(0.05, 500.0))
def test_notch_always_stable(fs, frac, q):
    c = design_notch(NotchDesign(frac * fs / 2, q, fs))
    assert c.is_stable()


# --- Butterworth band-pass -------------------------------------------------


@pytest.fixture(scope="module")
def ecg_bandpass():
    return design_butterworth_bandpass(BandpassDesign(0.5, 40.0, 3, 360.0))


def test_prototype_poles_order3():
    p = butterworth_prototype_poles(3)
    np.testing.assert_allclose(np.abs(p), 1.0)
    np.testing.assert_allclose(sorted(np.angle(p) % (2 * math.pi)), [2 * math.pi / 3, math.pi, 4 * math.pi / 3])
    assert np.all(p.real < 0)


def test_bandpass_examples(ecg_bandpass):
    assert len(ecg_bandpass.sections) == 3
    assert abs(frequency_response(ecg_bandpass, [0.0])[0]) < 1e-3
    centre = math.sqrt(0.5 * 40.0)
    assert abs(20 * math.log10(abs(frequency_response(ecg_bandpass, [centre])[0]))) < 1.0
    edges = prewarped_edges_hz(BandpassDesign(0.5, 40.0, 3, 360.0))
    np.testing.assert_allclose(edges, [0.5, 40.0], rtol=1e-12)
    np.testing.assert_allclose(np.abs(frequency_response(ecg_bandpass, edges)), 1 / math.sqrt(2), atol=0.01)
    assert ecg_bandpass.is_stable()


@pytest.mark.parametrize(
    "lo, hi, order, fs",
    [(0.5, 40, 3, 360), (5, 15, 2, 360), (0.5, 40, 3, 128), (0.5, 40, 3, 250), (1, 100, 5, 1000), (10, 11, 1, 200)],
)
def test_bandpass_matches_scipy(lo, hi, order, fs):
    # scipy.signal.butter pre-warps both edges too, so responses must agree
    ours = design_butterworth_bandpass(BandpassDesign(lo, hi, order, fs))
    sos = sps.butter(order, [lo, hi], "bandpass", fs=fs, output="sos")
    f = np.linspace(0, fs / 2, 1500)
    _, ref = sps.sosfreqz(sos, worN=f, fs=fs)
    np.testing.assert_allclose(frequency_response(ours, f), ref, atol=1e-9)


@pytest.mark.parametrize("kwargs", [dict(high_hz=180.0), dict(high_hz=250.0), dict(low_hz=50.0), dict(order=0), dict(low_hz=0.0)])
def test_bandpass_design_errors(kwargs):
    with pytest.raises(DesignError):
        BandpassDesign(**{"low_hz": 0.5, "high_hz": 40.0, "order": 3, "sample_rate_hz": 360.0, **kwargs})


@settings(max_examples=60, deadline=None)
@given(st.floats(100.0, 1000.0), st.floats(0.001, 0.3), st.floats(0.35, 0.95), st.integers(1, 6))
def test_bandpass_always_stable(fs, lo_frac, hi_frac, order):
    nyq = fs / 2
    c = design_butterworth_bandpass(BandpassDesign(lo_frac * nyq, hi_frac * nyq, order, fs))
    assert c.is_stable()
    assert len(c.sections) == order


# --- apply / frequency_response -------------------------------------------


def test_apply_zero_and_identity():
    ident = BiquadCascade((IDENTITY,), 100.0)
    zero = EcgSignal(np.zeros(50), 100.0)
    assert np.all(apply(design_notch(NotchDesign(10, 5, 100)), zero).samples == 0)
    impulse = np.zeros(20)
    impulse[0] = 1
    np.testing.assert_array_equal(apply(ident, EcgSignal(impulse, 100.0)).samples, impulse)


def test_apply_rate_mismatch(notch50):
    with pytest.raises(ConfigurationError):
        apply(notch50, EcgSignal(np.zeros(10), 250.0))


def test_apply_matches_df2t_reference(ecg_bandpass, rng):
    x = rng.normal(size=500)
    y = x
    for s in ecg_bandpass.sections:
        y = df2t_reference(s.b, s.a, y)
    out = apply(ecg_bandpass, EcgSignal(x, 360.0)).samples
    assert out.size == x.size
    np.testing.assert_allclose(out, y, rtol=1e-12, atol=1e-14)


def test_steady_state_notch_attenuation(notch50):
    tone = sine(50.0, 10.0, 360.0, amplitude=1.0)
    out = apply(notch50, tone).samples
    tail = slice(5 * 360, None)
    assert rms(out[tail]) < 0.01 * rms(tone.samples[tail])
    # oracle: the steady-state gain equals the response magnitude at 50 Hz
    assert abs(frequency_response(notch50, [50.0])[0]) < 1e-6


def test_frequency_response_identity_and_range():
    ident = BiquadCascade((IDENTITY,), 200.0)
    np.testing.assert_array_equal(frequency_response(ident, [0, 33.3, 100]), [1, 1, 1])
    with pytest.raises(SignalRangeError):
        frequency_response(ident, [100.5])
    with pytest.raises(SignalRangeError):
        frequency_response(ident, [-1.0])


def random_stable_biquad(rng, max_radius=0.95):
    r = rng.uniform(0.05, max_radius, 2)
    theta = rng.uniform(0, math.pi)
    if rng.random() < 0.5:
        p = [r[0] * np.exp(1j * theta), r[0] * np.exp(-1j * theta)]
    else:
        p = [r[0] * rng.choice([-1, 1]), r[1] * rng.choice([-1, 1])]
    a = np.real(np.poly(p))
    return Biquad(tuple(rng.normal(size=3)), tuple(a))


def test_response_matches_impulse_fft(rng):
    for _ in range(10):
        c = BiquadCascade((random_stable_biquad(rng),), 1000.0)
        ir = impulse_response(c, 8192)
        spec = np.abs(np.fft.fft(ir))[: 4097]
        f = np.arange(4097) * 1000.0 / 8192
        np.testing.assert_allclose(np.abs(frequency_response(c, f)), spec, atol=1e-3)


def test_group_delay_matches_phase_derivative(ecg_bandpass):
    f = np.linspace(1.0, 100.0, 40)
    df = 1e-4
    phase = lambda ff: np.unwrap(np.angle(frequency_response(ecg_bandpass, ff)))
    numeric = -(phase(f + df) - phase(f - df)) / (2 * df) * 360.0 / (2 * math.pi)
    np.testing.assert_allclose(group_delay(ecg_bandpass, f), numeric, rtol=1e-5, atol=1e-5)


@st.composite
def stable_cascades(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, 3))
    rng = np.random.default_rng(seed)
    return BiquadCascade(tuple(random_stable_biquad(rng) for _ in range(n)), 360.0)


@settings(max_examples=50, deadline=None)
@given(stable_cascades(), st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**32 - 1))
def test_linearity(cascade, alpha, beta, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=300), rng.normal(size=300)
    lhs = apply(cascade, EcgSignal(alpha * x + beta * y, 360.0)).samples
    rhs = alpha * apply(cascade, EcgSignal(x, 360.0)).samples + beta * apply(cascade, EcgSignal(y, 360.0)).samples
    scale = max(1.0, np.max(np.abs(rhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * scale


def test_cascade_json_round_trip_bit_exact(ecg_bandpass, notch50, tmp_path):
    c = notch50.then(ecg_bandpass)
    back = BiquadCascade.from_json(c.to_json())
    assert back == c
    for s0, s1 in zip(c.sections, back.sections):
        assert [v.hex() for v in s0.b + s0.a] == [v.hex() for v in s1.b + s1.a]
    doc = json.loads(c.to_json())
    assert set(doc) == {"sections", "fs"} and set(doc["sections"][0]) == {"b", "a"}
    c.save(tmp_path / "c.json")
    assert BiquadCascade.load(tmp_path / "c.json") == c


def test_then_rejects_rate_mismatch(notch50):
    with pytest.raises(ConfigurationError):
        notch50.then(design_notch(NotchDesign(50, 30, 500)))


def test_biquad_requires_normalised_feedback():
    with pytest.raises(DesignError):
        Biquad((1, 0, 0), (2, 0, 0))
