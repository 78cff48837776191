"""ECG denoising, spectral analysis, R-peak detection and rule-based feature checks."""

from .detect import BeatAnnotations, Landmarks, PanTompkinsConfig, delineate_pqst, detect_r_peaks
from .features import FeatureReport, NormalityRules, Verdict, build_report, classify
from .filters import (
    BandpassDesign,
    BiquadCascade,
    NotchDesign,
    TwinTParams,
    apply,
    design_butterworth_bandpass,
    design_notch,
    frequency_response,
    twin_t_notch_frequency,
    twin_t_transfer_function,
)
from .ingest import read_csv, read_wfdb
from .signal_model import EcgSignal, histogram, slice_signal
from .spectral import WindowSpec, fft, make_window, stft, thd

__version__ = "0.1.0"
