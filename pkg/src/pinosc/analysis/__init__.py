"""Spectral analysis, fits, oscillation classification and phase maps."""
from .fits import (BiexponentialFit, DampedCosineFit, FitFailure, LorentzianFit,
                   fit_biexponential, fit_damped_cosine, fit_lorentzian_peak, lorentzian)
from .oscillation import (PHASE_CLASSES, AnalysisConfig, OscillationMetrics, Thresholds,
                          analyze_trace, classify_oscillation, window_amplitudes)
from .phase_map import PhaseMap, build_phase_map, max_frequency_vs_temperature
from .spectrum import Spectrum, fft_spectrum
from .traces import TimeTrace

__all__ = [
    "BiexponentialFit", "DampedCosineFit", "FitFailure", "LorentzianFit", "fit_biexponential",
    "fit_damped_cosine", "fit_lorentzian_peak", "lorentzian", "PHASE_CLASSES", "AnalysisConfig",
    "OscillationMetrics", "Thresholds", "analyze_trace", "classify_oscillation",
    "window_amplitudes", "PhaseMap", "build_phase_map", "max_frequency_vs_temperature",
    "Spectrum", "fft_spectrum", "TimeTrace",
]
