"""Oscillation metrics and stable / damped / absent classification."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ..carrier_statistics import _require, _Validated
from .fits import LorentzianFit, fit_lorentzian_peak
from .spectrum import WINDOWS, fft_spectrum
from .traces import TimeTrace

__all__ = [
    "PHASE_CLASSES",
    "Thresholds",
    "AnalysisConfig",
    "OscillationMetrics",
    "window_amplitudes",
    "classify_oscillation",
    "analyze_trace",
]

PHASE_CLASSES = ("stable", "damped", "absent")


@dataclass(frozen=True)
class Thresholds(_Validated):
    """Classification thresholds.

    In ``relative`` mode the strength compared with ``strength`` is
    (A / floor) / (gamma * span): the peak-to-floor power ratio weighted by how
    many linewidths fit in the resolution of the record. It does not change
    when the trace is multiplied by a constant. In ``absolute`` mode the raw
    A/gamma is compared.
    """

    mode: str = "relative"
    strength: float = 50.0
    amplitude_ratio: float = 0.8
    min_modulation: float = 1e-4  # window rms relative to the mean |signal|

    def problems(self):
        out = super().problems()
        _require(out, "mode", self.mode in ("relative", "absolute"),
                 "must be 'relative' or 'absolute'")
        _require(out, "strength", self.strength >= 0, "must be >= 0")
        _require(out, "amplitude_ratio", 0 < self.amplitude_ratio <= 1, "must be in (0, 1]")
        _require(out, "min_modulation", self.min_modulation >= 0, "must be >= 0")
        return out


@dataclass(frozen=True)
class AnalysisConfig(_Validated):
    pad_factor: int = 8
    window: str = "hann"
    band_low: float = 1e5  # Hz
    band_high: float = 1e7  # Hz
    transient_skip: float = 0.1  # fraction of the trace dropped before analysis
    thresholds: Thresholds = field(default_factory=Thresholds)

    def problems(self):
        out = super().problems()
        _require(out, "pad_factor", isinstance(self.pad_factor, int) and 1 <= self.pad_factor <= 64,
                 "must be an integer in [1, 64]")
        _require(out, "window", self.window in WINDOWS, f"must be one of {WINDOWS}")
        _require(out, "band_low", self.band_low >= 0, "must be >= 0")
        _require(out, "band_high", self.band_high > self.band_low, "must exceed band_low")
        _require(out, "transient_skip", 0 <= self.transient_skip < 0.9, "must be in [0, 0.9)")
        return out


@dataclass(frozen=True)
class OscillationMetrics:
    peak_frequency: float  # Hz (nan without a peak)
    amplitude: float  # A, power-spectrum units
    linewidth: float  # gamma, FWHM in Hz (inf without a peak)
    strength: float  # A / gamma
    phase_class: str
    fit_residual: float
    noise_floor: float = math.nan  # median band power
    relative_strength: float = 0.0
    amplitude_ratio: float = math.nan  # late / early rms
    modulation: float = 0.0  # late rms / mean |signal|
    span: float = math.nan  # s, analyzed duration
    candidate_frequency: float = math.nan  # Hz, fitted peak even when classed absent
    candidate_strength: float = 0.0  # its A/gamma

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "OscillationMetrics":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean((x - x.mean()) ** 2)))


def window_amplitudes(trace: TimeTrace) -> Tuple[float, float, float]:
    """(early rms, late rms, mean |signal|) over the first and last quarters."""
    x = trace.samples
    q = max(2, x.size // 4)
    return _rms(x[:q]), _rms(x[-q:]), float(np.mean(np.abs(x)))


def _relative_strength(fit: LorentzianFit, span: float) -> float:
    if fit.absent or not (fit.floor > 0) or not math.isfinite(fit.gamma):
        return 0.0 if fit.absent else math.inf
    return (fit.A / fit.floor) / (fit.gamma * span)


def classify_oscillation(metrics: OscillationMetrics, trace: TimeTrace,
                         thresholds: Thresholds = Thresholds()) -> str:
    """Phase class of ``trace`` (already stripped of its transient).

    stable: strength above threshold and late amplitude >= ratio x early amplitude;
    damped: strength above threshold but the amplitude ratio is lower;
    absent: otherwise, or when the early-window rms relative to the mean
    |signal| is below ``min_modulation`` (a settled trace carrying only
    round-off). A late window below that floor counts as decayed.
    """
    if metrics.amplitude <= 0 or not math.isfinite(metrics.linewidth):
        return "absent"
    if thresholds.mode == "relative":
        s = _relative_strength(LorentzianFit(metrics.amplitude, metrics.linewidth,
                                             metrics.peak_frequency, 0.0, 0.0,
                                             metrics.noise_floor), trace.duration)
    else:
        s = metrics.strength
    if not (s > thresholds.strength):
        return "absent"
    early, late, level = window_amplitudes(trace)
    if early <= 0:
        return "absent"
    mod_early = early / level if level > 0 else math.inf
    if mod_early < thresholds.min_modulation:
        return "absent"
    mod_late = late / level if level > 0 else math.inf
    if late >= thresholds.amplitude_ratio * early and mod_late >= thresholds.min_modulation:
        return "stable"
    return "damped"


def analyze_trace(trace: TimeTrace, config: AnalysisConfig = AnalysisConfig()
                  ) -> OscillationMetrics:
    """Transient skip, padded FFT, Lorentzian fit and classification of one trace.

    Cells classed ``absent`` report zero amplitude and strength, infinite
    linewidth and no peak frequency; a rejected spectral peak is kept in the
    ``candidate_*`` fields.
    """
    skip = config.transient_skip * trace.duration
    body = trace.window(skip, trace.duration) if skip > 0 else trace
    spec = fft_spectrum(body, config.pad_factor, config.window)
    hi = min(config.band_high, float(spec.freqs[-1]))
    fit = fit_lorentzian_peak(spec, (config.band_low, hi))
    early, late, level = window_amplitudes(body)
    ratio = late / early if early > 0 else math.nan
    mod = late / level if level > 0 else 0.0
    strength = fit.A / fit.gamma
    m = OscillationMetrics(fit.f0, fit.A, fit.gamma, strength, "absent", fit.residual,
                           fit.floor, _relative_strength(fit, body.duration), ratio, mod,
                           body.duration)
    cls = classify_oscillation(m, body, config.thresholds)
    if cls == "absent":
        # no oscillation: zero strength, no line; the rejected peak stays as a candidate
        return OscillationMetrics(math.nan, 0.0, math.inf, 0.0, cls, fit.residual, fit.floor,
                                  0.0, ratio, mod, body.duration, fit.f0,
                                  0.0 if fit.absent else strength)
    return OscillationMetrics(fit.f0, fit.A, fit.gamma, strength, cls, fit.residual, fit.floor,
                              m.relative_strength, ratio, mod, body.duration, fit.f0, strength)
