"""Zero-padded one-sided amplitude spectra."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .traces import TimeTrace

__all__ = ["Spectrum", "fft_spectrum", "WINDOWS"]

WINDOWS = ("rectangular", "hann")


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided spectrum on the grid ``0 .. 1/(2 dt)``.

    ``magnitude`` is scaled so that a sinusoid of amplitude a, centred on a
    bin, peaks at a for either window. ``power`` is its square and is what the
    Lorentzian line fit works on.
    """

    freqs: np.ndarray  # Hz
    magnitude: np.ndarray
    n_samples: int
    n_fft: int
    dt: float
    window: str
    scale: float  # magnitude = |rfft| * scale
    values: Optional[np.ndarray] = None  # complex rfft * scale (None for external spectra)

    @classmethod
    def from_power(cls, freqs, power) -> "Spectrum":
        """Wrap an externally computed power spectrum (e.g. a synthetic line shape)."""
        freqs = np.asarray(freqs, dtype=float)
        power = np.asarray(power, dtype=float)
        if freqs.shape != power.shape or freqs.ndim != 1 or freqs.size < 3:
            raise ValueError("freqs and power must be equal-length 1-D arrays with >= 3 points")
        df = freqs[1] - freqs[0]
        n = 2 * (freqs.size - 1)
        return cls(freqs, np.sqrt(np.maximum(power, 0.0)), n, n, 1.0 / (n * df), "external", 1.0)

    @property
    def power(self) -> np.ndarray:
        return self.magnitude ** 2

    @property
    def bin_width(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    def band(self, lo: float, hi: float):
        """Boolean mask of bins with lo <= f <= hi."""
        return (self.freqs >= lo) & (self.freqs <= hi)

    def energy(self) -> float:
        """Sum of squared windowed time samples recovered from the spectrum (Parseval)."""
        raw = (self.magnitude / self.scale) ** 2
        w = np.full(raw.size, 2.0)
        w[0] = 1.0
        if self.n_fft % 2 == 0:
            w[-1] = 1.0
        return float(np.sum(w * raw) / self.n_fft)


def _next_pow2(n: int) -> int:
    return 1 << (int(n) - 1).bit_length()


def fft_spectrum(trace: TimeTrace, pad_factor: int = 8, window: str = "hann") -> Spectrum:
    """Mean-subtracted, windowed, zero-padded amplitude spectrum of ``trace``.

    The padded length is ``pad_factor * len(trace)`` rounded up to a power of two.
    """
    if window not in WINDOWS:
        raise ValueError(f"window must be one of {WINDOWS}, got {window!r}")
    if int(pad_factor) != pad_factor or not (1 <= pad_factor <= 64):
        raise ValueError(f"pad_factor must be an integer in [1, 64], got {pad_factor!r}")
    n = len(trace)
    if n < 8:
        raise ValueError(f"need at least 8 samples for a spectrum, got {n}")
    x = trace.samples - np.mean(trace.samples)
    w = np.ones(n) if window == "rectangular" else np.hanning(n)
    L = _next_pow2(int(pad_factor) * n)
    X = np.fft.rfft(x * w, n=L)
    scale = 2.0 / float(np.sum(w))
    freqs = np.fft.rfftfreq(L, trace.dt)
    values = X * scale
    return Spectrum(freqs, np.abs(values), n, L, trace.dt, window, scale, values)
