"""Least-squares line-shape and decay fits.

All fits use ``scipy.optimize.least_squares`` (bounded trust-region reflective
Gauss-Newton with Levenberg-style damping) on scaled parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import least_squares

from .spectrum import Spectrum
from .traces import TimeTrace

__all__ = [
    "FitFailure",
    "LorentzianFit",
    "DampedCosineFit",
    "BiexponentialFit",
    "lorentzian",
    "fit_lorentzian_peak",
    "fit_damped_cosine",
    "fit_biexponential",
    "PEAK_FLOOR_FACTOR",
]

PEAK_FLOOR_FACTOR = 3.0


class FitFailure(RuntimeError):
    """A fit did not converge or landed on a degenerate solution."""

    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual


def lorentzian(f, A, gamma, f0, baseline=0.0):
    """A (gamma/2)^2 / ((f - f0)^2 + (gamma/2)^2) + baseline; gamma is the FWHM."""
    hw2 = (0.5 * gamma) ** 2
    return A * hw2 / ((np.asarray(f) - f0) ** 2 + hw2) + baseline


# ----------------------------------------------------------------------------
# Lorentzian

@dataclass(frozen=True)
class LorentzianFit:
    A: float  # peak height above baseline, power units
    gamma: float  # FWHM, Hz
    f0: float  # Hz
    baseline: float
    residual: float  # rms residual / A
    floor: float  # median power in the search band
    absent: bool = False

    @classmethod
    def none(cls, floor: float) -> "LorentzianFit":
        return cls(0.0, math.inf, math.nan, 0.0, math.nan, floor, True)


def _half_max_width(f, P, k, base):
    half = base + 0.5 * (P[k] - base)
    lo = k
    while lo > 0 and P[lo] > half:
        lo -= 1
    hi = k
    while hi < P.size - 1 and P[hi] > half:
        hi += 1
    return max(f[hi] - f[lo], f[1] - f[0])


def fit_lorentzian_peak(spectrum: Spectrum, search_band: Tuple[float, float]) -> LorentzianFit:
    """Fit a Lorentzian plus constant baseline to the strongest power peak in the band.

    Returns an ``absent`` result when no local maximum in the band exceeds
    3x the median power of the band.
    """
    lo, hi = map(float, search_band)
    if not (hi > lo):
        raise ValueError("search band must have hi > lo")
    f_all = spectrum.freqs
    if lo > f_all[-1] or hi < f_all[0]:
        raise ValueError("search band lies outside the spectrum")
    mask = spectrum.band(lo, hi)
    if np.count_nonzero(mask) < 5:
        raise ValueError("search band holds fewer than 5 spectral bins")
    f = f_all[mask]
    P = spectrum.power[mask]
    floor = float(np.median(P))
    interior = np.flatnonzero((P[1:-1] >= P[:-2]) & (P[1:-1] >= P[2:])) + 1
    if interior.size == 0 or not (P[interior].max() > PEAK_FLOOR_FACTOR * floor):
        return LorentzianFit.none(floor)
    k = int(interior[np.argmax(P[interior])])
    peak = float(P[k])
    base0 = min(floor, 0.5 * peak)
    g0 = _half_max_width(f, P, k, base0)
    df = f[1] - f[0]
    # fit window: a few half-widths around the peak, at least 9 bins
    half_span = max(6.0 * g0, 8 * df)
    sel = (f >= f[k] - half_span) & (f <= f[k] + half_span)
    fs, Ps = f[sel], P[sel]
    fsc = max(g0, df)

    def resid(q):
        A, g, c, b = q
        return (lorentzian(fs, A * peak, g * fsc, f[k] + c * fsc, b * peak) - Ps) / peak

    q0 = [max(peak - base0, 1e-12 * peak) / peak, g0 / fsc, 0.0, base0 / peak]
    lb = [0.0, 1e-3 * df / fsc, -half_span / fsc, -1.0]
    ub = [10.0, 4 * half_span / fsc, half_span / fsc, 1.0]
    q0 = np.clip(q0, np.array(lb) + 1e-12, np.array(ub) - 1e-12)
    res = least_squares(resid, q0, bounds=(lb, ub), x_scale="jac", max_nfev=2000)
    A, g, c, b = res.x
    A_abs = A * peak
    rms = float(np.sqrt(np.mean(res.fun ** 2)) * peak / A_abs) if A_abs > 0 else math.inf
    return LorentzianFit(float(A_abs), float(g * fsc), float(f[k] + c * fsc), float(b * peak),
                         rms, floor, False)


# ----------------------------------------------------------------------------
# damped cosine

@dataclass(frozen=True)
class DampedCosineFit:
    A0: float
    f: float  # Hz
    tau_d: float  # s; inf when no damping is resolved
    phase: float  # rad
    offset: float
    residual: float  # rms residual / |A0|
    no_damping: bool

    @property
    def gamma(self) -> float:
        """Equivalent power-spectrum FWHM, 1/(pi tau_d)."""
        return 0.0 if self.no_damping else 1.0 / (math.pi * self.tau_d)


def _refined_peak(trace: TimeTrace, f_guess: float) -> float:
    x = trace.samples - trace.samples.mean()
    n = x.size
    L = 1 << (8 * n - 1).bit_length()
    X = np.abs(np.fft.rfft(x * np.hanning(n), n=L))
    freqs = np.fft.rfftfreq(L, trace.dt)
    band = (freqs >= 0.5 * f_guess) & (freqs <= 1.5 * f_guess)
    if not np.any(band):
        return f_guess
    return float(freqs[band][np.argmax(X[band])])


def fit_damped_cosine(trace: TimeTrace, f_guess: float, max_nfev: int = 4000
                      ) -> DampedCosineFit:
    """Fit offset + A0 exp(-t/tau_d) cos(2 pi f t + phase), t measured from the trace start.

    Raises
    ------
    ValueError
        if the trace spans fewer than 3 periods of ``f_guess``.
    FitFailure
        on non-convergence, or when the best fit has less than one period in
        the window (a pure decay is not an oscillation).
    """
    span = trace.duration
    if not (f_guess > 0) or span * f_guess < 3:
        raise ValueError("trace must span at least 3 periods of f_guess")
    t = trace.times - trace.t0
    y = trace.samples
    off0 = float(np.mean(y))
    scale = float(np.std(y)) or 1.0
    tn = t / span
    f_start = _refined_peak(trace, f_guess)

    def model(q):
        A, fr, k, ph, off = q
        return off + A * np.exp(-k * tn) * np.cos(2 * math.pi * fr * span * tn + ph)

    def resid(q):
        return (model(q) - y / scale)

    best = None
    for k0 in (0.0, 1.0, 5.0):
        # linear least squares for amplitude/phase at this (f, k)
        env = np.exp(-k0 * tn)
        M = np.column_stack([env * np.cos(2 * math.pi * f_start * t),
                             -env * np.sin(2 * math.pi * f_start * t), np.ones_like(t)])
        coef, *_ = np.linalg.lstsq(M, y / scale, rcond=None)
        A0 = math.hypot(coef[0], coef[1]) or 1.0
        ph0 = math.atan2(coef[1], coef[0])
        q0 = [A0, f_start, k0, ph0, coef[2]]
        lb = [0.0, 0.0, 0.0, -4 * math.pi, -np.inf]
        ub = [np.inf, 0.5 / trace.dt, np.inf, 4 * math.pi, np.inf]
        try:
            res = least_squares(resid, q0, bounds=(lb, ub), x_scale="jac", max_nfev=max_nfev)
        except (ValueError, FloatingPointError):
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None or best.status <= 0:
        raise FitFailure("damped-cosine fit did not converge",
                         math.nan if best is None else float(np.sqrt(2 * best.cost / y.size)))
    A, fr, k, ph, off = best.x
    rms = float(np.sqrt(np.mean(best.fun ** 2)))
    rel = rms / A if A > 0 else math.inf
    if fr * span < 1.0 or A <= 0:
        raise FitFailure(f"degenerate fit: {fr * span:.3g} periods in the window", rel)
    ph = (ph + math.pi) % (2 * math.pi) - math.pi
    no_damp = k * 1.0 < 1e-3  # less than 0.1 % decay over the window
    tau = math.inf if no_damp else span / k
    return DampedCosineFit(float(A * scale), float(fr), float(tau), float(ph),
                           float(off * scale), float(rel), bool(no_damp))


# ----------------------------------------------------------------------------
# bi-exponential

@dataclass(frozen=True)
class BiexponentialFit:
    A1: float
    tau1: float  # s, tau1 <= tau2
    A2: float
    tau2: float
    baseline: float
    single: bool  # single-exponential branch selected (A2 = 0, tau2 = tau1)
    aic_single: float
    aic_double: float
    residual: float


def _aic(rss: float, n: int, k: int) -> float:
    return n * math.log(max(rss, 1e-300) / n) + 2 * k


def fit_biexponential(decay: TimeTrace) -> BiexponentialFit:
    """Fit A1 exp(-t/tau1) + A2 exp(-t/tau2) + baseline, t measured from the trace start.

    A single exponential is fitted too; it is selected when its Akaike
    information criterion is not worse than the two-exponential fit. Amplitudes
    are bounded by 10x the data range, lifetimes by [dt/2, 100 x span].

    Raises
    ------
    FitFailure
        if neither model converges.
    """
    t = decay.times - decay.t0
    y = decay.samples
    if y.size < 6:
        raise ValueError("need at least 6 samples")
    span = decay.duration
    rng = float(np.ptp(y)) or abs(float(np.mean(y))) or 1.0
    amax = 10.0
    tmin, tmax = 0.5 * decay.dt / span, 100.0
    tn = t / span
    yn = y / rng
    n = y.size

    def single(q):
        A, tau, b = q
        return A * np.exp(-tn / tau) + b - yn

    def double(q):
        A1, t1, A2, t2, b = q
        return A1 * np.exp(-tn / t1) + A2 * np.exp(-tn / t2) + b - yn

    # single-exponential start from the 1/e crossing
    b0 = float(np.mean(yn[-max(1, n // 20):]))
    top = yn[0] - b0
    below = np.flatnonzero(yn - b0 < top / math.e)
    tau0 = float(tn[below[0]]) if below.size and below[0] > 0 else 0.3
    tau0 = min(max(tau0, 2 * tmin), tmax / 2)
    s_lb = [-amax, tmin, -amax]
    s_ub = [amax, tmax, amax]
    try:
        rs = least_squares(single, np.clip([top, tau0, b0], np.array(s_lb) + 1e-9,
                                           np.array(s_ub) - 1e-9),
                           bounds=(s_lb, s_ub), x_scale="jac", max_nfev=4000)
    except ValueError as exc:
        raise FitFailure(f"single-exponential fit failed: {exc}") from exc
    rss_s = 2 * rs.cost
    best = None
    d_lb = [-amax, tmin, -amax, tmin, -amax]
    d_ub = [amax, tmax, amax, tmax, amax]
    A_s, tau_s, b_s = rs.x
    for r1, r2, frac in ((0.3, 2.0, 0.8), (0.5, 3.0, 0.8), (0.15, 1.2, 0.5), (0.7, 5.0, 0.9)):
        q0 = np.clip([frac * A_s, r1 * tau_s, (1 - frac) * A_s, r2 * tau_s, b_s],
                     np.array(d_lb) + 1e-9, np.array(d_ub) - 1e-9)
        try:
            rd = least_squares(double, q0, bounds=(d_lb, d_ub), x_scale="jac", max_nfev=4000)
        except ValueError:
            continue
        if best is None or rd.cost < best.cost:
            best = rd
    if rs.status <= 0 and (best is None or best.status <= 0):
        raise FitFailure("bi-exponential fit did not converge", float(np.sqrt(rss_s / n)))
    aic_s = _aic(rss_s, n, 3)
    aic_d = math.inf if best is None else _aic(2 * best.cost, n, 5)
    if best is None or best.status <= 0 or aic_s <= aic_d:
        return BiexponentialFit(float(A_s * rng), float(tau_s * span), 0.0, float(tau_s * span),
                                float(b_s * rng), True, aic_s, aic_d,
                                float(np.sqrt(rss_s / n) * rng))
    A1, t1, A2, t2, b = best.x
    if t1 > t2:
        A1, t1, A2, t2 = A2, t2, A1, t1
    return BiexponentialFit(float(A1 * rng), float(t1 * span), float(A2 * rng), float(t2 * span),
                            float(b * rng), False, aic_s, aic_d,
                            float(np.sqrt(2 * best.cost / n) * rng))
