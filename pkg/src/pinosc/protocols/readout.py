"""Defect-emission readout: carrier density to photon rate to detector counts."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..analysis.traces import TimeTrace
from ..carrier_statistics import _require, _Validated

__all__ = [
    "ReadoutModel",
    "CountTrace",
    "optical_generation_rate",
    "emission_rate",
    "simulate_photon_counts",
    "cell_rng",
]


def optical_generation_rate(power: float, conversion: float) -> float:
    """Optical generation g_opt = conversion * power (cm^-3 s^-1 for power in W)."""
    if power < 0:
        raise ValueError(f"optical power must be >= 0, got {power!r}")
    return conversion * power


@dataclass(frozen=True)
class ReadoutModel(_Validated):
    """Saturable emitter ensemble fed by free-carrier capture.

    Excited emitters N* obey dN*/dt = c_cap n (N_e - N*) - N*/tau_f; an
    optional slow channel N_s does the same with tau_s. The photon rate is
    ``collection_volume * (eta N*/tau_f + beta N_s/tau_s)`` in photons/s; with
    ``collection_volume = 1`` it is the rate density per cm^3.
    """

    capture_efficiency: float = 0.1  # eta
    capture_coefficient: float = 1e-9  # c_cap, cm^3/s
    emitter_density: float = 1e14  # N_e, cm^-3
    fast_lifetime: float = 500e-9  # tau_f, s
    slow_lifetime: float = 2.39e-6  # tau_s, s
    slow_fraction: float = 0.0  # beta
    collection_volume: float = 1e-12  # cm^3, detected emitter volume

    def problems(self):
        out = super().problems()
        _require(out, "capture_efficiency", 0.0 <= self.capture_efficiency <= 1.0,
                 "must be in [0, 1]")
        _require(out, "slow_fraction", 0.0 <= self.slow_fraction <= 1.0, "must be in [0, 1]")
        for name in ("fast_lifetime", "slow_lifetime", "collection_volume"):
            _require(out, name, getattr(self, name) > 0, "must be > 0")
        for name in ("capture_coefficient", "emitter_density"):
            _require(out, name, getattr(self, name) >= 0, "must be >= 0")
        return out

    @property
    def max_rate(self) -> float:
        """Upper bound of the photon rate (all emitters excited in both channels)."""
        Ne = self.emitter_density
        return self.collection_volume * (self.capture_efficiency * Ne / self.fast_lifetime
                                         + self.slow_fraction * Ne / self.slow_lifetime)

    def steady_state_excited(self, n: float) -> float:
        """Fast-channel N* at constant carrier density ``n``."""
        k = self.capture_coefficient * n
        return k * self.emitter_density / (k + 1.0 / self.fast_lifetime)


def emission_rate(n_trace: TimeTrace, model: ReadoutModel, dt: Optional[float] = None,
                  initial_excited: float = 0.0, initial_slow: float = 0.0) -> TimeTrace:
    """Photon rate driven by the carrier density trace ``n_trace`` (cm^-3).

    Each channel is linear in its excited population for fixed n, so it is
    advanced with the exact exponential update over sub-steps no longer than
    ``dt`` (default tau_f/20), taking n at the sub-step midpoint of the linear
    interpolation between samples. The update is stable for any capture rate
    and second-order accurate. The output shares the grid of ``n_trace``.

    Raises
    ------
    ValueError
        if the trace spacing or ``dt`` exceeds tau_f/2.
    """
    tau_f = model.fast_lifetime
    if n_trace.dt > tau_f / 2:
        raise ValueError(f"trace spacing {n_trace.dt:.3e} s exceeds tau_f/2 = {tau_f / 2:.3e} s; "
                         "resample on a finer grid")
    if dt is not None and not (0 < dt <= tau_f / 2):
        raise ValueError(f"sub-step must lie in (0, tau_f/2], got {dt!r}")
    n = np.maximum(n_trace.samples, 0.0)
    Ne = model.emitter_density
    if not (0 <= initial_excited <= Ne and 0 <= initial_slow <= Ne):
        raise ValueError("initial excited populations must lie in [0, N_e]")
    c = model.capture_coefficient
    tau_s = model.slow_lifetime
    h_max = tau_f / 20.0 if dt is None else min(tau_f / 20.0, dt)
    m = max(1, int(math.ceil(n_trace.dt / h_max - 1e-12)))
    h = n_trace.dt / m
    # sub-step midpoints of the linearly interpolated density, shape (samples - 1, m)
    frac = (np.arange(m) + 0.5) / m
    k_mid = c * (n[:-1, None] + (n[1:] - n[:-1])[:, None] * frac[None, :])
    out = np.empty((n.size, 2))
    out[0] = initial_excited, initial_slow
    for col, tau in ((0, tau_f), (1, tau_s)):
        rate = k_mid + 1.0 / tau
        decay = np.exp(-rate * h)
        target = k_mid * Ne / rate
        N = out[0, col]
        vals = out[:, col]
        for k, (dk, tk) in enumerate(zip(decay.tolist(), target.tolist()), start=1):
            for a, b in zip(dk, tk):
                N = b + (N - b) * a
            vals[k] = N
    photons = model.collection_volume * (model.capture_efficiency * out[:, 0] / tau_f
                                         + model.slow_fraction * out[:, 1] / tau_s)
    return TimeTrace(n_trace.t0, n_trace.dt, photons, "ph/s", "photon_rate")


@dataclass(frozen=True, eq=False)
class CountTrace:
    """Detector counts per bin."""

    bin_width: float
    counts: np.ndarray
    rng_seed: int
    t0: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("counts must be a non-empty 1-D array")
        if np.any(c < 0) or not np.all(np.equal(np.mod(c, 1), 0)):
            raise ValueError("counts must be non-negative integers")
        c = c.astype(np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        if not (self.bin_width > 0):
            raise ValueError(f"bin width must be > 0, got {self.bin_width!r}")

    def __eq__(self, other):
        if not isinstance(other, CountTrace):
            return NotImplemented
        return (self.bin_width == other.bin_width and self.rng_seed == other.rng_seed
                and self.t0 == other.t0 and np.array_equal(self.counts, other.counts))

    def as_trace(self) -> TimeTrace:
        return TimeTrace(self.t0, self.bin_width, self.counts.astype(float), "counts", "counts")

    def as_rate(self) -> TimeTrace:
        """Counts divided by the bin width (photons/s)."""
        return TimeTrace(self.t0, self.bin_width, self.counts / self.bin_width, "ph/s",
                         "count_rate")


def cell_rng(master_seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for task ``index`` of a run seeded with ``master_seed``.

    Streams come from ``SeedSequence(master_seed, spawn_key=(index,))``, so the
    stream of a task does not depend on which worker runs it or when.
    """
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(index),)))


def simulate_photon_counts(rate: TimeTrace, bin_width: float, seed: int,
                           index: int = 0) -> CountTrace:
    """Poisson counts per bin with mean equal to the integrated rate over the bin.

    The rate is integrated as a piecewise-linear function of time. Only whole
    bins inside the trace are produced.
    """
    r = rate.samples
    if np.any(r < 0):
        raise ValueError("photon rate must be non-negative")
    if not (bin_width >= rate.dt * (1 - 1e-12)):
        raise ValueError(f"bin width {bin_width!r} is shorter than the trace spacing {rate.dt!r}")
    n_bins = int(math.floor(rate.duration / bin_width * (1 + 1e-12)))
    if n_bins < 1:
        raise ValueError("trace is shorter than one bin")
    t = rate.times - rate.t0
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (r[1:] + r[:-1]) * rate.dt)))
    edges = bin_width * np.arange(n_bins + 1)
    # exact integral of the linear interpolant at the bin edges
    idx = np.clip(np.searchsorted(t, edges, side="right") - 1, 0, t.size - 2)
    frac = (edges - t[idx]) / rate.dt
    r0, r1 = r[idx], r[idx + 1]
    at = cum[idx] + rate.dt * (r0 * frac + 0.5 * (r1 - r0) * frac * frac)
    means = np.maximum(np.diff(at), 0.0)
    counts = cell_rng(seed, index).poisson(means)
    return CountTrace(bin_width, counts, int(seed), rate.t0)
