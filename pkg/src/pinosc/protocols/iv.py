"""Quasi-static IV sweeps with optional random-telegraph burst noise."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from ..analysis.traces import TimeTrace
from ..carrier_statistics import _require, _Validated
from ..gr_dynamics.model import GRParams, GRState
from .readout import cell_rng
from .sequences import constant_bias

__all__ = ["BurstNoise", "IVCurve", "telegraph_signal", "iv_sweep"]


@dataclass(frozen=True)
class BurstNoise(_Validated):
    """Two-state Markov current switching applied below ``threshold_voltage``."""

    threshold_voltage: float = -5.0  # V
    amplitude: float = 1e-9  # A, current of the "up" state
    rate_up: float = 2e5  # 1/s, low -> high
    rate_down: float = 2e5  # 1/s, high -> low

    def problems(self):
        out = super().problems()
        for name in ("rate_up", "rate_down"):
            _require(out, name, getattr(self, name) > 0, "must be > 0")
        return out


def telegraph_signal(n: int, dt: float, noise: BurstNoise, rng: np.random.Generator
                     ) -> np.ndarray:
    """Sampled two-level signal (0 or ``amplitude``) with exponential dwell times."""
    state = int(rng.random() < noise.rate_up / (noise.rate_up + noise.rate_down))
    out = np.empty(n)
    t_next = rng.exponential(1.0 / (noise.rate_down if state else noise.rate_up))
    for k in range(n):
        t = k * dt
        while t >= t_next:
            state ^= 1
            t_next += rng.exponential(1.0 / (noise.rate_down if state else noise.rate_up))
        out[k] = state * noise.amplitude
    return out


@dataclass
class IVCurve:
    voltage: np.ndarray  # V
    current: np.ndarray  # A, mean over the final 20 % of each settle run
    traces: Dict[int, TimeTrace] = field(default_factory=dict)  # index -> final-window current


def iv_sweep(V_list: Sequence[float], T: float, p: GRParams, settle_time: float,
             burst_noise: Optional[BurstNoise] = None, seed: int = 0,
             dt: Optional[float] = None) -> IVCurve:
    """Mean conduction current after settling at each bias.

    Each bias is integrated independently for ``settle_time`` from the
    empty-band state at that bias and the current is averaged over the final
    20 % of the run. With ``burst_noise`` set, points below its threshold get a
    telegraph current superposed whose stream is derived from (seed, index).
    """
    from ..gr_dynamics.simulate import integrate  # deferred: gr_dynamics imports sequences

    if not (settle_time > 0):
        raise ValueError(f"settle_time must be > 0, got {settle_time!r}")
    step = settle_time / 1000.0 if dt is None else dt
    W = p.device.i_region_width
    Vs = np.asarray(V_list, dtype=float)
    currents = np.empty(Vs.size)
    traces: Dict[int, TimeTrace] = {}
    for k, V in enumerate(Vs):
        tr = integrate(GRState(0.0, 1.0, V / W), constant_bias(V, settle_time), p, T,
                       dt=step)
        window = tr.current.window(0.8 * settle_time, settle_time)
        if burst_noise is not None and V < burst_noise.threshold_voltage:
            extra = telegraph_signal(len(window), window.dt, burst_noise, cell_rng(seed, k))
            window = TimeTrace(window.t0, window.dt, window.samples + extra, "A", "current")
            traces[k] = window
        currents[k] = float(np.mean(window.samples))
    return IVCurve(Vs, currents, traces)
