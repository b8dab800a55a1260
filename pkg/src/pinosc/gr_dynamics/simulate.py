"""Time integration of the rate equations under a pulse sequence."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..analysis.traces import TimeTrace
from ..protocols.sequences import PulseSequence, Segment
from .model import GRParams, GRState, ScaledSystem, conduction_current_density
from .rosenbrock import StepStats, StepSizeUnderflow, rodas3

__all__ = ["Trajectory", "StiffnessError", "integrate", "MIN_STEP_SECONDS"]

MIN_STEP_SECONDS = 1e-18


@dataclass
class Trajectory:
    """Uniformly resampled state, current-density and current traces."""

    n: TimeTrace
    f: TimeTrace
    E: TimeTrace
    j: TimeTrace
    current: TimeTrace
    final_state: GRState
    stats: StepStats = field(default_factory=StepStats)
    complete: bool = True

    def state_at(self, k: int) -> GRState:
        return GRState(max(self.n.samples[k], 0.0), min(max(self.f.samples[k], 0.0), 1.0),
                       self.E.samples[k])


class StiffnessError(RuntimeError):
    """Step size fell below ``MIN_STEP_SECONDS``; carries the last good state."""

    def __init__(self, message, t: float, last_state: GRState, partial: Optional[Trajectory]):
        super().__init__(message)
        self.t = t
        self.last_state = last_state
        self.partial = partial


def _build_traces(times_out, Z, mu_of_segment, p: GRParams, complete, stats, last_state):
    dt = times_out[1] - times_out[0] if times_out.size > 1 else 1.0
    n = Z[:, 0] * p.trap_density
    f = Z[:, 1]
    E = Z[:, 2] * p.critical_field
    j = np.array([conduction_current_density(max(nk, 0.0), Ek, mu, p)
                  for nk, Ek, mu in zip(n, E, mu_of_segment)])
    A = p.device.junction_area
    return Trajectory(
        n=TimeTrace(0.0, dt, n, "cm^-3", "n"),
        f=TimeTrace(0.0, dt, f, "1", "f"),
        E=TimeTrace(0.0, dt, E, "V/cm", "E"),
        j=TimeTrace(0.0, dt, j, "A/cm2", "j"),
        current=TimeTrace(0.0, dt, j * A, "A", "current"),
        final_state=last_state,
        stats=stats,
        complete=complete,
    )


def _segments(sequence: PulseSequence, t_end: float):
    """(start, stop, segment) covering [0, t_end]; the last segment is extended if needed."""
    out = []
    last = None
    for start, seg in sequence:
        if start >= t_end:
            break
        out.append((start, min(start + seg.duration, t_end), seg))
        last = seg
    if out and out[-1][1] < t_end:
        s0, _, seg = out[-1]
        out[-1] = (s0, t_end, seg)
    return out


def integrate(s0: GRState, sequence: PulseSequence, p: GRParams, T: float, *,
              t_span: Optional[float] = None, dt: float = 10e-9,
              rtol: float = 1e-6, atol: float = 1e-10,
              optical_conversion: float = 0.0, freeze_field: bool = False) -> Trajectory:
    """Integrate from ``s0`` through ``sequence`` at temperature ``T``.

    Each segment is integrated separately, so bias switches are step
    boundaries. Output is resampled to a uniform grid of spacing ``dt``
    starting at t = 0. ``atol`` applies to the scaled variables (n/N_t, f, E/E_c).
    Segment optical power P adds ``optical_conversion * P`` to the optical
    generation rate.

    Raises
    ------
    StiffnessError
        if the step size drops below 1e-18 s; ``partial`` holds the trace
        computed so far and ``last_state`` the last accepted state.
    """
    if not (1e-12 <= rtol <= 1e-2):
        raise ValueError(f"rtol must lie in [1e-12, 1e-2], got {rtol!r}")
    if not (atol > 0):
        raise ValueError(f"atol must be > 0, got {atol!r}")
    if not (dt > 0):
        raise ValueError(f"dt must be > 0, got {dt!r}")
    t_end = sequence.total_duration if t_span is None else float(t_span)
    if not (t_end > 0):
        raise ValueError("integration span must be > 0")
    n_out = int(math.floor(t_end / dt + 1e-9)) + 1
    times = dt * np.arange(n_out)

    z = None
    Z = np.full((n_out, 3), np.nan)
    mus = np.full(n_out, np.nan)
    stats = StepStats()
    k_out = 0
    h_scaled = None

    def admissible(zz):
        return zz[0] >= -atol and -atol <= zz[1] <= 1.0 + atol

    for start, stop, seg in _segments(sequence, t_end):
        g_opt = p.optical_generation + optical_conversion * seg.optical_power
        sys = ScaledSystem(p, seg.bias, T, g_opt=g_opt, freeze_field=freeze_field)
        if z is None:
            z = sys.to_scaled(s0)
        if sys.pinned and not freeze_field:
            z = z.copy()
            z[2] = sys.pinned_field()
        nu = sys.nu
        # output samples belonging to this segment: [start, stop) except the final one
        if stop >= t_end:
            k_hi = n_out  # includes a final sample that rounds past t_end
        else:
            k_hi = k_out + int(np.searchsorted(times[k_out:], stop, side="left"))
        t_eval = (times[k_out:k_hi] - start) * nu
        try:
            z_new, out, st, h_scaled = rodas3(
                sys.fun, sys.jac, z, 0.0, (stop - start) * nu, rtol=rtol, atol=atol,
                h0=None if h_scaled is None else min(h_scaled, (stop - start) * nu),
                h_min=MIN_STEP_SECONDS * nu, t_eval=t_eval, admissible=admissible)
        except StepSizeUnderflow as exc:
            last = sys.to_state(exc.y)
            t_fail = start + exc.t / nu
            k_fail = k_out + int(np.searchsorted(times[k_out:k_hi], t_fail, side="right"))
            Z[k_out:k_fail] = exc.y
            mus[k_out:k_fail] = sys.mu
            partial = None
            if k_fail >= 2:
                partial = _build_traces(times[:k_fail], Z[:k_fail], mus[:k_fail], p, False,
                                        stats, last)
            raise StiffnessError(f"integration failed at t={t_fail:.6e} s: {exc}", t_fail, last,
                                 partial) from exc
        for name in ("accepted", "rejected", "bounds_rejected", "fun_evals", "jac_evals"):
            setattr(stats, name, getattr(stats, name) + getattr(st, name))
        if out is not None and k_hi > k_out:
            Z[k_out:k_hi] = out
            mus[k_out:k_hi] = sys.mu
        k_out = k_hi
        z = z_new
    final = sys.to_state(z)
    return _build_traces(times, Z, mus, p, True, stats, final)
