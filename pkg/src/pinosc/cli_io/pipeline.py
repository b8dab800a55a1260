"""Single-point runs and the deterministic parallel (V, T) sweep."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

from ..analysis.oscillation import OscillationMetrics, analyze_trace
from ..analysis.phase_map import PhaseMap, build_phase_map
from ..analysis.traces import TimeTrace
from ..gr_dynamics.model import GRState
from ..gr_dynamics.simulate import StiffnessError, Trajectory, integrate
from ..protocols.readout import CountTrace, emission_rate, simulate_photon_counts
from .config import RunConfig

__all__ = ["PointResult", "simulate_point", "analyzed_signal", "run_cells", "SweepResult",
           "sweep"]


@dataclass
class PointResult:
    V: float
    T: float
    trajectory: Trajectory
    photon_rate: TimeTrace
    counts: Optional[CountTrace]
    metrics: OscillationMetrics
    window: Tuple[float, float]
    signal: Optional[TimeTrace] = None  # exactly the trace that was analyzed


def initial_state(cfg: RunConfig) -> GRState:
    return GRState(0.0, 1.0, cfg.protocol.reverse_bias / cfg.device.i_region_width)


def analyzed_signal(cfg: RunConfig, traj: Trajectory, photon_rate: TimeTrace,
                    counts: Optional[CountTrace]) -> TimeTrace:
    """The configured signal restricted to the protocol's analysis window."""
    start, stop = cfg.protocol.analysis_window()
    stop = min(stop, traj.current.duration)
    sig = cfg.protocol.signal
    if sig == "counts":
        return counts.as_rate().window(start, stop)
    source = {"current": traj.current, "photon_rate": photon_rate, "n": traj.n}[sig]
    return source.window(start, stop)


def simulate_point(cfg: RunConfig, V: Optional[float] = None, T: Optional[float] = None,
                   index: int = 0) -> PointResult:
    """Integrate the configured protocol at (V, T), read out emission, analyze.

    Raises
    ------
    StiffnessError
        from the integrator, unchanged.
    """
    proto = cfg.protocol
    V = proto.bias if V is None else float(V)
    T = proto.temperature if T is None else float(T)
    p = cfg.gr_params()
    traj = integrate(initial_state(cfg), proto.sequence(V), p, T, dt=proto.dt, rtol=proto.rtol,
                     atol=proto.atol, optical_conversion=proto.optical_conversion)
    rate = emission_rate(traj.n, cfg.readout)
    counts = None
    if proto.count_bin_width > 0:
        counts = simulate_photon_counts(rate, proto.count_bin_width, cfg.master_seed, index)
    signal = analyzed_signal(cfg, traj, rate, counts)
    metrics = analyze_trace(signal, cfg.analysis)
    return PointResult(V, T, traj, rate, counts, metrics, proto.analysis_window(), signal)


def _cell_metrics(args) -> Tuple[int, Optional[dict], Optional[str]]:
    cfg, index, V, T = args
    try:
        res = simulate_point(cfg, V, T, index)
    except (StiffnessError, ValueError, ArithmeticError) as exc:
        return index, None, f"{type(exc).__name__}: {exc}"
    return index, res.metrics.to_dict(), None


def run_cells(cfg: RunConfig, cells: List[Tuple[int, float, float]], workers: int = 1):
    """Metrics (or failure text) per (index, V, T) cell, in input order.

    Each cell depends only on (cfg, index, V, T), so the output does not depend
    on ``workers`` or on scheduling.
    """
    jobs = [(cfg, i, V, T) for i, V, T in cells]
    if workers <= 1 or len(jobs) <= 1:
        return [_cell_metrics(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_cell_metrics, jobs, chunksize=1))


@dataclass
class SweepResult:
    phase_map: PhaseMap
    failures: List[Tuple[int, float, float, str]]

    @property
    def success_fraction(self) -> float:
        n = self.phase_map.voltages.size * self.phase_map.temperatures.size
        return 1.0 - len(self.failures) / n


def sweep(cfg: RunConfig, workers: Optional[int] = None) -> SweepResult:
    """Run every cell of ``cfg.sweep``; failed cells are recorded as missing."""
    cells = cfg.sweep.cells()
    results = run_cells(cfg, cells, cfg.worker_count if workers is None else workers)
    entries, failures = [], []
    for (i, V, T), (_, md, err) in zip(cells, results):
        m = None if md is None else OscillationMetrics.from_dict(md)
        entries.append((V, T, m))
        if err is not None:
            failures.append((i, V, T, err))
    return SweepResult(build_phase_map(entries), failures)
