"""(V, T) phase maps assembled from per-cell oscillation metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .oscillation import OscillationMetrics

__all__ = ["PhaseMap", "build_phase_map", "max_frequency_vs_temperature", "MISSING"]

MISSING = "missing"


@dataclass(frozen=True, eq=False)
class PhaseMap:
    """Rows are temperatures, columns voltages; missing cells hold ``None`` / NaN."""

    voltages: np.ndarray
    temperatures: np.ndarray
    strength: np.ndarray  # (nT, nV), NaN where missing
    classes: np.ndarray  # (nT, nV) of str, "missing" where missing
    metrics: Tuple[Tuple[Optional[OscillationMetrics], ...], ...]

    @property
    def missing(self) -> np.ndarray:
        return self.classes == MISSING

    @property
    def normalized_strength(self) -> np.ndarray:
        """Strength divided by the largest finite strength of the map."""
        finite = self.strength[np.isfinite(self.strength)]
        peak = float(finite.max()) if finite.size else 0.0
        return self.strength / peak if peak > 0 else np.full_like(self.strength, np.nan)

    def island_bounding_box(self, phase: str = "stable"):
        """(V_min, V_max, T_min, T_max) over cells of class ``phase``, or None."""
        it, iv = np.nonzero(self.classes == phase)
        if it.size == 0:
            return None
        V, T = self.voltages, self.temperatures
        return (float(V[iv.min()]), float(V[iv.max()]), float(T[it.min()]), float(T[it.max()]))

    def max_strength_cell(self):
        """(V, T, strength) of the strongest cell, or None if every cell is missing."""
        s = np.where(np.isfinite(self.strength), self.strength, -np.inf)
        if not np.any(np.isfinite(self.strength)):
            return None
        it, iv = np.unravel_index(int(np.argmax(s)), s.shape)
        return float(self.voltages[iv]), float(self.temperatures[it]), float(self.strength[it, iv])

    def summary(self) -> dict:
        counts = {c: int(np.sum(self.classes == c)) for c in ("stable", "damped", "absent",
                                                              MISSING)}
        box = self.island_bounding_box()
        best = self.max_strength_cell()
        return {
            "shape": [int(self.temperatures.size), int(self.voltages.size)],
            "class_counts": counts,
            "stable_island": None if box is None else dict(zip(("V_min", "V_max", "T_min",
                                                                "T_max"), box)),
            "max_strength": None if best is None else dict(zip(("V", "T", "strength"), best)),
        }


def build_phase_map(cells: Iterable[Tuple[float, float, Optional[OscillationMetrics]]]
                    ) -> PhaseMap:
    """Assemble a map from (V, T, metrics) cells; ``metrics=None`` marks a failed cell.

    The grid is the sorted set of distinct voltages and temperatures, so the
    result does not depend on the order of ``cells``.

    Raises
    ------
    ValueError
        on a duplicate (V, T), or when a grid position has no cell at all.
    """
    table: Dict[Tuple[float, float], Optional[OscillationMetrics]] = {}
    for V, T, m in cells:
        key = (float(V), float(T))
        if key in table:
            raise ValueError(f"duplicate cell at V={key[0]!r}, T={key[1]!r}")
        table[key] = m
    if not table:
        raise ValueError("no cells")
    Vs = np.array(sorted({k[0] for k in table}))
    Ts = np.array(sorted({k[1] for k in table}))
    if len(table) != Vs.size * Ts.size:
        raise ValueError(f"cells do not fill the {Ts.size}x{Vs.size} grid; flag failed cells "
                         "with metrics=None instead of omitting them")
    strength = np.full((Ts.size, Vs.size), np.nan)
    classes = np.full((Ts.size, Vs.size), MISSING, dtype=object)
    rows: List[List[Optional[OscillationMetrics]]] = []
    for i, T in enumerate(Ts):
        row = []
        for j, V in enumerate(Vs):
            m = table[(float(V), float(T))]
            row.append(m)
            if m is not None:
                strength[i, j] = m.strength
                classes[i, j] = m.phase_class
        rows.append(row)
    return PhaseMap(Vs, Ts, strength, classes, tuple(tuple(r) for r in rows))


def max_frequency_vs_temperature(pmap: PhaseMap) -> List[Tuple[float, float]]:
    """Per temperature, the highest peak frequency among oscillating (non-absent) cells."""
    out = []
    for i, T in enumerate(pmap.temperatures):
        freqs = [m.peak_frequency for m in pmap.metrics[i]
                 if m is not None and m.phase_class != "absent"
                 and math.isfinite(m.peak_frequency)]
        if freqs:
            out.append((float(T), float(max(freqs))))
    return out
