"""Uniformly sampled scalar signals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TimeTrace"]


@dataclass(frozen=True, eq=False)
class TimeTrace:
    """Signal sampled at ``t0 + k*dt``.

    ``unit`` is a free-form tag such as ``"A"``, ``"ph/s"``, ``"counts"``.
    ``name`` is used as the CSV column stem.
    """

    t0: float
    dt: float
    samples: np.ndarray
    unit: str = "arb"
    name: str = "signal"

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.samples, dtype=float))
        if s.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if s.size < 2:
            raise ValueError("a trace needs at least 2 samples")
        if not (self.dt > 0) or not np.isfinite(self.dt):
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    @property
    def duration(self) -> float:
        return self.dt * (self.samples.size - 1)

    def window(self, start: float, stop: float) -> "TimeTrace":
        """Sub-trace with ``start <= t <= stop`` (times relative to the trace origin)."""
        t = self.times - self.t0
        keep = (t >= start - 1e-9 * self.dt) & (t <= stop + 1e-9 * self.dt)
        idx = np.flatnonzero(keep)
        if idx.size < 2:
            raise ValueError("window keeps fewer than 2 samples")
        return TimeTrace(self.t0 + idx[0] * self.dt, self.dt, self.samples[idx[0]:idx[-1] + 1],
                         self.unit, self.name)

    def scaled(self, c: float, unit: str | None = None, name: str | None = None) -> "TimeTrace":
        return TimeTrace(self.t0, self.dt, self.samples * c, unit or self.unit, name or self.name)

    def __eq__(self, other):
        if not isinstance(other, TimeTrace):
            return NotImplemented
        return (self.t0 == other.t0 and self.dt == other.dt and self.unit == other.unit
                and self.name == other.name and np.array_equal(self.samples, other.samples))
