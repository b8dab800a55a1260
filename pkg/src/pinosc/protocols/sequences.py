"""Piecewise-constant bias / optical-power drive programs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Tuple

__all__ = [
    "Segment",
    "PulseSequence",
    "build_pulsed_el_sequence",
    "build_dc_pl_sequence",
    "constant_bias",
]


@dataclass(frozen=True)
class Segment:
    duration: float  # s
    bias: float  # V
    optical_power: float = 0.0  # W

    def __post_init__(self):
        if not (self.duration > 0):
            raise ValueError(f"segment duration must be > 0, got {self.duration!r}")
        if self.optical_power < 0:
            raise ValueError(f"optical power must be >= 0, got {self.optical_power!r}")


@dataclass(frozen=True)
class PulseSequence:
    """Ordered segments forming one period, repeated ``repeat_count`` times."""

    segments: Tuple[Segment, ...]
    repeat_count: int = 1

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        if not segs:
            raise ValueError("a pulse sequence needs at least one segment")
        if int(self.repeat_count) != self.repeat_count or self.repeat_count < 1:
            raise ValueError(f"repeat_count must be a positive integer, got {self.repeat_count!r}")
        object.__setattr__(self, "segments", segs)

    @property
    def period(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def total_duration(self) -> float:
        return self.period * self.repeat_count

    def __iter__(self) -> Iterator[Tuple[float, Segment]]:
        """Yield ``(start_time, segment)`` over every repetition."""
        t = 0.0
        for k in range(self.repeat_count):
            t = k * self.period
            for seg in self.segments:
                yield t, seg
                t += seg.duration

    def at(self, t: float) -> Segment:
        """Segment active at time ``t`` (right-continuous; clamps past the end)."""
        tau = min(max(t, 0.0), self.total_duration) % self.period
        acc = 0.0
        for seg in self.segments:
            acc += seg.duration
            if tau < acc:
                return seg
        return self.segments[-1]

    def with_repeats(self, repeat_count: int) -> "PulseSequence":
        return PulseSequence(self.segments, repeat_count)


def build_pulsed_el_sequence(V_high: float, t_high: float, V_rev: float, period: float,
                             repeat_count: int = 1) -> PulseSequence:
    """Forward pulse of ``t_high`` at ``V_high`` then reverse hold at ``V_rev``."""
    if not (0 < t_high < period):
        raise ValueError(f"need 0 < t_high < period, got t_high={t_high!r}, period={period!r}")
    if V_rev > 0:
        raise ValueError(f"reverse bias must be <= 0, got {V_rev!r}")
    return PulseSequence((Segment(t_high, V_high, 0.0), Segment(period - t_high, V_rev, 0.0)),
                         repeat_count)


def build_dc_pl_sequence(V_dc: float, laser_power: float, laser_width: float, period: float,
                         repeat_count: int = 1) -> PulseSequence:
    """Constant bias with a laser pulse of ``laser_width`` at the start of each period."""
    if not (0 < laser_width < period):
        raise ValueError(
            f"need 0 < laser_width < period, got laser_width={laser_width!r}, period={period!r}")
    if laser_power < 0:
        raise ValueError(f"laser power must be >= 0, got {laser_power!r}")
    return PulseSequence((Segment(laser_width, V_dc, laser_power),
                          Segment(period - laser_width, V_dc, 0.0)), repeat_count)


def constant_bias(V: float, duration: float, optical_power: float = 0.0) -> PulseSequence:
    return PulseSequence((Segment(duration, V, optical_power),))
