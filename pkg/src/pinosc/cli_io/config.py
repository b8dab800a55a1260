"""
Run configuration: a nested TOML document with one table per module.

    [material] [device] [gr] [readout] [protocol] [analysis] [analysis.thresholds]
    [sweep] [iv]    plus top-level master_seed, output_directory, worker_count

Every key has a default, so an empty document is the shipped ``paper-like``
configuration. Unknown keys, type mismatches and invariant violations are all
collected and reported together with their dotted paths.
"""
from __future__ import annotations

from dataclasses import MISSING, asdict, dataclass, field, fields, is_dataclass
from typing import Any, Dict, List, Tuple

import numpy as np
import tomli
import tomli_w

from ..analysis.oscillation import AnalysisConfig
from ..carrier_statistics import ConfigError, DeviceParams, MaterialParams, _require, _Validated
from ..gr_dynamics.model import GRParams
from ..protocols.iv import BurstNoise
from ..protocols.readout import ReadoutModel
from ..protocols.sequences import (PulseSequence, build_dc_pl_sequence, build_pulsed_el_sequence,
                                   constant_bias)

__all__ = [
    "ProtocolConfig",
    "SweepSpec",
    "IVConfig",
    "GRSection",
    "RunConfig",
    "parse_config",
    "serialize_config",
    "load_config",
    "default_config_text",
    "PROTOCOL_KINDS",
    "SIGNALS",
]

PROTOCOL_KINDS = ("pulsed-el", "dc-pl", "constant")
SIGNALS = ("current", "photon_rate", "counts", "n")


@dataclass(frozen=True)
class ProtocolConfig(_Validated):
    """Drive program and per-run numerics.

    ``bias`` is the forward (pulsed-el), DC (dc-pl) or constant bias; sweeps
    replace it with the cell voltage. Runs start from the state held under
    ``reverse_bias``: no free carriers, traps filled, E = reverse_bias / W.
    """

    kind: str = "pulsed-el"
    bias: float = 8.5  # V
    temperature: float = 8.0  # K
    pulse_width: float = 30e-6  # s, forward pulse (pulsed-el)
    reverse_bias: float = -8.5  # V
    period: float = 150e-6  # s
    repeat_count: int = 1
    laser_power: float = 0.0  # W (dc-pl)
    laser_width: float = 100e-9  # s (dc-pl)
    optical_conversion: float = 1e24  # cm^-3 s^-1 per W
    duration: float = 30e-6  # s (constant)
    dt: float = 10e-9  # s, output grid
    rtol: float = 1e-6
    atol: float = 1e-10
    signal: str = "current"  # trace analyzed for metrics
    count_bin_width: float = 0.0  # s; > 0 also synthesizes detector counts

    def problems(self):
        out = super().problems()
        _require(out, "kind", self.kind in PROTOCOL_KINDS, f"must be one of {PROTOCOL_KINDS}")
        _require(out, "signal", self.signal in SIGNALS, f"must be one of {SIGNALS}")
        _require(out, "temperature", self.temperature > 0, "must be > 0")
        for name in ("pulse_width", "period", "laser_width", "duration", "dt"):
            _require(out, name, getattr(self, name) > 0, "must be > 0")
        _require(out, "reverse_bias", self.reverse_bias <= 0, "must be <= 0")
        _require(out, "repeat_count", self.repeat_count >= 1, "must be >= 1")
        _require(out, "laser_power", self.laser_power >= 0, "must be >= 0")
        _require(out, "optical_conversion", self.optical_conversion >= 0, "must be >= 0")
        _require(out, "rtol", 1e-12 <= self.rtol <= 1e-2, "must lie in [1e-12, 1e-2]")
        _require(out, "atol", self.atol > 0, "must be > 0")
        _require(out, "count_bin_width", self.count_bin_width >= 0, "must be >= 0")
        if self.kind == "pulsed-el":
            _require(out, "pulse_width", self.pulse_width < self.period, "must be < period")
        if self.kind == "dc-pl":
            _require(out, "laser_width", self.laser_width < self.period, "must be < period")
        if self.count_bin_width > 0:
            _require(out, "count_bin_width", self.count_bin_width >= self.dt, "must be >= dt")
        if self.signal == "counts":
            _require(out, "count_bin_width", self.count_bin_width > 0,
                     "must be > 0 when signal = 'counts'")
        return out

    def sequence(self, bias: float | None = None) -> PulseSequence:
        V = self.bias if bias is None else bias
        if self.kind == "pulsed-el":
            return build_pulsed_el_sequence(V, self.pulse_width, self.reverse_bias, self.period,
                                            self.repeat_count)
        if self.kind == "dc-pl":
            return build_dc_pl_sequence(V, self.laser_power, self.laser_width, self.period,
                                        self.repeat_count)
        return constant_bias(V, self.duration)

    def analysis_window(self) -> Tuple[float, float]:
        """(start, stop) in s of the part of the run that is analyzed."""
        if self.kind == "pulsed-el":
            return 0.0, self.pulse_width
        if self.kind == "dc-pl":
            return self.laser_width, self.period
        return 0.0, self.duration


@dataclass(frozen=True)
class SweepSpec(_Validated):
    voltage_start: float = 6.75
    voltage_stop: float = 10.0
    voltage_count: int = 20
    temperature_start: float = 6.0
    temperature_stop: float = 22.0
    temperature_count: int = 12

    def problems(self):
        out = super().problems()
        for ax in ("voltage", "temperature"):
            _require(out, f"{ax}_count", getattr(self, f"{ax}_count") >= 1, "must be >= 1")
            _require(out, f"{ax}_stop", getattr(self, f"{ax}_stop") >= getattr(self, f"{ax}_start"),
                     f"must be >= {ax}_start")
        _require(out, "temperature_start", self.temperature_start > 0, "must be > 0")
        return out

    @property
    def voltages(self) -> np.ndarray:
        return np.linspace(self.voltage_start, self.voltage_stop, self.voltage_count)

    @property
    def temperatures(self) -> np.ndarray:
        return np.linspace(self.temperature_start, self.temperature_stop, self.temperature_count)

    def cells(self) -> List[Tuple[int, float, float]]:
        """(index, V, T) in row-major order (temperature rows, voltage columns)."""
        out = []
        for i, T in enumerate(self.temperatures):
            for j, V in enumerate(self.voltages):
                out.append((i * self.voltage_count + j, float(V), float(T)))
        return out


@dataclass(frozen=True)
class IVConfig(_Validated):
    voltage_start: float = -9.0
    voltage_stop: float = 10.0
    voltage_count: int = 39
    settle_time: float = 30e-6  # s
    burst_noise: bool = False
    burst_threshold_voltage: float = -5.0
    burst_amplitude: float = 1e-9  # A
    burst_rate_up: float = 2e5  # 1/s
    burst_rate_down: float = 2e5  # 1/s

    def problems(self):
        out = super().problems()
        _require(out, "voltage_count", self.voltage_count >= 1, "must be >= 1")
        _require(out, "voltage_stop", self.voltage_stop >= self.voltage_start,
                 "must be >= voltage_start")
        _require(out, "settle_time", self.settle_time > 0, "must be > 0")
        for name in ("burst_rate_up", "burst_rate_down"):
            _require(out, name, getattr(self, name) > 0, "must be > 0")
        return out

    @property
    def voltages(self) -> np.ndarray:
        return np.linspace(self.voltage_start, self.voltage_stop, self.voltage_count)

    def burst(self) -> BurstNoise | None:
        if not self.burst_noise:
            return None
        return BurstNoise(self.burst_threshold_voltage, self.burst_amplitude, self.burst_rate_up,
                          self.burst_rate_down)


def _gr_section_fields():
    return [f for f in fields(GRParams) if f.name not in ("material", "device")]


def _gr_defaults() -> Tuple[Tuple[str, float], ...]:
    return tuple(sorted((f.name, f.default) for f in _gr_section_fields()))


@dataclass(frozen=True)
class GRSection:
    """The ``[gr]`` table: GRParams without its material and device members.

    ``values`` always holds every key, sorted, so equal settings compare equal.
    """

    values: Tuple[Tuple[str, float], ...] = field(default_factory=_gr_defaults)

    @classmethod
    def from_mapping(cls, overrides: Dict[str, float]) -> "GRSection":
        d = dict(_gr_defaults())
        d.update(overrides)
        return cls(tuple(sorted(d.items())))

    def as_dict(self) -> Dict[str, float]:
        return dict(self.values)


@dataclass(frozen=True)
class RunConfig:
    material: MaterialParams = field(default_factory=MaterialParams)
    device: DeviceParams = field(default_factory=DeviceParams)
    gr: GRSection = field(default_factory=GRSection)
    readout: ReadoutModel = field(default_factory=ReadoutModel)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    iv: IVConfig = field(default_factory=IVConfig)
    master_seed: int = 0
    output_directory: str = "out"
    worker_count: int = 1

    def gr_params(self) -> GRParams:
        return GRParams(material=self.material, device=self.device, **self.gr.as_dict())

    def with_overrides(self, **changes) -> "RunConfig":
        from dataclasses import replace
        return replace(self, **changes)


_SECTIONS = {
    "material": MaterialParams,
    "device": DeviceParams,
    "readout": ReadoutModel,
    "protocol": ProtocolConfig,
    "sweep": SweepSpec,
    "iv": IVConfig,
}


def _type_name(v) -> str:
    return type(v).__name__


def _check_value(path: str, default, value, errors: List[Tuple[str, str]]):
    """Coerce ``value`` to the type of ``default`` or record an error."""
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
    elif isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif isinstance(default, str):
        if isinstance(value, str):
            return value
    errors.append((path, f"expected {_type_name(default)}, got {_type_name(value)} {value!r}"))
    return MISSING


def _build(cls, table: Any, path: str, errors: List[Tuple[str, str]], skip=()):
    """Instantiate dataclass ``cls`` from a TOML table, collecting every error."""
    if not isinstance(table, dict):
        errors.append((path, f"expected a table, got {_type_name(table)}"))
        return None
    known = {f.name: f for f in fields(cls) if f.name not in skip}
    kwargs = {}
    for key, value in table.items():
        sub = f"{path}.{key}"
        if key not in known:
            errors.append((sub, "unknown key"))
            continue
        f = known[key]
        default = f.default if f.default is not MISSING else f.default_factory()
        if is_dataclass(default):
            built = _build(type(default), value, sub, errors)
            if built is not None:
                kwargs[key] = built
            continue
        v = _check_value(sub, default, value, errors)
        if v is not MISSING:
            kwargs[key] = v
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        errors.extend((f"{path}.{name}", msg) for name, msg in exc.problems)
        return None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML run configuration.

    Raises
    ------
    ConfigError
        listing every problem found, each with its dotted path.
    """
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError([("<document>", f"invalid TOML: {exc}")]) from exc
    errors: List[Tuple[str, str]] = []
    built: Dict[str, Any] = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            obj = _build(_SECTIONS[key], value, key, errors)
            if obj is not None:
                built[key] = obj
        elif key == "analysis":
            obj = _build(AnalysisConfig, value, key, errors)
            if obj is not None:
                built[key] = obj
        elif key == "gr":
            if not isinstance(value, dict):
                errors.append(("gr", f"expected a table, got {_type_name(value)}"))
                continue
            known = {f.name: f.default for f in _gr_section_fields()}
            vals = []
            for k, v in value.items():
                if k not in known:
                    errors.append((f"gr.{k}", "unknown key"))
                    continue
                cv = _check_value(f"gr.{k}", known[k], v, errors)
                if cv is not MISSING:
                    vals.append((k, cv))
            built["gr"] = GRSection.from_mapping(dict(vals))
        elif key in ("master_seed", "worker_count"):
            v = _check_value(key, 0, value, errors)
            if v is not MISSING:
                built[key] = v
        elif key == "output_directory":
            v = _check_value(key, "", value, errors)
            if v is not MISSING:
                built[key] = v
        else:
            errors.append((key, "unknown key"))
    seed = built.get("master_seed", 0)
    if not (0 <= seed < 2 ** 64):
        errors.append(("master_seed", "must lie in [0, 2^64)"))
    if built.get("worker_count", 1) < 1:
        errors.append(("worker_count", "must be >= 1"))
    cfg = RunConfig(**built)
    try:
        cfg.gr_params()
    except ConfigError as exc:
        errors.extend((f"gr.{name}", msg) for name, msg in exc.problems)
    if errors:
        raise ConfigError(errors)
    return cfg


def _plain(obj) -> Dict[str, Any]:
    return {k: v for k, v in asdict(obj).items()}


def config_to_dict(cfg: RunConfig) -> Dict[str, Any]:
    analysis = _plain(cfg.analysis)
    return {
        "master_seed": cfg.master_seed,
        "output_directory": cfg.output_directory,
        "worker_count": cfg.worker_count,
        "material": _plain(cfg.material),
        "device": _plain(cfg.device),
        "gr": cfg.gr.as_dict(),
        "readout": _plain(cfg.readout),
        "protocol": _plain(cfg.protocol),
        "analysis": analysis,
        "sweep": _plain(cfg.sweep),
        "iv": _plain(cfg.iv),
    }


def serialize_config(cfg: RunConfig) -> str:
    """TOML text that parses back to an equal configuration (every key written)."""
    return tomli_w.dumps(config_to_dict(cfg))


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def default_config_text() -> str:
    """The shipped ``paper-like`` configuration, fully expanded."""
    header = "# paper-like default configuration (every key shown with its default)\n"
    return header + serialize_config(RunConfig())
