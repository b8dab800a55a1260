"""
Static cryogenic carrier physics for a lateral P-I-N diode.

Units are CGS-practical throughout: cm, V/cm, cm^-3, cm^2/(V s), A/cm^2.
The functions here reproduce the back-of-envelope chain used to estimate the
base-temperature field, carrier density and drift flux of the device:

    ionized_donor_fraction(E_d, T)      N_d+ / N_d = 1 / (1 + exp(E_d / kT))
    field_from_bias(V, W)               E = V / W
    drift_current_density(n, p, ...)    J = q (mu_n n + mu_p p) E
    mobility(T, E, params)              constant (default) or clamped power law

The donor degeneracy factor is deliberately omitted from the ionization
fraction; the expression is used exactly as written above.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import List, Tuple

__all__ = [
    "K_B",
    "Q",
    "EPS0",
    "ConfigError",
    "MaterialParams",
    "DeviceParams",
    "ionized_donor_fraction",
    "occupied_donor_fraction",
    "field_from_bias",
    "drift_current_density",
    "mobility",
]

K_B = 8.617e-5  # eV/K
Q = 1.602e-19  # C
EPS0 = 8.854e-14  # F/cm

MOBILITY_MODELS = ("constant", "power-law")


class ConfigError(ValueError):
    """Invalid parameter values; ``problems`` holds every (field, message) pair."""

    def __init__(self, problems: List[Tuple[str, str]], section: str = ""):
        self.problems = list(problems)
        self.section = section
        prefix = f"{section}." if section else ""
        msg = "; ".join(f"{prefix}{name}: {text}" for name, text in self.problems)
        super().__init__(msg)


class _Validated:
    """Mixin: dataclasses list their invariant violations in ``problems()``."""

    def problems(self) -> List[Tuple[str, str]]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                out.append((f.name, f"must be finite, got {v!r}"))
        return out

    def __post_init__(self):
        bad = self.problems()
        if bad:
            raise ConfigError(bad)


def _require(out, name, ok, text):
    if not ok:
        out.append((name, text))


@dataclass(frozen=True)
class MaterialParams(_Validated):
    """Silicon / dopant / defect constants.

    ``boltzmann`` and ``elementary_charge`` are fixed constants and are not
    meant to be overridden; they are fields so that a serialized parameter set
    records the values it was computed with.
    """

    donor_density: float = 1e19  # cm^-3, contact doping
    acceptor_density: float = 1e19  # cm^-3
    donor_energy: float = 0.044  # eV below E_c (phosphorus)
    acceptor_energy: float = 0.045  # eV above E_v (boron)
    electron_mobility_ref: float = 1350.0  # cm^2/(V s)
    hole_mobility_ref: float = 480.0  # cm^2/(V s)
    trap_density: float = 1e16  # cm^-3
    mobility_model: str = "constant"
    mobility_exponent: float = 1.5
    mobility_max: float = 1e5  # cm^2/(V s), clamp for the power-law mode
    boltzmann: float = field(default=K_B)
    elementary_charge: float = field(default=Q)

    def problems(self):
        out = super().problems()
        for name in ("donor_density", "acceptor_density", "trap_density"):
            _require(out, name, getattr(self, name) >= 0, "must be >= 0")
        for name in ("donor_energy", "acceptor_energy"):
            _require(out, name, getattr(self, name) > 0, "must be > 0")
        for name in ("electron_mobility_ref", "hole_mobility_ref", "mobility_max"):
            _require(out, name, getattr(self, name) > 0, "must be > 0")
        _require(out, "mobility_model", self.mobility_model in MOBILITY_MODELS,
                 f"must be one of {MOBILITY_MODELS}")
        _require(out, "boltzmann", self.boltzmann == K_B, f"is fixed at {K_B}")
        _require(out, "elementary_charge", self.elementary_charge == Q, f"is fixed at {Q}")
        return out


@dataclass(frozen=True)
class DeviceParams(_Validated):
    """Lumped geometry and measurement-circuit parameters."""

    i_region_width: float = 565e-4  # cm
    junction_area: float = 5e-6  # cm^2
    load_resistance: float = 50.0  # ohm
    effective_permittivity: float = 1.13e-5  # F/cm, lumps cabling capacitance

    def problems(self):
        out = super().problems()
        _require(out, "i_region_width", self.i_region_width > 0, "must be > 0")
        _require(out, "junction_area", self.junction_area > 0, "must be > 0")
        _require(out, "load_resistance", self.load_resistance >= 0, "must be >= 0")
        _require(out, "effective_permittivity", self.effective_permittivity > 0, "must be > 0")
        return out


def ionized_donor_fraction(E_d: float, T: float) -> float:
    """Fraction of donors ionized at temperature ``T`` (K), level ``E_d`` (eV).

    Multiply by N_d for N_d+.  Underflows gracefully to 0 at very low T.
    """
    if not (T > 0):
        raise ValueError(f"temperature must be > 0 K, got {T!r}")
    if not (E_d > 0):
        raise ValueError(f"donor energy must be > 0 eV, got {E_d!r}")
    x = E_d / (K_B * T)
    # 1/(1+e^x) = e^-x/(1+e^-x); x > 0 always here
    ex = math.exp(-x)
    return ex / (1.0 + ex)


def occupied_donor_fraction(E_d: float, T: float) -> float:
    """Complement of :func:`ionized_donor_fraction`, computed without cancellation."""
    if not (T > 0):
        raise ValueError(f"temperature must be > 0 K, got {T!r}")
    if not (E_d > 0):
        raise ValueError(f"donor energy must be > 0 eV, got {E_d!r}")
    ex = math.exp(-E_d / (K_B * T))
    return 1.0 / (1.0 + ex)


def field_from_bias(V: float, W: float) -> float:
    """Uniform field (V/cm) for bias ``V`` across an I-region of width ``W`` (cm)."""
    if not (W > 0):
        raise ValueError(f"I-region width must be > 0 cm, got {W!r}")
    return V / W


def drift_current_density(n, p, mu_n, mu_p, E):
    """Drift current of electrons and holes in field ``E``.

    Returns
    -------
    charge_flux : A/cm^2, q (mu_n n + mu_p p) E
    electron_flux : electrons/(cm^2 s), mu_n n E
    """
    for name, v in (("n", n), ("p", p), ("mu_n", mu_n), ("mu_p", mu_p)):
        if v < 0:
            raise ValueError(f"{name} must be >= 0, got {v!r}")
    electron_flux = mu_n * n * E
    charge_flux = Q * (mu_n * n + mu_p * p) * E
    return charge_flux, electron_flux


def mobility(T: float, E: float, params: MaterialParams) -> float:
    """Electron mobility (cm^2/V s).

    The default ``constant`` model returns the 300 K reference value. The
    ``power-law`` model scales it as (300/T)^alpha and clamps at
    ``params.mobility_max``. ``E`` is accepted for interface stability; neither
    model depends on it.
    """
    if not (T > 0):
        raise ValueError(f"temperature must be > 0 K, got {T!r}")
    mu = params.electron_mobility_ref
    if params.mobility_model == "power-law":
        mu = min(mu * (300.0 / T) ** params.mobility_exponent, params.mobility_max)
    return mu
