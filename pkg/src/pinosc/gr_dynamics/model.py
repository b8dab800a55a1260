"""
Generation-recombination rate equations with resistive-load circuit coupling.

State: free-electron density n (cm^-3), occupied trap fraction f, internal
field E (V/cm).  With C = C_i(E, T) and the cascade factor c(n) = n/(n + n_x):

    dn/dt = g_inj(E) + g_th(T) + g_opt + C c(n) n N_t f - T_c n N_t (1-f) - l n
    df/dt = -C c(n) n f + T_c n (1-f)
    dE/dt = [ (V - E W)/(R_L A) - j_cond(n, E) ] / eps_eff

    C_i(E, T) = X0 exp(-E_c / max(E, E_floor)) / (1 + exp((T - T_q)/dT)),  0 for E <= 0
    g_th      = g_th0 N_t f exp(-E_d / kT)
    g_inj     = g_inj0 tanh(max(E, 0) / E_inj)
    j_cond    = q mu n E for E > 0, clamped below at -j_leak for E <= 0

The cascade factor models ionization of a trap through an intermediate excited
state whose population is eliminated adiabatically: the ionization rate per
electron grows with n until n ~ n_x and saturates beyond.  With n_x = 0 the
factor is identically 1.  Without it the trap exchange balances exactly at
every equilibrium and the system cannot oscillate (see docs/model.md).

Internally the system is integrated in nondimensional variables
x = n/N_t, y = f, e = E/E_c and s = t * nu, nu = l (or T_c N_t when l = 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np

from ..carrier_statistics import (
    K_B, Q, ConfigError, DeviceParams, MaterialParams, _Validated, _require, mobility,
)

__all__ = [
    "GRParams",
    "GRState",
    "impact_ionization_coefficient",
    "control_parameter",
    "rhs",
    "ScaledSystem",
    "paper_like_params",
]


@dataclass(frozen=True)
class GRParams(_Validated):
    """Parameters of the rate equations. Defaults are the ``paper-like`` calibration."""

    trap_density: float = 1e16  # N_t, cm^-3
    ionization_prefactor: float = 0.0654  # X0, cm^3/s
    critical_field: float = 2212.0  # E_c, V/cm
    thermal_quench_temperature: float = 14.0  # T_q, K
    thermal_quench_width: float = 1.5  # dT, K
    capture_coefficient: float = 2.5e-9  # T_c, cm^3/s
    thermal_generation_prefactor: float = 3.4e21  # g_th0, 1/s
    optical_generation: float = 0.0  # g_opt, cm^-3/s
    recombination_rate: float = 5e6  # l, 1/s
    cascade_density: float = 5e15  # n_x, cm^-3
    injection_rate: float = 5e21  # g_inj0, cm^-3/s
    injection_field: float = 5.0  # E_inj, V/cm
    field_floor: float = 1e-3  # E_floor, V/cm
    leakage_current: float = 0.0  # j_leak, A/cm^2
    material: MaterialParams = field(default_factory=MaterialParams)
    device: DeviceParams = field(default_factory=DeviceParams)

    def problems(self):
        out = super().problems()
        for name in ("trap_density", "ionization_prefactor", "critical_field",
                     "thermal_quench_width", "capture_coefficient", "injection_field",
                     "field_floor"):
            _require(out, name, getattr(self, name) > 0, "must be > 0")
        for name in ("thermal_generation_prefactor", "optical_generation", "recombination_rate",
                     "cascade_density", "injection_rate", "leakage_current"):
            _require(out, name, getattr(self, name) >= 0, "must be >= 0")
        _require(out, "thermal_quench_temperature", self.thermal_quench_temperature > 0,
                 "must be > 0")
        _require(out, "material", isinstance(self.material, MaterialParams),
                 "must be MaterialParams")
        _require(out, "device", isinstance(self.device, DeviceParams), "must be DeviceParams")
        return out

    def replace(self, **changes) -> "GRParams":
        return replace(self, **changes)


def paper_like_params() -> GRParams:
    """Shipped calibration: oscillation island near 8-9 V and 6-13 K on a 565 um device."""
    return GRParams()


@dataclass(frozen=True)
class GRState:
    n: float  # cm^-3
    f: float  # occupied trap fraction
    E: float  # V/cm

    def __post_init__(self):
        bad = []
        if not (self.n >= 0):
            bad.append(("n", f"must be >= 0, got {self.n!r}"))
        if not (0.0 <= self.f <= 1.0) and not math.isnan(self.f):
            bad.append(("f", f"must be in [0, 1], got {self.f!r}"))
        if not math.isfinite(self.E):
            bad.append(("E", f"must be finite, got {self.E!r}"))
        if bad:
            raise ConfigError(bad, "state")

    def as_array(self) -> np.ndarray:
        return np.array([self.n, self.f, self.E])


def _thermal_quench(T: float, p: GRParams) -> float:
    z = (T - p.thermal_quench_temperature) / p.thermal_quench_width
    if z > 0:
        ez = math.exp(-z)
        return ez / (1.0 + ez)
    return 1.0 / (1.0 + math.exp(z))


def impact_ionization_coefficient(E: float, T: float, p: GRParams) -> float:
    """C_i(E, T) in cm^3/s; zero for E <= 0."""
    if not (T > 0):
        raise ValueError(f"temperature must be > 0 K, got {T!r}")
    if E <= 0:
        return 0.0
    return (p.ionization_prefactor * math.exp(-p.critical_field / max(E, p.field_floor))
            * _thermal_quench(T, p))


def control_parameter(E: float, T: float, n_t_occupied: float, p: GRParams) -> float:
    """Net autocatalytic growth rate per electron, X = C_i(E,T) * n_t_occupied - l (1/s)."""
    return impact_ionization_coefficient(E, T, p) * n_t_occupied - p.recombination_rate


def _cascade(n: float, n_x: float) -> float:
    if n_x == 0.0:
        return 1.0
    return n / (n + n_x)


def _thermal_generation_rate(T: float, p: GRParams) -> float:
    """g_th0 exp(-E_d/kT) in 1/s (multiply by N_t f)."""
    return p.thermal_generation_prefactor * math.exp(-p.material.donor_energy / (K_B * T))


def _injection(E: float, p: GRParams) -> float:
    if E <= 0:
        return 0.0
    return p.injection_rate * math.tanh(E / p.injection_field)


def conduction_current_density(n: float, E: float, mu: float, p: GRParams) -> float:
    """j_cond in A/cm^2 with the reverse-bias leakage clamp."""
    j = Q * mu * n * E
    if E <= 0:
        j = max(j, -p.leakage_current)
    return j


Bias = Union[float, Callable[[float], float]]


def rhs(s: GRState, t: float, V: Bias, T: float, p: GRParams):
    """Time derivatives (dn/dt, df/dt, dE/dt) in physical units.

    ``V`` is either the bias in volts or a callable ``V(t)``.
    """
    v = V(t) if callable(V) else V
    n, f, E = s.n, s.f, s.E
    N = p.trap_density
    C = impact_ionization_coefficient(E, T, p)
    ion = C * _cascade(n, p.cascade_density) * n  # per occupied trap, 1/s
    cap = p.capture_coefficient * n  # per empty trap, 1/s
    g = (_injection(E, p) + _thermal_generation_rate(T, p) * N * f + p.optical_generation)
    dn = g + ion * N * f - cap * N * (1.0 - f) - p.recombination_rate * n
    df = -ion * f + cap * (1.0 - f)
    dev = p.device
    mu = mobility(T, E, p.material)
    if dev.load_resistance == 0:
        dE = 0.0
    else:
        j_supply = (v - E * dev.i_region_width) / (dev.load_resistance * dev.junction_area)
        dE = (j_supply - conduction_current_density(n, E, mu, p)) / dev.effective_permittivity
    return dn, df, dE


class ScaledSystem:
    """Nondimensional right-hand side and analytic Jacobian at fixed (V, T, g_opt).

    Variables z = (n/N_t, f, E/E_c), time s = t * nu. ``freeze_field`` holds E
    constant (dE/dt = 0).
    """

    def __init__(self, p: GRParams, V: float, T: float, g_opt: float | None = None,
                 freeze_field: bool = False):
        if not (T > 0):
            raise ValueError(f"temperature must be > 0 K, got {T!r}")
        self.p = p
        self.V = V
        self.T = T
        N = p.trap_density
        self.N = N
        self.Ec = p.critical_field
        nu = p.recombination_rate
        if nu <= 0:
            nu = p.capture_coefficient * N
        self.nu = nu
        self.g_opt = p.optical_generation if g_opt is None else g_opt
        self.b = p.capture_coefficient * N / nu
        self.lam = p.recombination_rate / nu
        self.th = _thermal_generation_rate(T, p) / nu
        self.x1 = p.cascade_density / N
        self.quench = _thermal_quench(T, p)
        self.mu = mobility(T, 0.0, p.material)
        dev = p.device
        self.W = dev.i_region_width
        self.pinned = dev.load_resistance == 0
        self.freeze = freeze_field or self.pinned
        if not self.pinned:
            self.k_sup = 1.0 / (dev.load_resistance * dev.junction_area * dev.effective_permittivity
                                * self.Ec * nu)
        else:
            self.k_sup = 0.0
        self.k_cond = Q * self.mu * N / (dev.effective_permittivity * nu)
        self.j_leak_scaled = p.leakage_current / (dev.effective_permittivity * self.Ec * nu)
        self.e_floor = p.field_floor / self.Ec

    # -- conversions
    def to_scaled(self, s: GRState) -> np.ndarray:
        return np.array([s.n / self.N, s.f, s.E / self.Ec])

    def to_state(self, z) -> GRState:
        return GRState(max(z[0], 0.0) * self.N, min(max(z[1], 0.0), 1.0), z[2] * self.Ec)

    def time_scale(self) -> float:
        return 1.0 / self.nu

    def pinned_field(self) -> float:
        return self.V / self.W / self.Ec

    # -- pieces
    def _a(self, e):
        """Scaled ionization coefficient C N/nu and its derivative in e."""
        if e <= 0:
            return 0.0, 0.0
        p = self.p
        ee = max(e, self.e_floor)
        a = p.ionization_prefactor * self.N / self.nu * math.exp(-1.0 / ee) * self.quench
        da = a / (ee * ee) if e > self.e_floor else 0.0
        return a, da

    def _src(self, e):
        p = self.p
        base = self.g_opt / (self.N * self.nu)
        if e <= 0:
            return base, 0.0
        u = e * self.Ec / p.injection_field
        th = math.tanh(u)
        k = p.injection_rate / (self.N * self.nu)
        return base + k * th, k * (1.0 - th * th) * self.Ec / p.injection_field

    def _cas(self, x):
        x1 = self.x1
        if x1 == 0.0:
            return 1.0, 0.0
        d = x + x1
        if d <= 0:
            return 0.0, 1.0 / x1
        return x / d, x1 / (d * d)

    def fun(self, z):
        x, y, e = z[0], z[1], z[2]
        a, _ = self._a(e)
        cas, _ = self._cas(x)
        src, _ = self._src(e)
        G = a * y * x * cas
        K = self.b * x * (1.0 - y)
        dx = src + self.th * y + G - K - self.lam * x
        dy = -G + K
        if self.freeze:
            de = 0.0
        else:
            j = self.k_cond * x * e
            if e <= 0:
                j = max(j, -self.j_leak_scaled)
            de = self.k_sup * (self.V - e * self.Ec * self.W) - j
        return np.array([dx, dy, de])

    def jac(self, z):
        x, y, e = z[0], z[1], z[2]
        a, da = self._a(e)
        cas, dcas = self._cas(x)
        _, dsrc = self._src(e)
        b = self.b
        Gx = a * y * (cas + x * dcas)
        Gy = a * x * cas
        Ge = da * y * x * cas
        J = np.empty((3, 3))
        J[0, 0] = Gx - b * (1.0 - y) - self.lam
        J[0, 1] = self.th + Gy + b * x
        J[0, 2] = dsrc + Ge
        J[1, 0] = -Gx + b * (1.0 - y)
        J[1, 1] = -Gy - b * x
        J[1, 2] = -Ge
        if self.freeze:
            J[2, :] = 0.0
        else:
            active = e > 0 or self.k_cond * x * e > -self.j_leak_scaled
            J[2, 0] = -self.k_cond * e if active else 0.0
            J[2, 1] = 0.0
            J[2, 2] = -self.k_sup * self.Ec * self.W - (self.k_cond * x if active else 0.0)
        return J
