"""
Equilibria, linearization and Hopf-boundary tracking.

All linear algebra is done in the scaled variables z = (n/N_t, f, E/E_c) with
physical time, so Jacobian entries and eigenvalues are in 1/s.

Fixed points are found in two complementary ways and the results merged:

* At an equilibrium the trap balance fixes f as a function of (n, E) and the
  circuit balance fixes E as a function of n, so the electron balance becomes
  a scalar equation F(x) = 0 in x = n/N_t. Sign changes of F on a log-spaced
  grid bracket every isolated root.
* Damped Newton on the full three-variable system is started from every
  bracketed root and from a log-spaced (n, f) seed grid.

Roots outside the physical domain (n < 0 or f outside [0, 1]) are discarded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .model import GRParams, GRState, ScaledSystem

__all__ = [
    "NoEquilibriumError",
    "StabilityReport",
    "HopfPoint",
    "fixed_points",
    "jacobian",
    "classify_stability",
    "stability_at",
    "tracked_fixed_point",
    "hopf_boundary",
    "RESIDUAL_TOL",
]

RESIDUAL_TOL = 1e-8
_X_GRID = np.logspace(-12, 8, 161)
_NEWTON_X = np.logspace(-8, 2, 6)
_NEWTON_Y = (0.05, 0.5, 0.95)


class NoEquilibriumError(RuntimeError):
    """No physical equilibrium was found from any seed."""


@dataclass(frozen=True)
class StabilityReport:
    fixed_point: Optional[GRState]
    eigenvalues: np.ndarray  # complex, 1/s, sorted by descending real part
    classification: str
    oscillatory: bool

    @property
    def max_real(self) -> float:
        return float(np.max(self.eigenvalues.real))

    @property
    def is_stable(self) -> bool:
        return self.classification in ("stable-node", "stable-focus")


@dataclass(frozen=True)
class HopfPoint:
    V: float
    T: float
    hopf: bool  # the crossing eigenvalues form a complex pair
    frequency: float  # Hz, |Im(lambda)|/(2 pi) of the crossing pair (0 if real)
    direction: int  # +1 if unstable for V above the point, -1 if below


# ----------------------------------------------------------------------------
# fixed points

def _equilibrium_field(sys: ScaledSystem, x: float) -> float:
    if sys.freeze:
        return sys.pinned_field()
    num = sys.k_sup * sys.V
    den = sys.k_sup * sys.Ec * sys.W
    e = num / (den + sys.k_cond * x)
    if e < 0 and sys.k_cond * x * e < -sys.j_leak_scaled:
        e = (sys.V + sys.j_leak_scaled / sys.k_sup) / (sys.Ec * sys.W)
    return e


def _reduced(sys: ScaledSystem, x: float) -> Tuple[float, float, float]:
    """(F(x), y(x), e(x)) on the equilibrium manifold of the trap and circuit equations."""
    e = _equilibrium_field(sys, x)
    a, _ = sys._a(e)
    cas, _ = sys._cas(x)
    y = sys.b / (sys.b + a * cas) if (sys.b + a * cas) > 0 else 1.0
    src, _ = sys._src(e)
    return src + sys.th * y - sys.lam * x, y, e


def _newton(sys: ScaledSystem, z0, max_iter: int = 60):
    z = np.array(z0, dtype=float)
    F = sys.fun(z)
    r = float(np.linalg.norm(F))
    for _ in range(max_iter):
        if r <= 1e-14:
            break
        try:
            dz = np.linalg.solve(sys.jac(z), -F)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(dz)):
            return None
        lam = 1.0
        while lam > 1e-6:
            zn = z + lam * dz
            zn[0] = max(zn[0], 0.0)
            zn[1] = min(max(zn[1], 0.0), 1.0)
            Fn = sys.fun(zn)
            rn = float(np.linalg.norm(Fn))
            if rn < (1.0 - 1e-4 * lam) * r:
                break
            lam *= 0.5
        else:
            break
        z, F, r = zn, Fn, rn
    return z, r


def _residual_ok(r: float) -> bool:
    return r <= RESIDUAL_TOL


def _same(a, b) -> bool:
    return all(abs(u - v) <= 1e-6 * max(abs(u), abs(v)) + 1e-12 for u, v in zip(a, b))


def _dark_family(sys: ScaledSystem):
    """Stationary states with n = 0, if the sources vanish there."""
    e0 = _equilibrium_field(sys, 0.0)
    src, _ = sys._src(e0)
    if src != 0.0:
        return None
    if sys.th == 0.0:
        return np.array([0.0, math.nan, e0])
    return np.array([0.0, 0.0, e0])


def fixed_points(V: float, T: float, p: GRParams, g_opt: Optional[float] = None
                 ) -> List[GRState]:
    """All physical equilibria at bias ``V`` and temperature ``T``, sorted by descending n.

    If the dark state n = 0 is stationary for every f (no thermal, optical or
    injection source), it is reported once with ``f = nan``.

    Raises
    ------
    NoEquilibriumError
        if no seed converges to a physical root.
    """
    sys = ScaledSystem(p, V, T, g_opt=g_opt)
    seeds = []
    Fs = [_reduced(sys, x) for x in _X_GRID]
    for (F0, _, _), (F1, _, _), x0, x1 in zip(Fs[:-1], Fs[1:], _X_GRID[:-1], _X_GRID[1:]):
        if F0 == 0.0:
            seeds.append(x0)
        elif F0 * F1 < 0:
            seeds.append(brentq(lambda x: _reduced(sys, x)[0], x0, x1, xtol=1e-15, rtol=1e-14))
    starts = []
    for x in seeds:
        _, y, e = _reduced(sys, x)
        starts.append((x, y, e))
    for x in _NEWTON_X:
        e = _equilibrium_field(sys, x)
        for y in _NEWTON_Y:
            starts.append((x, y, e))

    roots: List[np.ndarray] = []
    fam = _dark_family(sys)
    if fam is not None:
        roots.append(fam)
    for z0 in starts:
        res = _newton(sys, z0)
        if res is None:
            continue
        z, r = res
        if not _residual_ok(r) or z[0] < 0 or not (0.0 <= z[1] <= 1.0):
            continue
        if fam is not None and z[0] <= 1e-12:
            continue
        if any(_same(z, q) for q in roots if not math.isnan(q[1])):
            continue
        roots.append(z)
    if not roots:
        raise NoEquilibriumError(f"no equilibrium found at V={V!r}, T={T!r}")
    roots.sort(key=lambda z: -z[0])
    return [GRState(z[0] * sys.N, z[1], z[2] * sys.Ec) for z in roots]


def tracked_fixed_point(V: float, T: float, p: GRParams, g_opt: Optional[float] = None
                        ) -> GRState:
    """The equilibrium with the largest n (the conducting branch)."""
    return fixed_points(V, T, p, g_opt)[0]


# ----------------------------------------------------------------------------
# linearization

def jacobian(s: GRState, V: float, T: float, p: GRParams, g_opt: Optional[float] = None
             ) -> np.ndarray:
    """Central finite-difference Jacobian in scaled state units (entries in 1/s).

    Relative step 1e-6 per variable with an absolute floor of 1e-12.
    """
    sys = ScaledSystem(p, V, T, g_opt=g_opt)
    z = np.array([s.n / sys.N, 0.0 if math.isnan(s.f) else s.f, s.E / sys.Ec])
    J = np.empty((3, 3))
    for k in range(3):
        h = max(1e-6 * abs(z[k]), 1e-12)
        zp = z.copy()
        zm = z.copy()
        zp[k] += h
        zm[k] -= h
        J[:, k] = (sys.fun(zp) - sys.fun(zm)) / (2.0 * h)
    return J * sys.nu


def _cubic_roots(c2: float, c1: float, c0: float) -> np.ndarray:
    """Roots of x^3 + c2 x^2 + c1 x + c0, closed form with Newton polishing."""
    # one real root: trigonometric or Cardano form of the depressed cubic
    sh = c2 / 3.0
    pp = c1 - c2 * c2 / 3.0
    qq = 2.0 * sh ** 3 - sh * c1 + c0
    disc = (qq / 2.0) ** 2 + (pp / 3.0) ** 3
    if disc > 0:
        sq = math.sqrt(disc)
        # pick the branch that avoids cancellation
        u = -qq / 2.0 - sq if qq > 0 else -qq / 2.0 + sq
        u = math.copysign(abs(u) ** (1.0 / 3.0), u)
        t = u - pp / (3.0 * u) if u != 0 else 0.0
    elif pp == 0.0:
        t = 0.0
    else:
        m = 2.0 * math.sqrt(-pp / 3.0)
        arg = 3.0 * qq / (pp * m)
        arg = min(1.0, max(-1.0, arg))
        t = m * math.cos(math.acos(arg) / 3.0)
    r = t - sh

    def poly(x):
        return ((x + c2) * x + c1) * x + c0, (3.0 * x + 2.0 * c2) * x + c1

    for _ in range(8):
        f, df = poly(r)
        if df == 0.0:
            break
        step = f / df
        r_new = r - step
        if abs(poly(r_new)[0]) >= abs(f):
            break
        r = r_new
    # deflate: x^2 + b x + c
    b = c2 + r
    c = c1 + b * r
    d = b * b - 4.0 * c
    if d >= 0:
        sq = math.sqrt(d)
        w = -0.5 * (b + math.copysign(sq, b)) if b != 0 else -0.5 * sq
        if w == 0.0:
            r2, r3 = 0.0, (-b if b else 0.0)
        else:
            r2, r3 = w, c / w
        return np.array([complex(r), complex(r2), complex(r3)])
    re = -b / 2.0
    im = math.sqrt(-d) / 2.0
    return np.array([complex(r), complex(re, im), complex(re, -im)])


def _classify(ev: np.ndarray, scale: float) -> Tuple[str, bool]:
    tol = 1e-10 * scale
    re = ev.real
    im = ev.imag
    pair = bool(np.any(np.abs(im) > tol))
    if np.any(np.abs(re) <= tol):
        return "marginal", pair
    n_pos = int(np.sum(re > 0))
    if n_pos == 0:
        return ("stable-focus" if pair else "stable-node"), pair
    if pair:
        pair_re = re[np.abs(im) > tol][0]
        if pair_re > 0:
            return "unstable-focus", pair
        return "saddle", pair
    if n_pos == 3:
        return "unstable-node", pair
    return "saddle", pair


def classify_stability(J, fixed_point: Optional[GRState] = None) -> StabilityReport:
    """Eigenvalues of a 3x3 matrix from its characteristic cubic, and a stability class.

    Classes: ``stable-node``, ``stable-focus`` (all Re < 0, without / with a
    complex pair); ``unstable-focus`` (a complex pair with Re > 0);
    ``unstable-node`` (three positive real eigenvalues); ``saddle`` (other
    sign mixtures); ``marginal`` (some |Re| <= 1e-10 ||J||).
    """
    J = np.asarray(J, dtype=float)
    if J.shape != (3, 3) or not np.all(np.isfinite(J)):
        raise ValueError("J must be a finite 3x3 matrix")
    scale = float(np.linalg.norm(J))
    if scale == 0.0:
        ev = np.zeros(3, dtype=complex)
        return StabilityReport(fixed_point, ev, "marginal", False)
    A = J / scale
    tr = A[0, 0] + A[1, 1] + A[2, 2]
    minors = (A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0] + A[0, 0] * A[2, 2] - A[0, 2] * A[2, 0]
              + A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
    det = float(np.linalg.det(A))
    ev = _cubic_roots(-tr, minors, -det) * scale
    ev = ev[np.argsort(-ev.real, kind="stable")]
    cls, pair = _classify(ev, scale)
    return StabilityReport(fixed_point, ev, cls, pair)


def stability_at(V: float, T: float, p: GRParams, g_opt: Optional[float] = None
                 ) -> StabilityReport:
    """Stability report of the tracked (largest-n) equilibrium."""
    s = tracked_fixed_point(V, T, p, g_opt)
    return classify_stability(jacobian(s, V, T, p, g_opt), s)


# ----------------------------------------------------------------------------
# Hopf boundary

def _growth(V: float, T: float, p: GRParams):
    try:
        rep = stability_at(V, T, p)
    except NoEquilibriumError:
        return math.nan, None
    return rep.max_real, rep


def hopf_boundary(V_range: Sequence[float], T_range: Sequence[float], p: GRParams,
                  grid: Tuple[int, int] = (40, 12)) -> List[HopfPoint]:
    """Stability-change points of the tracked equilibrium on a (V, T) grid.

    For each of ``grid[1]`` temperatures in ``T_range`` the maximal growth rate
    is sampled at ``grid[0]`` voltages; each sign change is refined by Brent's
    method well below 1e-3 of the voltage span. A point is tagged ``hopf``
    when the eigenvalues crossing zero form a complex pair.
    """
    V0, V1 = map(float, V_range)
    T0, T1 = map(float, T_range)
    nV, nT = int(grid[0]), int(grid[1])
    if not (V1 > V0) or not (T1 >= T0) or nV < 2 or nT < 1:
        raise ValueError("need V_range with stop > start, T_range with stop >= start, "
                         "at least 2 voltages and 1 temperature")
    span = V1 - V0
    Vs = np.linspace(V0, V1, nV)
    Ts = np.linspace(T0, T1, nT) if nT > 1 else np.array([T0])
    out: List[HopfPoint] = []
    for T in Ts:
        g = [_growth(V, T, p)[0] for V in Vs]
        for k in range(nV - 1):
            ga, gb = g[k], g[k + 1]
            if not (math.isfinite(ga) and math.isfinite(gb)) or (ga > 0) == (gb > 0):
                continue
            Vc = brentq(lambda v: _growth(v, T, p)[0], Vs[k], Vs[k + 1],
                        xtol=1e-9 * span, rtol=1e-14)
            _, rep = _growth(Vc, T, p)
            if rep is None:
                continue
            lead = rep.eigenvalues[0]
            freq = abs(lead.imag) / (2.0 * math.pi)
            hopf = abs(lead.imag) > 1e-6 * float(np.linalg.norm(
                jacobian(rep.fixed_point, Vc, T, p)))
            out.append(HopfPoint(float(Vc), float(T), bool(hopf), freq if hopf else 0.0,
                                 +1 if gb > 0 else -1))
    return out
