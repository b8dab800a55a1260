"""
Adaptive Rosenbrock (Rodas3) integrator for small stiff autonomous systems.

Rodas3 is a 4-stage, L-stable, stiffly accurate method of order 3 with an
embedded order-2 solution for error control. With an exact Jacobian every
stage increment lies in the range of the Jacobian, so linear invariants of
the vector field (w.f(y) = 0 and w.J = 0) are conserved to round-off.

Dense output is cubic Hermite interpolation on the accepted steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = ["StepStats", "StepSizeUnderflow", "rodas3"]

# (A, C, M, E) in the W-transformed formulation:
#   (1/(h g) I - J) K_i = f(y + sum_j A_ij K_j) + sum_j C_ij / h K_j
GAMMA = 0.5
A = ((), (0.0,), (2.0, 0.0), (2.0, 0.0, 1.0))
C = ((), (4.0,), (1.0, -1.0), (1.0, -1.0, -8.0 / 3.0))
M = (2.0, 0.0, 1.0, 1.0)
E = (0.0, 0.0, 0.0, 1.0)
ORDER = 3
ERR_ORDER = 3.0  # exponent for step-size control


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    bounds_rejected: int = 0
    fun_evals: int = 0
    jac_evals: int = 0


class StepSizeUnderflow(RuntimeError):
    def __init__(self, t, y, h):
        super().__init__(f"step size {h:.3e} underflow at t={t:.6e}")
        self.t = t
        self.y = np.array(y)
        self.h = h


@dataclass
class _Dense:
    t: list = field(default_factory=list)
    y: list = field(default_factory=list)
    f: list = field(default_factory=list)


def _hermite(t0, t1, y0, y1, f0, f1, tq):
    h = t1 - t0
    s = (tq - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def rodas3(fun: Callable[[np.ndarray], np.ndarray],
           jac: Callable[[np.ndarray], np.ndarray],
           y0, t0: float, t1: float, *,
           rtol: float = 1e-6, atol: float = 1e-10,
           h0: Optional[float] = None, h_min: float = 0.0, h_max: float = math.inf,
           t_eval=None, admissible: Optional[Callable[[np.ndarray], bool]] = None,
           max_steps: int = 10_000_000, fixed_step: Optional[float] = None):
    """Integrate the autonomous system ``y' = fun(y)`` from ``t0`` to ``t1``.

    Parameters
    ----------
    admissible : optional predicate; a step whose result fails it is rejected
        and retried with half the step (used to keep states in their domain).
    t_eval : sorted times in [t0, t1] at which dense output is returned.
    fixed_step : if given, take uniform steps of this size without error control
        (used for order verification).

    Returns
    -------
    y_end, y_eval (len(t_eval) x n array or None), stats, h_last
    """
    y = np.array(y0, dtype=float)
    n = y.size
    eye = np.eye(n)
    stats = StepStats()
    t_eval = None if t_eval is None else np.asarray(t_eval, dtype=float)
    out = None if t_eval is None else np.empty((t_eval.size, n))
    k_eval = 0

    span = t1 - t0
    if span <= 0:
        if out is not None:
            out[:] = y
        return y, out, stats, h0 or 0.0

    f0 = fun(y)
    stats.fun_evals += 1
    if fixed_step is not None:
        h = fixed_step
    elif h0 is not None:
        h = h0
    else:
        sc = atol + rtol * np.abs(y)
        d = math.sqrt(np.mean((f0 / sc) ** 2))
        h = 0.01 * span if d == 0 else min(0.01 * span, 0.1 * (rtol ** (1 / ORDER)) / d)
        h = max(h, 1e-6 * span * rtol, min(h_min, span))  # a cautious guess is not underflow
    h = min(h, h_max)

    # emit any eval points at t0
    while out is not None and k_eval < t_eval.size and t_eval[k_eval] <= t0:
        out[k_eval] = y
        k_eval += 1

    t = t0
    K = [None] * 4
    J = None
    last_reject = False
    while t < t1:
        if stats.accepted + stats.rejected > max_steps:
            raise StepSizeUnderflow(t, y, h)
        if h < h_min:
            raise StepSizeUnderflow(t, y, h)
        last = t + h >= t1 - 1e-14 * abs(span)
        if last:
            h = t1 - t
        if J is None:
            J = jac(y)
            stats.jac_evals += 1
        W = eye / (h * GAMMA) - J
        try:
            Winv = np.linalg.inv(W)
        except np.linalg.LinAlgError:
            h *= 0.25
            stats.rejected += 1
            continue
        for i in range(4):
            if i == 0:
                rhs = f0.copy()
            else:
                yi = y.copy()
                for j, a in enumerate(A[i]):
                    if a:
                        yi += a * K[j]
                rhs = fun(yi)
                stats.fun_evals += 1
                for j, c in enumerate(C[i]):
                    rhs += (c / h) * K[j]
            K[i] = Winv @ rhs
        y_new = y.copy()
        err_vec = np.zeros(n)
        for i in range(4):
            if M[i]:
                y_new += M[i] * K[i]
            if E[i]:
                err_vec += E[i] * K[i]

        if fixed_step is not None:
            err = 0.0
        else:
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = math.sqrt(np.mean((err_vec / sc) ** 2))
        finite = np.all(np.isfinite(y_new)) and math.isfinite(err)

        if finite and err <= 1.0 and (admissible is None or admissible(y_new)):
            f_new = fun(y_new)
            stats.fun_evals += 1
            t_new = t1 if last else t + h
            if out is not None:
                while k_eval < t_eval.size and t_eval[k_eval] <= t_new:
                    out[k_eval] = _hermite(t, t_new, y, y_new, f0, f_new, t_eval[k_eval])
                    k_eval += 1
            t, y, f0 = t_new, y_new, f_new
            stats.accepted += 1
            J = None
            if fixed_step is None:
                fac = 0.9 * err ** (-1.0 / ERR_ORDER) if err > 0 else 5.0
                fac = min(5.0, max(0.2, fac))
                if last_reject:
                    fac = min(fac, 1.0)
                h = min(h * fac, h_max)
            last_reject = False
        else:
            if fixed_step is not None:
                raise StepSizeUnderflow(t, y, h)
            stats.rejected += 1
            if finite and err <= 1.0:
                stats.bounds_rejected += 1
                h *= 0.5
            elif finite:
                h *= max(0.2, 0.9 * err ** (-1.0 / ERR_ORDER))
            else:
                h *= 0.25
            last_reject = True
    if out is not None and k_eval < t_eval.size:
        out[k_eval:] = y
    return y, out, stats, h
