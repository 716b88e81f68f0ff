"""Explicit adaptive Dormand-Prince 5(4) integration with forced stop times.

The right-hand side is called with times clamped into the current segment
between consecutive stop times, so a right-hand side that is piecewise
constant between stops is never sampled across a jump.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class IntegrationError(ArithmeticError):
    """Raised when the state becomes non-finite or the step size collapses."""

    def __init__(self, message, t):
        super().__init__(f"{message} at t={t!r}")
        self.t = t


@dataclass
class Solution:
    t: list = field(default_factory=list)
    y: list = field(default_factory=list)
    h: list = field(default_factory=list)
    stopped: bool = False


def dopri_step(f, t, y, h, lo, hi):
    """One Dormand-Prince step; returns (y5, error estimate vector)."""
    k = []
    for i in range(7):
        yi = y
        for j, aij in enumerate(_A[i]):
            if aij:
                yi = yi + h * aij * k[j]
        ti = min(max(t + _C[i] * h, lo), hi)
        k.append(f(ti, yi))
    k = np.array(k)
    y5 = y + h * np.tensordot(_B5, k, axes=1)
    err = h * np.tensordot(_E, k, axes=1)
    return y5, err


def integrate(f, y0, t0, t_end, tol=1e-10, stops=(), stop_when=None,
              h_init=None, h_max=None, post=None, max_steps=200_000):
    """Integrate y' = f(t, y) from t0 to t_end.

    Accepted steps satisfy ``|err_i| <= tol * (1 + |y_i|)`` componentwise.
    Every time in ``stops`` that lies inside (t0, t_end) is hit exactly.
    ``stop_when(t, y)`` is checked after each accepted step and ends the
    integration early (``Solution.stopped``).  ``post`` maps each accepted
    state (e.g. to resymmetrize it).
    """
    y = np.asarray(y0, dtype=float)
    t = float(t0)
    span = float(t_end) - t
    if span <= 0:
        raise ValueError("t_end must exceed t0")
    marks = sorted({float(s) for s in stops if t < s < t_end} | {float(t_end)})
    h_max = span if h_max is None else h_max
    h = h_init if h_init is not None else min(h_max, 1e-3 * span)
    sol = Solution(t=[t], y=[y.copy()])
    seg_lo = t
    for _ in range(max_steps):
        seg_hi = marks[0]
        hi = np.nextafter(seg_hi, seg_lo)
        step = min(h, h_max, seg_hi - t)
        landing = step >= seg_hi - t
        with np.errstate(over="ignore", invalid="ignore"):
            y_new, err = dopri_step(f, t, y, step, seg_lo, hi)
            ok = np.all(np.isfinite(y_new)) and np.all(np.isfinite(err))
            if ok:
                scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
                e = float(np.max(np.abs(err) / scale))
        if not ok:
            h = 0.25 * step
        elif e <= 1.0:
            t = seg_hi if landing else t + step
            y = post(y_new) if post is not None else y_new
            sol.t.append(t)
            sol.y.append(y.copy())
            sol.h.append(step)
            if landing:
                marks.pop(0)
                seg_lo = t
            if stop_when is not None and stop_when(t, y):
                sol.stopped = True
                return sol
            if not marks:
                return sol
            fac = 5.0 if e == 0.0 else min(5.0, 0.9 * e ** -0.2)
            # a step shortened to land on a stop says little about the next one
            h = max(h, step * fac) if landing and step < h else step * fac
        else:
            h = step * max(0.2, 0.9 * e ** -0.2)
        if h < 1e-15 * max(1.0, abs(t)):
            if not ok:
                raise IntegrationError("non-finite state", t)
            raise IntegrationError("step size underflow", t)
    raise IntegrationError("step budget exhausted", t)
