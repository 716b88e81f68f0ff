"""Symmetric matrix Riccati flow A' = A^2 - R with pinched R, and its barriers.

With ``a^2 Id <= R(t) <= b^2 Id`` the extreme eigenvalues of ``A`` are
squeezed between the scalar solutions ``c coth(c(eps - t))`` (which blow up
at ``eps``) and ``c tanh(c(eps - t))`` (which vanish at ``eps``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .integrate import integrate
from .linalg import check_symmetric, eigen_extremes, jacobi_eigvalsh

BLOW_UP = 1e6
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class PinchBounds:
    a: float
    b: float

    def __post_init__(self):
        if not (0 < self.a <= self.b):
            raise ValueError(f"pinching needs 0 < a <= b, got a={self.a}, b={self.b}")

    def forward_band(self, eps):
        """[b tanh(b eps), a coth(a eps)]: initial eigenvalues that survive to eps."""
        return self.b * np.tanh(self.b * eps), self.a / np.tanh(self.a * eps)

    def converse_band(self, eps):
        """[a tanh(a eps), b coth(b eps)]: necessary range for survival to eps."""
        return self.a * np.tanh(self.a * eps), self.b / np.tanh(self.b * eps)


def scalar_coth_barrier(c, eps, t):
    """c coth(c (eps - t)), the maximal solution of -x' + x^2 - c^2 = 0 blowing up at eps."""
    t = np.asarray(t, dtype=float)
    if np.any(t >= eps):
        raise ValueError(f"coth barrier is only defined for t < eps={eps}")
    out = c / np.tanh(c * (eps - t))
    return float(out) if out.ndim == 0 else out


def scalar_tanh_barrier(c, eps, t):
    """c tanh(c (eps - t)), the solution of -x' + x^2 - c^2 = 0 vanishing at eps."""
    out = c * np.tanh(c * (eps - np.asarray(t, dtype=float)))
    return float(out) if out.ndim == 0 else out


@dataclass
class RiccatiTrajectory:
    times: np.ndarray
    states: np.ndarray
    steps: np.ndarray
    blow_up_detected: bool = False
    blow_up_time: float | None = None
    detection_time: float | None = None
    fell_below: bool = False

    @cached_property
    def extremes(self):
        return eigen_extremes(self.states)

    @property
    def lambda_minus(self):
        return self.extremes[0]

    @property
    def lambda_plus(self):
        return self.extremes[1]

    def at(self, t):
        """State at a time that was hit exactly (a stop time or endpoint)."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-12 * max(1.0, abs(t)):
            raise KeyError(f"t={t} is not a sampled time")
        return self.states[i]


def _gershgorin_max(A):
    return float(np.max(np.sum(np.abs(A), axis=1)))


def _above(A, level):
    """True if A - level*Id is positive definite (a Cholesky attempt, no eigenvalues)."""
    try:
        np.linalg.cholesky(A - level * np.eye(len(A)))
    except np.linalg.LinAlgError:
        return False
    return True


def integrate_riccati(A0, R_fn, t_end, tol=DEFAULT_TOL, blow_up=BLOW_UP,
                      t_eval=(), h_max=None, stop_below=None):
    """Integrate A' = A^2 - R(t) from A(0) = A0 toward t_end.

    Stops early once the largest eigenvalue reaches ``blow_up``; the
    trajectory then records the detection time and the extrapolated singular
    time ``t + 1/lambda_+`` (the leading-order asymptote A ~ 1/(T - t)).
    Times in ``t_eval`` and any ``R_fn.breakpoints`` are hit exactly.
    With ``stop_below`` set, integration also ends (``fell_below``) once the
    smallest eigenvalue drops under that value.
    """
    A0 = check_symmetric(A0)
    n = A0.shape[0]
    R0 = check_symmetric(R_fn(0.0))
    if R0.shape != (n, n):
        raise ValueError(f"R has shape {R0.shape}, expected {(n, n)}")

    def rhs(t, y):
        A = y.reshape(n, n)
        return (A @ A - R_fn(t)).ravel()

    def symmetrize(y):
        A = y.reshape(n, n)
        return (0.5 * (A + A.T)).ravel()

    def exploded(t, y):
        A = y.reshape(n, n)
        if stop_below is not None and not _above(A, stop_below):
            if jacobi_eigvalsh(A)[0] < stop_below:
                return True
        if _gershgorin_max(A) < blow_up:
            return False
        return jacobi_eigvalsh(A)[-1] >= blow_up

    stops = list(t_eval) + list(getattr(R_fn, "breakpoints", ()))
    sol = integrate(rhs, A0.ravel(), 0.0, t_end, tol=tol, stops=stops,
                    stop_when=exploded, post=symmetrize, h_max=h_max)
    states = np.array(sol.y).reshape(-1, n, n)
    traj = RiccatiTrajectory(times=np.array(sol.t), states=states, steps=np.array(sol.h))
    if sol.stopped:
        lo, lam = (float(v) for v in eigen_extremes(states[-1]))
        if stop_below is not None and lo < stop_below and lam < blow_up:
            traj.fell_below = True
            return traj
        traj.blow_up_detected = True
        traj.detection_time = sol.t[-1]
        traj.blow_up_time = sol.t[-1] + 1.0 / lam
    return traj


# -- randomized curvature operators -----------------------------------------

def random_symmetric(rng, n, lo, hi):
    """Symmetric matrix with eigenvalues uniform in [lo, hi] and a Haar-ish basis."""
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    w = rng.uniform(lo, hi, size=n)
    A = (q * w) @ q.T
    return 0.5 * (A + A.T)


@dataclass
class PiecewiseConstantR:
    """R(t) = pieces[k] on [breakpoints[k-1], breakpoints[k]) (right-continuous)."""

    breakpoints: np.ndarray
    pieces: list = field(default_factory=list)

    def __call__(self, t):
        return self.pieces[int(np.searchsorted(self.breakpoints, t, side="right"))]


def random_piecewise_R(rng, n, bounds: PinchBounds, t_end, max_pieces=6):
    k = int(rng.integers(1, max_pieces + 1))
    cuts = np.sort(rng.uniform(0.0, t_end, size=k - 1))
    pieces = [random_symmetric(rng, n, bounds.a**2, bounds.b**2) for _ in range(k)]
    return PiecewiseConstantR(breakpoints=cuts, pieces=pieces)


def constant_R(c2, n):
    R = c2 * np.eye(n)
    return lambda t: R


# -- checks of the comparison statements ------------------------------------

@dataclass
class ForwardReport:
    eps: float
    t_end: float
    min_lambda_minus: float
    max_lambda_plus: float
    argmin_time: float
    blow_up_detected: bool
    upper_barrier_ok: bool
    lower_barrier_ok: bool
    trajectory: RiccatiTrajectory = field(repr=False)

    @property
    def positive(self):
        return (not self.blow_up_detected) and self.min_lambda_minus > 0.0


def forward_positivity_check(A0, R_fn, bounds: PinchBounds, eps, margin=None,
                             tol=DEFAULT_TOL, slack=1e-12, barrier_tol=1e-8):
    """Survival and positivity on [0, eps - margin] for A0 in the forward band.

    Raises ValueError naming the violated bound when A0 is outside
    ``[b tanh(b eps), a coth(a eps)]``.
    """
    A0 = check_symmetric(A0)
    lo, hi = eigen_extremes(A0)
    band_lo, band_hi = bounds.forward_band(eps)
    if lo < band_lo - slack:
        raise ValueError(f"lower bound violated: lambda_-(A0)={lo:.12g} < b*tanh(b*eps)={band_lo:.12g}")
    if hi > band_hi + slack:
        raise ValueError(f"upper bound violated: lambda_+(A0)={hi:.12g} > a*coth(a*eps)={band_hi:.12g}")
    margin = 1e-3 * eps if margin is None else margin
    t_end = eps - margin
    traj = integrate_riccati(A0, R_fn, t_end, tol=tol)
    lam_m, lam_p = traj.extremes
    t = traj.times
    upper_ok = bool(np.all(lam_p <= scalar_coth_barrier(bounds.a, eps, t) + barrier_tol))
    lower_ok = bool(np.all(lam_m >= scalar_tanh_barrier(bounds.b, eps, t) - barrier_tol))
    i = int(np.argmin(lam_m))
    return ForwardReport(eps=eps, t_end=t_end, min_lambda_minus=float(lam_m[i]),
                         max_lambda_plus=float(np.max(lam_p)), argmin_time=float(t[i]),
                         blow_up_detected=traj.blow_up_detected, upper_barrier_ok=upper_ok,
                         lower_barrier_ok=lower_ok, trajectory=traj)


@dataclass
class ConverseReport:
    eps: float
    t_end: float
    hypothesis_met: bool
    lambda_minus0: float
    lambda_plus0: float
    bound_low: float
    bound_high: float
    bounds_hold: bool | None
    status: str
    trajectory: RiccatiTrajectory = field(repr=False)


def converse_bounds_check(A0, R_fn, bounds: PinchBounds, eps, margin=None,
                          tol=DEFAULT_TOL, nonneg_tol=1e-9, bound_tol=1e-9):
    """If A stays defined and nonnegative on [0, eps - margin], test the converse band at t=0."""
    A0 = check_symmetric(A0)
    margin = 1e-3 * eps if margin is None else margin
    t_end = eps - margin
    # once lambda_- is negative the hypothesis has failed; no need to go on
    traj = integrate_riccati(A0, R_fn, t_end, tol=tol, stop_below=-nonneg_tol)
    lo0, hi0 = (float(v) for v in eigen_extremes(A0))
    band_lo, band_hi = bounds.converse_band(eps)
    met = (not traj.blow_up_detected and not traj.fell_below
           and float(np.min(traj.lambda_minus)) >= -nonneg_tol)
    if met:
        holds = bool(band_lo - bound_tol <= lo0 and hi0 <= band_hi + bound_tol)
        status = "bounds hold" if holds else "bounds violated"
    else:
        holds = None
        status = "hypothesis not met"
    return ConverseReport(eps=eps, t_end=t_end, hypothesis_met=met, lambda_minus0=lo0,
                          lambda_plus0=hi0, bound_low=float(band_lo), bound_high=float(band_hi),
                          bounds_hold=holds, status=status, trajectory=traj)


def comparison_witness(kind, times, values, c, eps):
    """Monotone comparison quantity between a sampled path and a scalar barrier.

    ``phi``: (c coth(c(eps-t)) - s) exp(-int_0^t (barrier + s)), nondecreasing
    when -s' + s^2 >= c^2.  ``psi``: (i - c tanh(c(eps-t))) exp(-int_0^t (i +
    barrier)), nondecreasing when -i' + i^2 <= c^2.  The integral uses the
    trapezoid rule on the (uniform) sample grid.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValueError("times and values must be 1-d arrays of equal length")
    if len(times) < 8:
        raise ValueError(f"grid too coarse: {len(times)} samples, need at least 8")
    dt = np.diff(times)
    if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise ValueError("samples must lie on a uniform increasing grid")
    if kind == "phi":
        if times[-1] >= eps:
            raise ValueError("phi witness needs the grid to end before eps")
        barrier = scalar_coth_barrier(c, eps, times)
        gap = barrier - values
    elif kind == "psi":
        barrier = scalar_tanh_barrier(c, eps, times)
        gap = values - barrier
    else:
        raise ValueError(f"unknown witness kind {kind!r}")
    damp = cumulative_trapezoid(barrier + values, times, initial=0.0)
    return gap * np.exp(-damp)
