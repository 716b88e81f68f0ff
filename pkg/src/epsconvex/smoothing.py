"""Riemannian convolution smoothing of the distance to a body.

f_kappa(x) = int_{T_x M} psi_kappa(|v|) f(exp_x v) dv, with f the (outer)
distance to the body and psi_kappa a radial bump of support radius kappa.
Derivatives of f_kappa are taken by geodesic finite differences.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import gamma, pi

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .bodies import ConvexBody, boundary_sample
from .geometry import mink_inner


def _smooth_step(y):
    """C-infinity step: 0 for y <= 0, 1 for y >= 1."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f0 = np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)
        f1 = np.where(y < 1, np.exp(-1.0 / np.where(y < 1, 1.0 - y, 1.0)), 0.0)
    return f0 / (f0 + f1)


def _sphere_area(m):
    return 2.0 * pi ** (m / 2) / gamma(m / 2)


@dataclass(frozen=True)
class BumpKernel:
    """Radial bump psi_kappa on R^m: constant on [0, plateau*kappa], zero beyond kappa."""

    kappa: float
    m: int = 2
    plateau: float = 0.1
    norm_const: float = field(init=False)

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if not 0 < self.plateau < 1:
            raise ValueError("plateau must lie in (0, 1)")
        opts = dict(epsabs=1e-15, epsrel=1e-13, limit=200)
        inner = self.plateau ** self.m / self.m
        outer = quad(lambda u: self.profile(u) * u ** (self.m - 1), self.plateau, 1.0, **opts)[0]
        object.__setattr__(self, "norm_const", 1.0 / (_sphere_area(self.m) * (inner + outer)))

    def profile(self, u):
        """Unnormalized shape on the unit scale: 1 on the plateau, smoothly down to 0 at |u| = 1."""
        u = np.abs(np.asarray(u, dtype=float))
        return _smooth_step((1.0 - u) / (1.0 - self.plateau))

    def __call__(self, t):
        out = self.norm_const * self.profile(np.asarray(t, dtype=float) / self.kappa) / self.kappa**self.m
        return float(out) if np.ndim(out) == 0 else out


def kernel_eval(k: BumpKernel, t):
    return k(t)


@dataclass
class SmoothedField:
    """f_kappa for the distance to ``body`` (m = 2), with fixed (radial, angular) node counts.

    Radial Gauss-Legendre nodes are placed separately on the plateau and on
    the decaying part of the kernel; angular nodes are equispaced
    (trapezoid).  The discrete weights are rescaled to sum to one, so
    constants are reproduced exactly.
    """

    body: ConvexBody
    kappa: float
    quadrature: tuple = (24, 64)
    plateau: float = 0.1

    def __post_init__(self):
        if self.body.space.m != 2:
            raise ValueError("smoothing is implemented for m = 2 only")
        n_r, n_t = self.quadrature
        if n_r < 16 or n_t < 32:
            raise ValueError("quadrature needs at least (16, 32) nodes")
        self.kernel = BumpKernel(self.kappa, m=2, plateau=self.plateau)
        g, gw = np.polynomial.legendre.leggauss(n_r)
        edges = [(0.0, self.plateau * self.kappa), (self.plateau * self.kappa, self.kappa)]
        r = np.concatenate([0.5 * (hi - lo) * (g + 1) + lo for lo, hi in edges])
        rw = np.concatenate([0.5 * (hi - lo) * gw for lo, hi in edges])
        theta = 2 * np.pi * np.arange(n_t) / n_t
        w = (rw * r * self.kernel(r))[:, None] * np.full(n_t, 2 * np.pi / n_t)
        self._radii = r
        self._cos = np.cos(theta)
        self._sin = np.sin(theta)
        self._weights = (w / w.sum()).ravel()

    def f(self, x):
        return self.body.distance(x)

    def nodes(self, x):
        space = self.body.space
        e1, e2 = space.tangent_frame(x)
        dirs = self._cos[:, None] * e1 + self._sin[:, None] * e2
        v = self._radii[:, None, None] * dirs[None, :, :]
        return space.exp(x, v.reshape(-1, space.dim))

    def __call__(self, x):
        return float(self._weights @ self.f(self.nodes(np.asarray(x, dtype=float))))


def smoothed_value(fld: SmoothedField, x):
    return fld(x)


def _check_step(fld, h):
    h = fld.kappa / 4 if h is None else h
    if h > fld.kappa / 4:
        raise ValueError(f"finite-difference step h={h} exceeds kappa/4={fld.kappa / 4}")
    return h


def numeric_gradient(fld: SmoothedField, x, h=None):
    """Tangent vector grad f_kappa(x) from geodesic central differences in a frame."""
    h = _check_step(fld, h)
    space = fld.body.space
    frame = space.tangent_frame(x)
    d = [(fld(space.exp(x, h * e)) - fld(space.exp(x, -h * e))) / (2 * h) for e in frame]
    return np.asarray(d) @ frame


def numeric_hessian(fld: SmoothedField, x, h=None):
    """(frame, H): Hessian of f_kappa in an orthonormal frame, from second differences.

    Along a geodesic s -> exp_x(s u) the second derivative of f is Hess(u, u);
    the frame directions give the diagonal and the two diagonals
    (e1 +- e2)/sqrt(2) give the off-diagonal entry.
    """
    h = _check_step(fld, h)
    space = fld.body.space
    frame = space.tangent_frame(x)
    f0 = fld(x)

    def second(u):
        return (fld(space.exp(x, h * u)) - 2 * f0 + fld(space.exp(x, -h * u))) / h**2

    k = len(frame)
    H = np.zeros((k, k))
    for i in range(k):
        H[i, i] = second(frame[i])
        for j in range(i + 1, k):
            dp = second((frame[i] + frame[j]) / np.sqrt(2))
            dm = second((frame[i] - frame[j]) / np.sqrt(2))
            H[i, j] = H[j, i] = 0.5 * (dp - dm)
    return frame, 0.5 * (H + H.T)


def level_set_curvature(fld: SmoothedField, x, h=None):
    """II of the level set of f_kappa through x, seen from the sublevel side.

    Equals Hess(Z, Z) / |grad| for the unit tangent Z of the level curve.
    Returns (curvature, gradient norm).
    """
    space = fld.body.space
    grad = numeric_gradient(fld, x, h)
    gnorm = space.norm(grad)
    frame, H = numeric_hessian(fld, x, h)
    z = np.array([-mink_inner(grad, frame[1]), mink_inner(grad, frame[0])]) / gnorm
    return float(z @ H @ z / gnorm), float(gnorm)


# -- the smoothed level set check ------------------------------------------------

@dataclass
class SmoothingReport:
    alpha: float
    beta: float
    eta: float
    alpha_p: float
    beta_p: float
    eta_p: float
    kappa: float
    level: float
    min_gradient: float
    curvature_low: float
    curvature_high: float
    curvature_ok: bool
    inclusion_probes: int
    inclusion_failures: dict
    passed: bool
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def select_eta(body, alpha, beta, eta, alpha_p, beta_p, n_levels=33, max_halvings=30):
    """Largest eta' in {eta, eta/2, ...} whose equidistant level sets keep II in the inner band."""
    lo = 0.5 * (alpha_p + alpha)
    hi = 0.5 * (beta + beta_p)
    e = eta
    for _ in range(max_halvings):
        ok = True
        for s in np.linspace(0.0, e, n_levels):
            cf = body.dilate(s).closed_form_ii() if s > 0 else body.closed_form_ii()
            if cf is None:
                raise ValueError("level sets of this body have no closed-form curvature")
            if cf[0] < lo or cf[1] > hi:
                ok = False
                break
        if ok:
            return e
        e *= 0.5
    raise ValueError("no admissible eta' found")


def _level_points(fld, body, level, n):
    """Points where f_kappa = level, found along outward normals from boundary samples."""
    space = body.space
    sample = boundary_sample(body, n)
    out = []
    for p in sample.points:
        nrm = body.normal_field(p)
        g = lambda s: fld(space.exp(p, -s * nrm)) - level
        lo, hi = max(level - 2 * fld.kappa, 0.0), level + 2 * fld.kappa
        s = brentq(g, lo, hi, xtol=1e-14)
        out.append(space.exp(p, -s * nrm))
    return np.array(out)


def smoothed_levelset_check(body: ConvexBody, alpha, beta, eta, alpha_p, beta_p,
                            kappa=None, n_level=16, n_probe=64, seed=0, band_tol=5e-3,
                            probe_tol=1e-6, quadrature=(24, 64)):
    """Smooth the distance to ``body`` and check the resulting level set.

    Chooses eta' (halving eta), kappa = eta'/12 and the level t = eta'/2,
    moved by eta'/12 if the gradient probe finds |grad f_kappa| < 0.5.  Then
    checks C in N_{3 kappa} C in {f_kappa <= t} in N_{eta'} C on probe
    points and that the level set's curvature lies in
    [alpha_p - band_tol, beta_p + band_tol].
    """
    for name, ok in (("0 < alpha_p", 0 < alpha_p), ("alpha_p < alpha", alpha_p < alpha),
                     ("alpha <= beta", alpha <= beta), ("beta < beta_p", beta < beta_p),
                     ("eta > 0", eta > 0)):
        if not ok:
            raise ValueError(f"precondition violated: {name}")
    cf = body.closed_form_ii()
    if cf is None:
        raise ValueError("body needs closed-form curvature bounds")
    if cf[0] < alpha - 1e-12 or cf[1] > beta + 1e-12:
        raise ValueError(f"precondition violated: body curvature [{cf[0]:.6g}, {cf[1]:.6g}] "
                         f"not within [alpha, beta]")
    eta_p = select_eta(body, alpha, beta, eta, alpha_p, beta_p)
    kappa = eta_p / 12 if kappa is None else kappa
    if kappa > eta_p / 12 + 1e-15:
        raise ValueError("precondition violated: kappa <= eta'/12")
    fld = SmoothedField(body, kappa, quadrature=quadrature)
    notes = []

    level = 0.5 * eta_p
    for candidate in (level, level + eta_p / 12, level - eta_p / 12):
        pts = _level_points(fld, body, candidate, n_level)
        results = [level_set_curvature(fld, p) for p in pts]
        min_grad = min(g for _, g in results)
        if min_grad >= 0.5:
            level = candidate
            break
        notes.append(f"gradient probe failed at level {candidate:.6g}")
    else:
        level = candidate
    curv = np.array([c for c, _ in results])

    space = body.space
    rng = np.random.default_rng(seed)
    sample = boundary_sample(body, n_probe)
    nrm = np.array([body.normal_field(p) for p in sample.points])
    failures = {"C in N_3k": 0, "N_3k in sublevel": 0, "sublevel in N_eta'": 0}
    depth = rng.uniform(0.0, min(body.inradius, 1.0 / space.a), size=len(nrm))
    inside = space.exp(sample.points, depth[:, None] * nrm)
    failures["C in N_3k"] = int(np.sum(body.distance(inside) > 3 * kappa + probe_tol))
    shell = space.exp(sample.points, -(3 * kappa * rng.uniform(0.0, 1.0, len(nrm)))[:, None] * nrm)
    shell[: len(nrm) // 2] = space.exp(sample.points[: len(nrm) // 2],
                                        -3 * kappa * nrm[: len(nrm) // 2])
    failures["N_3k in sublevel"] = int(sum(fld(p) > level + probe_tol for p in shell))
    far = space.exp(sample.points, -(rng.uniform(0.0, 1.5 * eta_p, len(nrm)))[:, None] * nrm)
    for p in far:
        if fld(p) <= level and float(body.distance(p)) > eta_p + probe_tol:
            failures["sublevel in N_eta'"] += 1
    n_probes = 3 * len(nrm)

    curvature_ok = bool(curv.min() >= alpha_p - band_tol and curv.max() <= beta_p + band_tol)
    passed = curvature_ok and not any(failures.values()) and min_grad >= 0.5
    notes.append("curvature bounds are verified on sampled level-set points only")
    return SmoothingReport(alpha=alpha, beta=beta, eta=eta, alpha_p=alpha_p, beta_p=beta_p,
                           eta_p=float(eta_p), kappa=float(kappa), level=float(level),
                           min_gradient=float(min_grad), curvature_low=float(curv.min()),
                           curvature_high=float(curv.max()), curvature_ok=curvature_ok,
                           inclusion_probes=n_probes, inclusion_failures=failures,
                           passed=bool(passed), notes=notes)


__all__ = [
    "BumpKernel", "SmoothedField", "SmoothingReport", "kernel_eval", "level_set_curvature",
    "numeric_gradient", "numeric_hessian", "select_eta", "smoothed_levelset_check",
    "smoothed_value",
]
