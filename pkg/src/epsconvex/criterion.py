"""Second fundamental forms of body boundaries and the eps-strict convexity tests.

Curvature is measured numerically from the bodies' normal fields: the normal
is differentiated along a curve traced on the boundary, with the two normals
brought back to the base point by parallel transport.  Closed-form values of
the primitive shapes are only used where a function says so explicitly
(``ii_bounds``); everything else measures.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .bodies import (BoundarySample, ConvexBody, EmptyBodyError, Intersection,
                     boundary_sample, dilate, erode, ray_exits, sphere_directions)
from .geometry import mink_inner
from .integrate import dopri_step, integrate
from .linalg import eigen_extremes, jacobi_eigvalsh
from .riccati import PinchBounds, constant_R, integrate_riccati

DEFAULT_TAU = 1e-4
BOUNDARY_TOL = 1e-9
CORNER_CURVATURE = 1e3


class BoundaryTraceError(ArithmeticError):
    """The boundary curve through a point could not be followed."""


def default_step(space):
    return 1e-4 * max(1.0, 1.0 / space.a)


def _on_boundary(body, x, tol=BOUNDARY_TOL):
    x = np.asarray(x, dtype=float)
    sd = float(body.signed_distance(x))
    if abs(sd) > tol:
        raise ValueError(f"point is not on the boundary (signed distance {sd:.3g})")
    return x


def inward_normal(body: ConvexBody, x):
    """Unit normal at a boundary point, pointing into the body."""
    x = _on_boundary(body, x)
    return body.normal_field(x)


def _snap_to_boundary(body, z, iters=8):
    y = z
    for _ in range(iters):
        d = float(body.signed_distance(y))
        if abs(d) < 1e-14:
            return y
        y = body.space.exp(y, d * body.normal_field(y))
    if abs(float(body.signed_distance(y))) > 1e-11:
        raise BoundaryTraceError("boundary curve left the resolvable region")
    return y


def _normal_derivative(body, x, v, h):
    """Central difference of the transported normal along the boundary curve through x."""
    space = body.space
    out = []
    for s in (h, -h):
        y = _snap_to_boundary(body, space.exp(x, s * v))
        out.append(space.transport(y, x, body.normal_field(y)))
    return (out[0] - out[1]) / (2.0 * h)


def covariant_normal_derivative(body, x, v, h=None, richardson=True):
    """nabla_v n at a boundary point, Richardson-extrapolated from steps h and h/2."""
    h = default_step(body.space) if h is None else h
    d1 = _normal_derivative(body, x, v, h)
    if not richardson:
        return d1
    d2 = _normal_derivative(body, x, v, 0.5 * h)
    return (4.0 * d2 - d1) / 3.0


def second_fundamental_form(body: ConvexBody, x, v, h=None, richardson=True):
    """II(v, v) = -<nabla_v n, v> for a unit vector v tangent to the boundary at x."""
    x = _on_boundary(body, x)
    space = body.space
    v = np.asarray(v, dtype=float)
    n = body.normal_field(x)
    # Minkowski products of far-out points carry rounding of order x0^2
    tol = 1e-9 * max(1.0, (space.a * x[0]) ** 2)
    if abs(space.norm(v) - 1.0) > tol:
        raise ValueError("direction must be a unit vector")
    if abs(mink_inner(v, n)) > tol:
        raise ValueError("direction must be tangent to the boundary")
    v = space.proj_tangent(x, v)
    return float(-mink_inner(covariant_normal_derivative(body, x, v, h, richardson), v))


def shape_operator(body: ConvexBody, x, h=None):
    """(frame, A) with A_ij = -<nabla_{e_i} n, e_j> in an orthonormal frame of T_x S."""
    x = _on_boundary(body, x)
    n = body.normal_field(x)
    frame = body.space.tangent_frame(x, normal=n)
    D = np.array([covariant_normal_derivative(body, x, e, h) for e in frame])
    A = -np.array([[mink_inner(D[i], e) for e in frame] for i in range(len(frame))])
    return frame, 0.5 * (A + A.T)


# -- bounds and verdicts -----------------------------------------------------------

@dataclass
class IIEstimate:
    point: np.ndarray
    lower: float
    upper: float
    step: float


@dataclass
class IIBounds:
    lower: float
    upper: float
    source: str
    estimates: list = field(default_factory=list, repr=False)
    corners: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.lower, self.upper))


def ii_estimate(body, x, h=None, directions=None):
    """Extreme II values at one boundary point.

    With ``directions=None`` these are the extreme eigenvalues of the measured
    shape operator; otherwise the extremes over that many sampled unit
    tangent directions.
    """
    h = default_step(body.space) if h is None else h
    if directions is None:
        _, A = shape_operator(body, x, h)
        lo, hi = eigen_extremes(A)
        return IIEstimate(point=np.asarray(x), lower=float(lo), upper=float(hi), step=h)
    x = _on_boundary(body, x)
    n = body.normal_field(x)
    frame = body.space.tangent_frame(x, normal=n)
    k = len(frame)
    if k == 1:
        vals = [second_fundamental_form(body, x, frame[0], h)]
    else:
        dirs = sphere_directions_flat(k, directions)
        vals = [second_fundamental_form(body, x, c @ frame, h) for c in dirs]
    return IIEstimate(point=x, lower=min(vals), upper=max(vals), step=h)


def sphere_directions_flat(k, n):
    rng = np.random.default_rng(12345)
    c = rng.normal(size=(n, k))
    return c / np.linalg.norm(c, axis=1, keepdims=True)


def _is_corner(body, x, h):
    if isinstance(body, Intersection) and len(body.active_parts(x, tol=4 * h)) > 1:
        return True
    return False


def ii_bounds(body: ConvexBody, sample: BoundarySample | None = None,
              directions_per_point=None, h=None, n_sample=512):
    """(inf lower, sup upper) of II over the boundary.

    Closed-form values are used whenever the body has them.  Otherwise the
    boundary sample (default: ``n_sample`` rays, m = 2) is measured point by
    point; corners, recognised by several active faces or by a normal jump
    that reads as curvature above ``CORNER_CURVATURE``, are excluded and
    listed separately.
    """
    cf = body.closed_form_ii()
    if cf is not None:
        return IIBounds(lower=float(cf[0]), upper=float(cf[1]), source="closed_form")
    if sample is None:
        sample = boundary_sample(body, n_sample)
    h = default_step(body.space) if h is None else h
    estimates, corners = [], []
    for i, x in enumerate(sample.points):
        if _is_corner(body, x, h):
            corners.append(i)
            continue
        try:
            est = ii_estimate(body, x, h, directions_per_point)
        except (BoundaryTraceError, ArithmeticError):
            corners.append(i)
            continue
        if max(abs(est.lower), abs(est.upper)) > CORNER_CURVATURE * max(1.0, body.space.a):
            corners.append(i)
            continue
        estimates.append(est)
    if not estimates:
        raise ValueError("no smooth boundary point in the sample")
    return IIBounds(lower=min(e.lower for e in estimates), upper=max(e.upper for e in estimates),
                    source="sampled", estimates=estimates, corners=corners)


@dataclass
class CriterionVerdict:
    kind: str
    eps: float
    passed: bool
    margin: float
    inconclusive: bool
    lower: float
    upper: float
    bound_low: float
    bound_high: float
    tolerance: float
    meaning: str
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


_MEANING = {
    ("necessary", True): "consistent with eps-strict convexity (not a certificate)",
    ("necessary", False): "certifies the body is NOT eps-strictly convex",
    ("sufficient", True): "certifies eps-strict convexity",
    ("sufficient", False): "no conclusion (sufficient condition not met)",
    ("iff_constant_curvature", True): "eps-strictly convex",
    ("iff_constant_curvature", False): "NOT eps-strictly convex",
}


def _verdict(kind, body, eps, bounds_ii, band, tol):
    lo, hi = float(band[0]), float(band[1])
    margin = min(bounds_ii.lower - lo, hi - bounds_ii.upper)
    passed = margin >= -tol
    notes = []
    if not body.strictly_convex:
        notes.append("body is not strictly convex; the criterion's hypotheses do not hold")
    if bounds_ii.corners:
        notes.append(f"{len(bounds_ii.corners)} corner sample(s) excluded; "
                     "the criterion does not cover bodies with corners")
    if bounds_ii.source == "sampled":
        notes.append("bounds measured on a boundary sample; a.e. statements are sample-based")
    if lo > hi:
        notes.append("the curvature band is empty for these parameters")
    return CriterionVerdict(kind=kind, eps=float(eps), passed=bool(passed), margin=float(margin),
                            inconclusive=bool(abs(margin) < tol), lower=float(bounds_ii.lower),
                            upper=float(bounds_ii.upper), bound_low=lo, bound_high=hi,
                            tolerance=float(tol), meaning=_MEANING[(kind, bool(passed))], notes=notes)


def check_necessary(body, eps, bounds: PinchBounds, tol=DEFAULT_TAU, ii=None):
    """a tanh(a eps) <= II <= b coth(b eps); failure rules out eps-strict convexity."""
    ii = ii_bounds(body) if ii is None else ii
    return _verdict("necessary", body, eps, ii, bounds.converse_band(eps), tol)


def check_sufficient(body, eps, bounds: PinchBounds, tol=DEFAULT_TAU, ii=None):
    """b tanh(b eps) <= II <= a coth(a eps); success certifies eps-strict convexity."""
    ii = ii_bounds(body) if ii is None else ii
    return _verdict("sufficient", body, eps, ii, bounds.forward_band(eps), tol)


def check_iff_constant_curvature(body, eps, a=None, tol=DEFAULT_TAU, ii=None):
    """The two-sided test a tanh(a eps) <= II <= a coth(a eps) in curvature -a^2."""
    if a is not None and not np.isclose(a, body.space.a, rtol=1e-12):
        raise ValueError(f"body lives in curvature -{body.space.a}^2, not -{a}^2")
    a = body.space.a
    ii = ii_bounds(body) if ii is None else ii
    band = (a * np.tanh(a * eps), a / np.tanh(a * eps))
    return _verdict("iff_constant_curvature", body, eps, ii, band, tol)


# -- normal flow ---------------------------------------------------------------------

def normal_flow(body: ConvexBody, x, t):
    """x_t = exp_x(t n(x)); negative t flows outward."""
    n = inward_normal(body, x)
    return body.space.exp(x, t * n)


@dataclass
class CurvatureProfile:
    times: np.ndarray
    lambda_minus: np.ndarray
    lambda_plus: np.ndarray
    focal_time: float | None = None

    def rows(self):
        return list(zip(self.times.tolist(), self.lambda_minus.tolist(), self.lambda_plus.tolist()))


def flow_curvature_profile(body: ConvexBody, x, eps, steps=64, h=None, tol=1e-12):
    """Extreme principal curvatures of the inward-flowed boundary at ``steps`` times in [0, eps).

    A(0) is the measured shape operator at x; it is evolved by A' = A^2 - a^2 Id.
    If A blows up before eps, the remaining times are dropped and the
    blow-up time is reported as ``focal_time``.
    """
    _, A0 = shape_operator(body, x, h)
    n = A0.shape[0]
    times = np.linspace(0.0, eps, steps, endpoint=False)
    traj = integrate_riccati(A0, constant_R(body.space.a**2, n), eps, tol=tol, t_eval=times)
    idx = [int(np.argmin(np.abs(traj.times - t))) for t in times]
    keep = [i for i, t in zip(idx, times) if abs(traj.times[i] - t) <= 1e-12 * max(1.0, t)]
    lam_m, lam_p = traj.extremes
    return CurvatureProfile(times=traj.times[keep], lambda_minus=lam_m[keep],
                            lambda_plus=lam_p[keep],
                            focal_time=traj.blow_up_time if traj.blow_up_detected else None)


@dataclass
class FocalReport:
    focal_time: float | None
    blow_up_time: float | None
    min_jacobi_norm: float | None
    riccati_last_step: float | None
    jacobi_steps: int


def _jacobi_system(n, c2):
    def rhs(t, y):
        J = y[: n * n].reshape(n, n)
        K = y[n * n:].reshape(n, n)
        return np.concatenate([K.ravel(), (c2 * J).ravel()])
    return rhs


def _signed_min(y, n):
    J = y[: n * n].reshape(n, n)
    return float(jacobi_eigvalsh(0.5 * (J + J.T))[0])


def focal_analysis(body: ConvexBody, x, t_max, steps=256, h=None, tol=1e-12):
    """Focal time from S-Jacobi fields, alongside the Riccati blow-up time.

    The frame J(t) of S-Jacobi fields obeys J' = -A J; with K = J' this is
    the linear system J' = K, K' = a^2 J, K(0) = -A(0), which stays regular
    through the focal time.  In constant curvature J(t) is a function of A(0)
    and hence symmetric, so its smallest eigenvalue is a signed indicator
    whose first zero is the focal time (refined by Brent's method on single
    Dormand-Prince steps).
    """
    _, A0 = shape_operator(body, x, h)
    n = A0.shape[0]
    c2 = body.space.a**2
    rhs = _jacobi_system(n, c2)
    y0 = np.concatenate([np.eye(n).ravel(), (-A0).ravel()])
    stops = np.linspace(0.0, t_max, steps + 1)[1:]

    def crossed(t, y):
        return _signed_min(y, n) <= 1e-8

    sol = integrate(rhs, y0, 0.0, t_max, tol=tol, stops=stops, stop_when=crossed,
                    h_max=t_max / steps)
    focal, min_norm = None, None
    if sol.stopped:
        t0, y_prev = sol.t[-2], sol.y[-2]
        span = sol.t[-1] - t0
        g = lambda s: _signed_min(dopri_step(rhs, t0, y_prev, s, t0, t0 + s)[0], n)
        s = brentq(g, 0.0, span, xtol=1e-15, rtol=4 * np.finfo(float).eps) if g(span) < 0 else span
        focal = t0 + s
        J = dopri_step(rhs, t0, y_prev, s, t0, t0 + s)[0][: n * n].reshape(n, n)
        min_norm = float(np.linalg.svd(J, compute_uv=False)[-1])
    traj = integrate_riccati(A0, constant_R(c2, n), t_max, tol=tol)
    return FocalReport(focal_time=focal,
                       blow_up_time=traj.blow_up_time if traj.blow_up_detected else None,
                       min_jacobi_norm=min_norm,
                       riccati_last_step=float(traj.steps[-1]) if len(traj.steps) else None,
                       jacobi_steps=len(sol.t) - 1)


def focal_time(body: ConvexBody, x, t_max, steps=256, h=None, tol=1e-12):
    """First time in [0, t_max] where a nonzero S-Jacobi field along the normal geodesic vanishes."""
    return focal_analysis(body, x, t_max, steps, h, tol).focal_time


# -- erosion / dilation round trip -------------------------------------------------

@dataclass
class RoundTripReport:
    eps: float
    core: str
    defect: float
    sampling_step: float
    n_probe: int
    convex_probe_passed: bool
    convex_probe_worst: float
    passed: bool
    iff_verdict: CriterionVerdict | None = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        return d


def boundary_probes(body, n_probe):
    if body.space.m == 2:
        s = boundary_sample(body, n_probe)
        return s.points, s.spacing
    anchor = body.anchor()
    hits, pts = ray_exits(body, anchor, sphere_directions(body.space, anchor, n_probe))
    pts = pts[hits]
    gaps = [np.min(np.delete(body.space.dist(pts, p), i)) for i, p in enumerate(pts)]
    return pts, float(np.max(gaps))


def convexity_probe(body, rng, n_points=48, n_pairs=400, radius=2.0, tol=1e-8):
    """Worst level-function value on geodesics between random points of the body."""
    space = body.space
    anchor = body.anchor()
    dirs = rng.normal(size=(n_points, space.m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = radius / space.a * rng.uniform(0, 1, size=n_points) ** (1 / space.m)
    frame = space.tangent_frame(anchor)
    raw = space.exp(anchor, (r[:, None] * dirs) @ frame)
    pts = np.array([anchor] + [body.nearest_point(p) for p in raw])
    i = rng.integers(0, len(pts), size=n_pairs)
    j = rng.integers(0, len(pts), size=n_pairs)
    t = rng.uniform(0, 1, size=n_pairs)
    mids = space.geodesic(pts[i], pts[j], t)
    worst = float(np.max(body.level_function(mids)))
    return worst <= tol, worst


def erode_dilate_check(body: ConvexBody, eps, n_probe=512, seed=0):
    """Erode by eps, dilate back, and compare with the original on boundary probes.

    The defect is the largest |signed distance| of the reconstructed body at
    the original's boundary points.  The core must also pass a convexity
    probe: a set equality alone does not make the body an eps-neighbourhood
    of a *convex* set.
    """
    core = erode(body, eps)
    rebuilt = dilate(core, eps)
    probes, step = boundary_probes(body, n_probe)
    defect = float(np.max(np.abs(rebuilt.signed_distance(probes))))
    ok_convex, worst = convexity_probe(core, np.random.default_rng(seed))
    notes = []
    try:
        iff = check_iff_constant_curvature(body, eps)
    except (ValueError, ArithmeticError) as exc:
        iff = None
        notes.append(f"iff verdict unavailable: {exc}")
    if not ok_convex:
        notes.append("the eroded core is not convex")
    return RoundTripReport(eps=float(eps), core=type(core).__name__, defect=defect,
                           sampling_step=float(step), n_probe=len(probes),
                           convex_probe_passed=bool(ok_convex), convex_probe_worst=worst,
                           passed=bool(defect <= 2 * step and ok_convex),
                           iff_verdict=iff, notes=notes)


__all__ = [
    "BoundaryTraceError", "CriterionVerdict", "CurvatureProfile", "EmptyBodyError",
    "FocalReport", "IIBounds", "IIEstimate", "RoundTripReport", "check_iff_constant_curvature",
    "check_necessary", "check_sufficient", "erode_dilate_check", "flow_curvature_profile",
    "focal_analysis", "focal_time", "inward_normal", "ii_bounds", "normal_flow",
    "second_fundamental_form", "shape_operator",
]
