"""Closed convex bodies in the hyperboloid model, described by exact oracles.

Every body exposes its signed distance ``sd`` (distance to the body outside,
minus the distance to the boundary inside).  For the primitive shapes it is
closed-form and vectorized over leading axes; erosion and dilation are then
level shifts of ``sd`` and stay closed-form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .geometry import SpaceParams, mink_inner


class EmptyBodyError(ValueError):
    """Raised when an erosion leaves nothing behind."""


def _normalize(space, v):
    n = space.norm(v)
    return v / np.where(n > 0, n, 1.0)[..., None]


class ConvexBody:
    """Base class; subclasses implement ``signed_distance`` and friends."""

    space: SpaceParams
    strictly_convex = True
    shape = "body"

    def signed_distance(self, x):
        raise NotImplementedError

    def level_function(self, x):
        """Cheap function with the same sign and zero set as ``signed_distance``."""
        return self.signed_distance(x)

    def distance(self, x):
        return np.maximum(self.signed_distance(x), 0.0)

    def inner_distance(self, x, tol=1e-9):
        sd = np.asarray(self.signed_distance(x))
        if np.any(sd > tol):
            raise ValueError("point is not in the body")
        return np.maximum(-sd, 0.0)

    def contains(self, x, tol=1e-9):
        return np.asarray(self.level_function(x)) <= tol

    def normal_field(self, x):
        """Unit vector field -grad(sd), pointing into the body across its boundary."""
        return numeric_normal(self, x)

    def nearest_point(self, x, iters=4):
        """Metric projection onto the body: follow -grad(sd) for length sd."""
        x = np.asarray(x, dtype=float)
        y = x
        for _ in range(iters):
            d = float(self.signed_distance(y))
            if d <= 1e-13:
                return y
            y = self.space.exp(y, d * self.normal_field(y))
        return y

    def erode(self, s):
        raise NotImplementedError

    def dilate(self, s):
        if s < 0:
            raise ValueError("dilation radius must be nonnegative")
        return Dilated(self, s) if s > 0 else self

    def closed_form_ii(self):
        return None

    def anchor(self):
        """A point of the body, as deep as cheaply available."""
        raise NotImplementedError

    @property
    def inradius(self):
        return float(self.inner_distance(self.anchor()))


def numeric_normal(body, x, h=1e-6):
    """-grad(sd) by central differences in an orthonormal tangent frame, normalized."""
    space = body.space
    x = np.asarray(x, dtype=float)
    frame = space.tangent_frame(x)
    g = np.zeros(space.dim)
    for e in frame:
        fp = float(body.signed_distance(space.exp(x, h * e)))
        fm = float(body.signed_distance(space.exp(x, -h * e)))
        g += (fp - fm) / (2 * h) * e
    n = space.norm(g)
    if n == 0:
        raise ArithmeticError("signed distance has vanishing gradient")
    return -g / n


# -- primitives ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    """Closed geodesic ball; radius 0 is the degenerate one-point body."""

    space: SpaceParams
    center: np.ndarray
    radius: float
    shape = "ball"

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("ball radius must be nonnegative")
        object.__setattr__(self, "center", self.space.project(self.center))

    def signed_distance(self, x):
        return self.space.dist(x, self.center) - self.radius

    def normal_field(self, x):
        return _normalize(self.space, self.space.log(x, self.center))

    def erode(self, s):
        if s > self.radius:
            raise EmptyBodyError(f"eroded to empty set (s={s} > radius={self.radius})")
        return Ball(self.space, self.center, self.radius - s)

    def dilate(self, s):
        if s < 0:
            raise ValueError("dilation radius must be nonnegative")
        return Ball(self.space, self.center, self.radius + s)

    def closed_form_ii(self):
        if self.radius == 0:
            return None
        k = self.space.a / np.tanh(self.space.a * self.radius)
        return (k, k)

    def anchor(self):
        return self.center

    @property
    def inradius(self):
        return self.radius


@dataclass(frozen=True, eq=False)
class Horoball(ConvexBody):
    """Sublevel set {beta_u <= level} of the Busemann function of a null vector u.

    beta_u(x) = (1/a) log(-a <x, u>_M); ``u`` is rescaled so that u_0 = 1.
    """

    space: SpaceParams
    ideal: np.ndarray
    level: float = 0.0
    shape = "horoball"

    def __post_init__(self):
        u = np.asarray(self.ideal, dtype=float)
        if u.shape != (self.space.dim,) or u[0] <= 0:
            raise ValueError("ideal direction must be a future-pointing null vector")
        u = u / u[0]
        if abs(mink_inner(u, u)) > 1e-9:
            raise ValueError("ideal direction must be a null vector")
        # re-normalize the spatial part so <u, u> = 0 exactly
        u[1:] /= np.linalg.norm(u[1:])
        object.__setattr__(self, "ideal", u)

    def busemann(self, x):
        # -<x, u> = x0 - <xs, u_s> = (1/a^2 + |xs_perp|^2) / (x0 + <xs, u_s>) on the sheet,
        # which avoids cancellation for points far out toward u
        x = np.asarray(x, dtype=float)
        a = self.space.a
        along = x[..., 1:] @ self.ideal[1:]
        perp2 = np.maximum(np.sum(x[..., 1:] ** 2, axis=-1) - along**2, 0.0)
        return np.log(a * (1.0 / a**2 + perp2) / (x[..., 0] + along)) / a

    def signed_distance(self, x):
        return self.busemann(x) - self.level

    def normal_field(self, x):
        x = np.asarray(x, dtype=float)
        a = self.space.a
        c = mink_inner(x, self.ideal)
        grad = (self.ideal / c[..., None] + a**2 * x) / a
        return -self.space.proj_tangent(x, grad)

    def erode(self, s):
        return Horoball(self.space, self.ideal, self.level - s)

    def dilate(self, s):
        if s < 0:
            raise ValueError("dilation radius must be nonnegative")
        return Horoball(self.space, self.ideal, self.level + s)

    def closed_form_ii(self):
        return (self.space.a, self.space.a)

    def point_at_depth(self, depth):
        """Point on the geodesic from the origin toward u with beta = level - depth."""
        t = depth - self.level
        v = np.concatenate([[0.0], self.ideal[1:]])
        return self.space.exp(self.space.origin(), t * v)

    def anchor(self):
        return self.point_at_depth(1.0)

    @property
    def inradius(self):
        return np.inf


def _check_frame(space, p, w, what):
    p = space.project(p)
    w = np.asarray(w, dtype=float)
    if abs(mink_inner(p, w)) > 1e-9 or abs(space.norm(w) - 1) > 1e-9:
        raise ValueError(f"{what} must be a unit tangent vector at the base point")
    return p, space.proj_tangent(p, w)


@dataclass(frozen=True, eq=False)
class GeodesicTube(ConvexBody):
    """Points within ``radius`` of the geodesic through ``point`` with unit ``direction``."""

    space: SpaceParams
    point: np.ndarray
    direction: np.ndarray
    radius: float
    shape = "geodesic_tube"

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("tube radius must be nonnegative")
        p, w = _check_frame(self.space, self.point, self.direction, "direction")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "direction", w)

    def _perp(self, x):
        x = np.asarray(x, dtype=float)
        a2 = self.space.a**2
        p, w = self.point, self.direction
        return x + (a2 * mink_inner(x, p))[..., None] * p - mink_inner(x, w)[..., None] * w

    def axis_distance(self, x):
        q = np.maximum(mink_inner(self._perp(x), self._perp(x)), 0.0)
        return np.arcsinh(self.space.a * np.sqrt(q)) / self.space.a

    def signed_distance(self, x):
        return self.axis_distance(x) - self.radius

    def normal_field(self, x):
        x = np.asarray(x, dtype=float)
        return -_normalize(self.space, self.space.proj_tangent(x, self._perp(x)))

    def erode(self, s):
        if s > self.radius:
            raise EmptyBodyError(f"eroded to empty set (s={s} > radius={self.radius})")
        return GeodesicTube(self.space, self.point, self.direction, self.radius - s)

    def dilate(self, s):
        if s < 0:
            raise ValueError("dilation radius must be nonnegative")
        return GeodesicTube(self.space, self.point, self.direction, self.radius + s)

    def closed_form_ii(self):
        if self.radius == 0:
            return None
        a, r = self.space.a, self.radius
        lo = a * np.tanh(a * r)
        # m >= 3: the meridian directions bend like a sphere of radius r
        return (lo, lo) if self.space.m == 2 else (lo, a / np.tanh(a * r))

    def anchor(self):
        return self.point

    @property
    def inradius(self):
        return self.radius


@dataclass(frozen=True, eq=False)
class HyperplaneTube(ConvexBody):
    """Points within ``radius`` of the totally geodesic hyperplane through ``point`` normal to ``normal``."""

    space: SpaceParams
    point: np.ndarray
    normal: np.ndarray
    radius: float
    shape = "hyperplane_tube"

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("tube radius must be nonnegative")
        p, n = _check_frame(self.space, self.point, self.normal, "normal")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "normal", n)

    def plane_signed_distance(self, x):
        a = self.space.a
        return np.arcsinh(a * mink_inner(x, self.normal)) / a

    def signed_distance(self, x):
        return np.abs(self.plane_signed_distance(x)) - self.radius

    def normal_field(self, x):
        x = np.asarray(x, dtype=float)
        side = np.sign(mink_inner(x, self.normal))
        n = _normalize(self.space, self.space.proj_tangent(x, self.normal))
        return -side[..., None] * n

    def erode(self, s):
        if s > self.radius:
            raise EmptyBodyError(f"eroded to empty set (s={s} > radius={self.radius})")
        return HyperplaneTube(self.space, self.point, self.normal, self.radius - s)

    def dilate(self, s):
        if s < 0:
            raise ValueError("dilation radius must be nonnegative")
        return HyperplaneTube(self.space, self.point, self.normal, self.radius + s)

    def closed_form_ii(self):
        if self.radius == 0:
            return None
        k = self.space.a * np.tanh(self.space.a * self.radius)
        return (k, k)

    def anchor(self):
        return self.point

    @property
    def inradius(self):
        return self.radius


@dataclass(frozen=True, eq=False)
class HalfSpace(ConvexBody):
    """{x : signed distance to the hyperplane (positive along ``normal``) >= offset}.

    offset = 0 is the genuine half-space.  Eroding by s gives offset = s,
    a region bounded by an equidistant hypersurface which is *not* convex;
    dilating gives offset = -s, a convex one-sided tube.
    """

    space: SpaceParams
    point: np.ndarray
    normal: np.ndarray
    offset: float = 0.0
    shape = "half_space"
    strictly_convex = False

    def __post_init__(self):
        p, n = _check_frame(self.space, self.point, self.normal, "normal")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "normal", n)

    @property
    def convex(self):
        return self.offset <= 0

    def signed_distance(self, x):
        a = self.space.a
        return self.offset - np.arcsinh(a * mink_inner(x, self.normal)) / a

    def normal_field(self, x):
        x = np.asarray(x, dtype=float)
        return _normalize(self.space, self.space.proj_tangent(x, self.normal))

    def erode(self, s):
        return HalfSpace(self.space, self.point, self.normal, self.offset + s)

    def dilate(self, s):
        if s < 0:
            raise ValueError("dilation radius must be nonnegative")
        return HalfSpace(self.space, self.point, self.normal, self.offset - s)

    def closed_form_ii(self):
        k = -self.space.a * np.tanh(self.space.a * self.offset) + 0.0
        return (k, k)

    def anchor(self):
        return self.space.exp(self.point, (self.offset + 1.0) * self.normal)

    @property
    def inradius(self):
        return np.inf


# -- composite bodies -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Dilated(ConvexBody):
    """Closed s-neighbourhood of a body, kept implicit: sd = sd_base - s."""

    base: ConvexBody
    radius: float
    shape = "dilated"

    @property
    def space(self):
        return self.base.space

    def signed_distance(self, x):
        return self.base.signed_distance(x) - self.radius

    def level_function(self, x):
        return self.signed_distance(x)

    def normal_field(self, x):
        return self.base.normal_field(x)

    def erode(self, s):
        if s <= self.radius:
            return self.base.dilate(self.radius - s)
        return self.base.erode(s - self.radius)

    def dilate(self, s):
        if s < 0:
            raise ValueError("dilation radius must be nonnegative")
        return Dilated(self.base, self.radius + s)

    def anchor(self):
        return self.base.anchor()

    @property
    def inradius(self):
        return self.base.inradius + self.radius


@dataclass(frozen=True, eq=False)
class Intersection(ConvexBody):
    """Finite intersection of bodies sharing one space.

    Inside, sd is the max of the parts' signed distances.  Outside, the
    distance is the value of min |v| subject to exp_x(v) lying in every part,
    solved by SLSQP in tangent coordinates at x.
    """

    parts: tuple
    shape = "intersection"
    _anchor: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("intersection needs at least one part")
        if any(p.space != parts[0].space for p in parts):
            raise ValueError("all parts must share the same space")
        object.__setattr__(self, "parts", parts)
        anchor, depth = _deepest_point(parts)
        if depth > 1e-12:
            raise EmptyBodyError("intersection is empty")
        object.__setattr__(self, "_anchor", anchor)

    @property
    def space(self):
        return self.parts[0].space

    @property
    def strictly_convex(self):
        return all(p.strictly_convex for p in self.parts)

    def level_function(self, x):
        return np.max([p.signed_distance(x) for p in self.parts], axis=0)

    def active_parts(self, x, tol=1e-7):
        return [i for i, p in enumerate(self.parts) if abs(float(p.signed_distance(x))) <= tol]

    def signed_distance(self, x):
        x = np.asarray(x, dtype=float)
        inner = self.level_function(x)
        out = np.array(inner, dtype=float)
        flat_x = x.reshape(-1, self.space.dim)
        flat = out.reshape(-1)
        for i in np.flatnonzero(flat > 0):
            flat[i] = self._outside_nearest(flat_x[i])[0]
        return out if out.ndim else float(out)

    def _outside_nearest(self, x):
        """(distance, nearest point) for x outside the intersection."""
        space = self.space
        frame = space.tangent_frame(x)

        def point(c):
            return space.exp(x, c @ frame)

        cons = [{"type": "ineq", "fun": (lambda c, p=p: -float(p.signed_distance(point(c))))}
                for p in self.parts]
        best, best_y = None, None
        # start from the best single-part projection that is feasible, else the anchor
        starts = [p.nearest_point(x) for p in self.parts] + [self._anchor]
        for y in starts:
            c0 = frame @ (space.log(x, y) * np.r_[-1.0, np.ones(space.m)])
            # trial steps far from x may overflow cosh; such starts just fail
            with np.errstate(over="ignore", invalid="ignore"):
                res = minimize(lambda c: 0.5 * c @ c, c0, jac=lambda c: c, constraints=cons,
                               method="SLSQP", options={"ftol": 1e-16, "maxiter": 200})
                c = res.x
                feasible = float(self.level_function(point(c))) <= 1e-9
            if feasible:
                d = float(np.linalg.norm(c))
                if best is None or d < best:
                    best, best_y = d, point(c)
        if best is None:
            raise ArithmeticError("intersection distance solver did not converge")
        return best, best_y

    def normal_field(self, x):
        x = np.asarray(x, dtype=float)
        if float(self.level_function(x)) > 1e-7:
            _, y = self._outside_nearest(x)
            return _normalize(self.space, self.space.log(x, y))
        act = self.active_parts(x)
        if len(act) == 1:
            return self.parts[act[0]].normal_field(x)
        return numeric_normal(self, x)

    def erode(self, s):
        return Intersection(tuple(p.erode(s) for p in self.parts))

    def anchor(self):
        return self._anchor

    @property
    def inradius(self):
        return float(-self.level_function(self._anchor))


def _deepest_point(parts, depth_cap=1.0):
    """Interior point of an intersection, or evidence that it is empty.

    Minimizes max(max_i sd_i, -depth_cap/a) plus a weak pull toward the origin
    (Nelder-Mead in tangent coordinates there); the cap keeps unbounded
    intersections from sending the search to infinity.  Returns the point and
    max_i sd_i at it.
    """
    space = parts[0].space
    o = space.origin()
    frame = space.tangent_frame(o)
    floor = -depth_cap / space.a

    def depth(c):
        x = space.exp(o, c @ frame)
        return max(float(p.signed_distance(x)) for p in parts)

    def g(c):
        return max(depth(c), floor) + 1e-3 * np.linalg.norm(c)

    best_c, best = None, np.inf
    for p in parts:
        c0 = frame @ (space.log(o, p.anchor()) * np.r_[-1.0, np.ones(space.m)])
        res = minimize(g, c0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        if res.fun < best:
            best_c, best = res.x, res.fun
    return space.exp(o, best_c @ frame), depth(best_c)


# -- module-level operations ------------------------------------------------------

def distance_to_body(body: ConvexBody, x):
    return body.distance(x)


def inner_distance(body: ConvexBody, x):
    return body.inner_distance(x)


def erode(body: ConvexBody, s):
    if s < 0:
        raise ValueError("erosion depth must be nonnegative")
    return body.erode(s) if s > 0 else body


def dilate(body: ConvexBody, s):
    return body.dilate(s)


def closed_form_ii(body: ConvexBody):
    return body.closed_form_ii()


@dataclass
class BoundarySample:
    points: np.ndarray
    spacing: float
    angles: np.ndarray
    anchor: np.ndarray
    complete: bool


def ray_exits(body, anchor, directions, t_max=None):
    """Boundary points hit by geodesic rays from an interior anchor.

    Returns (mask of rays that exit, exit points).  Uses bracketing by
    doubling then Brent's method on the body's level function.
    """
    space = body.space
    t_max = 20.0 / space.a if t_max is None else t_max
    directions = np.asarray(directions, dtype=float)
    if float(body.level_function(anchor)) >= 0:
        raise ValueError("anchor must be an interior point")
    hits = np.zeros(len(directions), dtype=bool)
    pts = np.zeros((len(directions), space.dim))
    for k, u in enumerate(directions):
        def g(t, u=u):
            return float(body.level_function(space.exp(anchor, t * u)))

        hi = 0.5 / space.a
        while g(hi) <= 0 and hi < t_max:
            hi *= 2.0
        if g(hi) <= 0:
            continue
        t = brentq(g, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        hits[k] = True
        pts[k] = space.exp(anchor, t * u)
    return hits, pts


def boundary_sample(body: ConvexBody, n: int) -> BoundarySample:
    """n rays at equal angles around an interior anchor (m = 2 only)."""
    space = body.space
    if space.m != 2:
        raise ValueError("boundary sampling is implemented for m = 2 only")
    if n < 4:
        raise ValueError("need at least 4 samples")
    anchor = body.anchor()
    e1, e2 = space.tangent_frame(anchor)
    angles = 2 * np.pi * np.arange(n) / n
    dirs = np.cos(angles)[:, None] * e1 + np.sin(angles)[:, None] * e2
    hits, pts = ray_exits(body, anchor, dirs)
    if not hits.any():
        raise ValueError("no ray from the anchor leaves the body")
    pts = pts[hits]
    complete = bool(hits.all())
    if len(pts) > 1:
        nxt = np.roll(pts, -1, axis=0) if complete else pts[1:]
        cur = pts if complete else pts[:-1]
        spacing = float(np.max(space.dist(cur, nxt)))
    else:
        spacing = 0.0
    return BoundarySample(points=pts, spacing=spacing, angles=angles[hits],
                          anchor=anchor, complete=complete)


def sphere_directions(space, anchor, n):
    """n roughly uniform unit tangent directions at anchor (Fibonacci lattice for m = 3)."""
    frame = space.tangent_frame(anchor)
    if space.m == 2:
        ang = 2 * np.pi * np.arange(n) / n
        return np.cos(ang)[:, None] * frame[0] + np.sin(ang)[:, None] * frame[1]
    if space.m == 3:
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        phi = np.pi * (1 + 5**0.5) * i
        r = np.sqrt(1 - z**2)
        c = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
        return c @ frame
    rng = np.random.default_rng(0)
    c = rng.normal(size=(n, space.m))
    return (c / np.linalg.norm(c, axis=1, keepdims=True)) @ frame
