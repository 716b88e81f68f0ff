"""Hyperboloid model of real hyperbolic m-space with curvature -a^2.

Points live on the upper sheet ``<x, x>_M = -1/a^2`` of Minkowski space
R^{1,m}; tangent vectors at ``x`` are the Minkowski-orthogonal complement of
``x``.  Every function accepts arrays with arbitrary leading batch axes; the
last axis always holds the m+1 Minkowski coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Below this geodesic length exp/log switch to series forms.
SMALL = 1e-8


def mink_inner(u, v):
    """Minkowski bilinear form ``-u0 v0 + sum_i ui vi`` along the last axis."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] != v.shape[-1]:
        raise ValueError(f"dimension mismatch: {u.shape[-1]} != {v.shape[-1]}")
    return np.sum(u[..., 1:] * v[..., 1:], axis=-1) - u[..., 0] * v[..., 0]


def _sinhc(z):
    # sinh(z)/z, stable at 0
    z = np.asarray(z, dtype=float)
    big = np.abs(z) > SMALL
    safe = np.where(big, z, 1.0)
    return np.where(big, np.sinh(safe) / safe, 1.0 + z**2 / 6.0)


@dataclass(frozen=True)
class SpaceParams:
    """Real hyperbolic space of dimension ``m`` and constant curvature -a^2."""

    m: int
    a: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.m}")
        if not self.a > 0:
            raise ValueError(f"curvature scale must be positive, got {self.a}")

    @property
    def dim(self):
        return self.m + 1

    # -- points and tangent vectors ---------------------------------------

    def origin(self):
        x = np.zeros(self.m + 1)
        x[0] = 1.0 / self.a
        return x

    def basis(self, i):
        """Unit tangent vector e_i (1 <= i <= m) at the origin."""
        v = np.zeros(self.m + 1)
        v[i] = 1.0
        return v

    def project(self, x):
        """Renormalize onto the upper sheet by recomputing the time coordinate."""
        x = np.array(x, dtype=float, copy=True)
        if x.shape[-1] != self.m + 1:
            raise ValueError(f"expected {self.m + 1} coordinates, got {x.shape[-1]}")
        x[..., 0] = np.sqrt(1.0 / self.a**2 + np.sum(x[..., 1:] ** 2, axis=-1))
        return x

    def proj_tangent(self, x, v):
        """Minkowski-orthogonal projection of ``v`` onto T_x."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        return v + (self.a**2 * mink_inner(x, v))[..., None] * x

    def norm(self, v):
        return np.sqrt(np.maximum(mink_inner(v, v), 0.0))

    def from_spatial(self, y):
        """Point whose spatial coordinates are ``y`` (length m)."""
        y = np.asarray(y, dtype=float)
        x = np.concatenate([np.zeros(y.shape[:-1] + (1,)), y], axis=-1)
        return self.project(x)

    def tangent_frame(self, x, normal=None):
        """Orthonormal basis of T_x (rows), or of the complement of ``normal`` in T_x.

        Gram-Schmidt on the projected ambient axes e_1..e_m, in that order, so
        the frame depends only on the inputs.
        """
        x = np.asarray(x, dtype=float)
        frame = [] if normal is None else [np.asarray(normal, dtype=float)]
        for i in range(1, self.m + 1):
            w = self.proj_tangent(x, self.basis(i))
            for f in frame:
                w = w - mink_inner(f, w) * f
            n = self.norm(w)
            if n > 1e-6:
                frame.append(w / n)
            if len(frame) == self.m:
                break
        if len(frame) < self.m:
            raise ArithmeticError("could not complete a tangent frame")
        frame = np.array(frame)
        return frame if normal is None else frame[1:]

    # -- Riemannian primitives --------------------------------------------

    def exp(self, x, v):
        """exp_x(v) = cosh(a|v|) x + sinh(a|v|)/(a|v|) v, renormalized."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        z = self.a * self.norm(v)
        y = np.cosh(z)[..., None] * x + _sinhc(z)[..., None] * v
        return self.project(y)

    def _chord2(self, x, y):
        # <x-y, x-y>_M = 4 sinh^2(a d / 2) / a^2 on the sheet; clamped at 0
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return np.maximum(mink_inner(d, d), 0.0)

    def dist(self, x, y):
        """(1/a) arccosh(-a^2 <x, y>_M), evaluated through the chord length.

        The chordal form 2/a asinh(a |x - y|_M / 2) is the same function but
        keeps full relative accuracy for nearby points, where the arccosh
        argument loses its digits to rounding.
        """
        q = self._chord2(x, y)
        return 2.0 * np.arcsinh(0.5 * self.a * np.sqrt(q)) / self.a

    def log(self, x, y):
        """Inverse of exp_x: the tangent vector at x pointing to y of length d(x, y)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        q = self._chord2(x, y)
        d = 2.0 * np.arcsinh(0.5 * self.a * np.sqrt(q)) / self.a
        # y + a^2 <x,y> x, rewritten without cancellation
        u = (y - x) - (0.5 * self.a**2 * q)[..., None] * x
        v = u / _sinhc(self.a * d)[..., None]
        return self.proj_tangent(x, v)

    def transport(self, x, y, v):
        """Parallel transport of v in T_x along the geodesic from x to y."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        v = np.asarray(v, dtype=float)
        a2 = self.a**2
        coef = a2 * mink_inner(y, v) / (1.0 - a2 * mink_inner(x, y))
        w = v + coef[..., None] * (x + y)
        return self.proj_tangent(y, w)

    def geodesic(self, x, y, t):
        """Point at fraction t in [0, 1] of the geodesic segment from x to y."""
        return self.exp(x, np.asarray(t, dtype=float)[..., None] * self.log(x, y))


# Module-level aliases matching the operation names used across the package.

def exp_map(space: SpaceParams, x, v):
    return space.exp(x, v)


def log_map(space: SpaceParams, x, y):
    return space.log(x, y)


def distance(space: SpaceParams, x, y):
    return space.dist(x, y)


def parallel_transport(space: SpaceParams, x, y, v):
    return space.transport(x, y, v)
