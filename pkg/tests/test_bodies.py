import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from epsconvex.bodies import (Ball, Dilated, EmptyBodyError, GeodesicTube, HalfSpace, Horoball,
                              HyperplaneTube, Intersection, boundary_sample, dilate,
                              distance_to_body, erode, inner_distance, numeric_normal, ray_exits,
                              sphere_directions)
from epsconvex.geometry import SpaceParams, mink_inner
from conftest import random_point


def line_distance(sp, x, p, w):
    """Distance from x to the geodesic through p with direction w, by 1-d minimization."""
    res = minimize_scalar(lambda s: sp.dist(x, sp.exp(p, s * w)), bracket=(-1, 1), tol=1e-12)
    return res.fun


def make_bodies(sp):
    o = sp.origin()
    e1, e2 = sp.basis(1), sp.basis(2)
    return {
        "ball": Ball(sp, sp.exp(o, 0.3 * e2), 0.8),
        "horoball": Horoball(sp, np.r_[1.0, 1.0, 0.0], 0.4),
        "geodesic_tube": GeodesicTube(sp, o, e1, 0.6),
        "hyperplane_tube": HyperplaneTube(sp, o, e2, 0.5),
        "half_space": HalfSpace(sp, o, e1),
    }


def test_ball_distance_is_distance_to_center(plane, rng):
    b = Ball(plane, plane.origin(), 0.7)
    for _ in range(20):
        x = random_point(plane, rng)
        assert b.signed_distance(x) == pytest.approx(plane.dist(x, plane.origin()) - 0.7, abs=1e-12)
    assert distance_to_body(b, plane.origin()) == 0.0
    assert inner_distance(b, plane.origin()) == pytest.approx(0.7)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_tube_distance_against_minimization(rng, a):
    sp = SpaceParams(2, a)
    t = GeodesicTube(sp, sp.origin(), sp.basis(1), 0.4 / a)
    for _ in range(10):
        x = random_point(sp, rng, scale=1.0)
        d = line_distance(sp, x, t.point, t.direction)
        assert t.axis_distance(x) == pytest.approx(d, abs=1e-7)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_hyperplane_distance_against_minimization(rng, a):
    # in m = 2 the hyperplane is the geodesic through p orthogonal to the normal
    sp = SpaceParams(2, a)
    h = HyperplaneTube(sp, sp.origin(), sp.basis(2), 0.3)
    for _ in range(10):
        x = random_point(sp, rng, scale=1.0)
        d = line_distance(sp, x, sp.origin(), sp.basis(1))
        assert abs(h.plane_signed_distance(x)) == pytest.approx(d, abs=1e-7)


def test_horoball_busemann_is_a_limit_of_distances(plane, rng):
    h = Horoball(plane, np.r_[1.0, 0.0, 1.0])
    x, y = random_point(plane, rng), random_point(plane, rng)
    # far enough for the limit, near enough for double precision
    far = plane.exp(plane.origin(), 12.0 * plane.basis(2))
    diff = plane.dist(x, far) - plane.dist(y, far)
    assert h.busemann(x) - h.busemann(y) == pytest.approx(diff, abs=1e-8)


def test_horoball_rejects_non_null_direction(plane):
    with pytest.raises(ValueError):
        Horoball(plane, np.r_[1.0, 0.5, 0.0])


def test_normals_agree_with_numeric_gradient(plane, rng):
    for name, body in make_bodies(plane).items():
        for _ in range(5):
            x = random_point(plane, rng, scale=0.8)
            if abs(body.signed_distance(x)) < 1e-3:
                continue
            assert body.normal_field(x) == pytest.approx(numeric_normal(body, x), abs=1e-6), name


@pytest.mark.parametrize("name", ["ball", "horoball", "geodesic_tube", "hyperplane_tube"])
def test_erode_then_dilate_keeps_the_level_set(plane, rng, name):
    body = make_bodies(plane)[name]
    back = dilate(erode(body, 0.2), 0.2)
    for _ in range(10):
        x = random_point(plane, rng)
        assert back.signed_distance(x) == pytest.approx(body.signed_distance(x), abs=1e-12)


def test_erosion_past_the_inradius_is_empty(plane):
    with pytest.raises(EmptyBodyError):
        erode(Ball(plane, plane.origin(), 0.5), 0.6)
    with pytest.raises(EmptyBodyError):
        erode(GeodesicTube(plane, plane.origin(), plane.basis(1), 0.5), 0.6)


def test_half_space_erosion_is_not_convex(plane):
    hs = HalfSpace(plane, plane.origin(), plane.basis(1))
    assert hs.convex and not hs.erode(0.3).convex and hs.dilate(0.3).convex
    k = hs.erode(0.3).closed_form_ii()[0]
    assert k == pytest.approx(-np.tanh(0.3))
    assert hs.closed_form_ii() == (0.0, 0.0)


def test_dilated_wrapper(plane):
    b = Dilated(Intersection((HalfSpace(plane, plane.origin(), plane.basis(1)),
                              HalfSpace(plane, plane.origin(), plane.basis(2)))), 0.5)
    x = plane.exp(plane.origin(), -2.0 * plane.basis(1) + 0.5 * plane.basis(2))
    assert b.signed_distance(x) == pytest.approx(b.base.signed_distance(x) - 0.5)
    assert b.inradius == pytest.approx(b.base.inradius + 0.5)


def test_intersection_of_a_wedge(plane):
    o = plane.origin()
    wedge = Intersection((HalfSpace(plane, o, plane.basis(1)), HalfSpace(plane, o, plane.basis(2))))
    assert not wedge.strictly_convex
    x = plane.exp(o, -0.5 * plane.basis(1) + 0.3 * plane.basis(2))
    expected = np.arcsinh(abs(mink_inner(x, plane.basis(1))))
    assert wedge.signed_distance(x) == pytest.approx(expected, abs=1e-7)
    corner_side = plane.exp(o, -0.5 * plane.basis(1) - 0.5 * plane.basis(2))
    assert wedge.signed_distance(corner_side) == pytest.approx(plane.dist(corner_side, o), abs=1e-6)
    inside = plane.exp(o, 0.4 * plane.basis(1) + 0.9 * plane.basis(2))
    assert wedge.signed_distance(inside) == pytest.approx(
        max(p.signed_distance(inside) for p in wedge.parts), abs=1e-14)


def test_empty_intersection_is_detected(plane):
    o = plane.origin()
    far = plane.exp(o, 3.0 * plane.basis(1))
    with pytest.raises(EmptyBodyError):
        Intersection((Ball(plane, o, 1.0), Ball(plane, far, 1.0)))


def test_intersection_of_balls_outside_distance(plane):
    o = plane.origin()
    c = plane.exp(o, 1.0 * plane.basis(1))
    lens = Intersection((Ball(plane, o, 1.0), Ball(plane, c, 1.0)))
    # along the perpendicular bisector the nearest point is the lens tip
    mid = plane.exp(o, 0.5 * plane.basis(1))
    v = plane.transport(o, mid, plane.basis(2))
    x = plane.exp(mid, 2.0 * v)
    tips = [plane.exp(mid, s * v) for s in np.linspace(0.5, 1.5, 20001)]
    tip = min(tips, key=lambda p: abs(max(b.signed_distance(p) for b in lens.parts)))
    assert lens.signed_distance(x) == pytest.approx(plane.dist(x, tip), abs=1e-4)


def test_boundary_sample_on_a_ball(plane):
    b = Ball(plane, plane.origin(), 1.0)
    s = boundary_sample(b, 64)
    assert s.complete and len(s.points) == 64
    assert np.abs(b.signed_distance(s.points)).max() < 1e-12
    assert s.spacing == pytest.approx(2 * np.arcsinh(np.sinh(1.0) * np.sin(np.pi / 64)), rel=1e-9)
    with pytest.raises(ValueError):
        boundary_sample(b, 3)
    with pytest.raises(ValueError):
        boundary_sample(Ball(SpaceParams(3, 1.0), SpaceParams(3, 1.0).origin(), 1.0), 16)


def test_sphere_rays_in_three_dimensions():
    sp = SpaceParams(3, 1.0)
    b = Ball(sp, sp.origin(), 0.9)
    dirs = sphere_directions(sp, sp.origin(), 40)
    hits, pts = ray_exits(b, sp.origin(), dirs)
    assert hits.all()
    assert np.abs(b.signed_distance(pts)).max() < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["ball", "horoball", "geodesic_tube",
                                                    "hyperplane_tube", "half_space"]))
def test_signed_distance_is_one_lipschitz(seed, name):
    sp = SpaceParams(2, 1.0)
    rng = np.random.default_rng(seed)
    body = make_bodies(sp)[name]
    x, y = random_point(sp, rng), random_point(sp, rng)
    assert abs(body.signed_distance(x) - body.signed_distance(y)) <= sp.dist(x, y) + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_body_distance_is_one_lipschitz_for_intersections(seed):
    sp = SpaceParams(2, 1.0)
    rng = np.random.default_rng(seed)
    o = sp.origin()
    body = Intersection((Ball(sp, o, 1.0), HalfSpace(sp, o, sp.basis(1))))
    x, y = random_point(sp, rng), random_point(sp, rng)
    assert abs(body.distance(x) - body.distance(y)) <= sp.dist(x, y) + 1e-7
