"""Acceptance suite: thirteen end-to-end criteria at their stated tolerances.

Run with ``pytest tests/test_acceptance.py -v`` (each test also prints a
PASS/FAIL line) or directly with ``python3 tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest
from scipy.integrate import dblquad

from epsconvex.bodies import Ball, GeodesicTube, HalfSpace, Horoball, HyperplaneTube, boundary_sample
from epsconvex.criterion import (check_iff_constant_curvature, check_necessary, erode_dilate_check,
                                 flow_curvature_profile, focal_analysis, inward_normal,
                                 normal_flow, second_fundamental_form)
from epsconvex.geometry import SpaceParams
from epsconvex.riccati import (PinchBounds, constant_R, converse_bounds_check,
                               forward_positivity_check, integrate_riccati, random_piecewise_R,
                               random_symmetric)
from epsconvex.smoothing import BumpKernel, SmoothedField, smoothed_levelset_check

SEED = 0


def coth(x):
    return 1.0 / np.tanh(x)


def measured_ii(body, x):
    v = body.space.tangent_frame(x, normal=inward_normal(body, x))[0]
    return second_fundamental_form(body, x, v)


def sample_pinching(rng):
    """(a, b, eps) with a nonempty forward band."""
    while True:
        a = rng.uniform(0.3, 2.0)
        b = a * rng.uniform(1.0, 1.6)
        eps = rng.uniform(0.1, 2.0)
        bounds = PinchBounds(a, b)
        lo, hi = bounds.forward_band(eps)
        if lo <= hi:
            return bounds, eps


# -- the criteria -------------------------------------------------------------------

def criterion_1():
    worst, slowest, blow = 0.0, 0.0, []
    for a, eps in ((1.0, 1.0), (2.0, 0.5), (0.5, 2.0)):
        start = time.perf_counter()
        ts = np.linspace(0.0, eps - 0.01, 101)
        traj = integrate_riccati(a * coth(a * eps) * np.eye(2), constant_R(a * a, 2), eps + 0.01,
                                 tol=1e-12, t_eval=ts)
        slowest = max(slowest, time.perf_counter() - start)
        exact = a * coth(a * (eps - ts))
        for t, e in zip(ts, exact):
            worst = max(worst, np.abs(traj.at(t) - e * np.eye(2)).max() / e)
        blow.append(traj.blow_up_detected and eps - 0.01 < traj.blow_up_time < eps + 0.01)
    ok = worst <= 1e-8 and all(blow) and slowest < 1.0
    return ok, f"max rel err {worst:.2e}, blow-up in window {all(blow)}, slowest {slowest:.2f}s"


def criterion_2(trials=1000):
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    worst = np.inf
    for k in range(trials):
        n = (2, 3, 6)[k % 3]
        bounds, eps = sample_pinching(rng)
        lo, hi = bounds.forward_band(eps)
        A0 = random_symmetric(rng, n, lo, hi)
        R = random_piecewise_R(rng, n, bounds, eps)
        rep = forward_positivity_check(A0, R, bounds, eps)
        worst = min(worst, rep.min_lambda_minus if not rep.blow_up_detected else -np.inf)
    elapsed = time.perf_counter() - start
    return worst >= -1e-9 and elapsed < 30.0, f"min lambda_- {worst:.3e} over {trials} trials, {elapsed:.1f}s"


def criterion_3(trials=1000):
    rng = np.random.default_rng(SEED + 1)
    kept, bad, worst = 0, 0, np.inf
    for k in range(trials):
        n = (2, 3, 6)[k % 3]
        bounds, eps = sample_pinching(rng)
        top = bounds.b * coth(bounds.b * eps)
        A0 = random_symmetric(rng, n, 0.0, 1.3 * top)
        R = random_piecewise_R(rng, n, bounds, eps)
        rep = converse_bounds_check(A0, R, bounds, eps)
        if not rep.hypothesis_met:
            continue
        kept += 1
        slack = min(rep.lambda_minus0 - (rep.bound_low - 1e-6), rep.bound_high + 1e-6 - rep.lambda_plus0)
        worst = min(worst, slack)
        bad += slack < 0
    return bad == 0 and kept > 0, f"{kept} trials met the hypothesis, {bad} violated (worst slack {worst:.2e})"


def criterion_4():
    worst = 0.0
    for a in (0.5, 1.0, 2.0):
        sp = SpaceParams(2, a)
        for r in (0.25, 1.0, 2.5):
            b = Ball(sp, sp.origin(), r)
            for x in boundary_sample(b, 8).points:
                worst = max(worst, abs(measured_ii(b, x) - a * coth(a * r)))
    return worst <= 1e-5, f"max |II - a coth(ar)| = {worst:.2e}"


def criterion_5():
    worst = 0.0
    for a in (0.5, 1.0, 2.0):
        sp = SpaceParams(2, a)
        for eps in (0.3, 1.0, 2.0):
            t = GeodesicTube(sp, sp.origin(), sp.basis(1), eps)
            pts = boundary_sample(t, 16).points
            for x in pts[pts[:, 0] * a < 50]:
                worst = max(worst, abs(measured_ii(t, x) - a * np.tanh(a * eps)))
    return worst <= 1e-5, f"max |II - a tanh(a eps)| = {worst:.2e}"


def criterion_6():
    worst_ii, worst_prof = 0.0, 0.0
    for a in (0.5, 1.0, 2.0):
        sp = SpaceParams(2, a)
        h = Horoball(sp, np.r_[1.0, 0.6, 0.8], 0.3)
        pts = boundary_sample(h, 16).points
        pts = pts[pts[:, 0] * a < 50]
        for x in pts:
            worst_ii = max(worst_ii, abs(measured_ii(h, x) - a))
        prof = flow_curvature_profile(h, pts[0], 2.0 / a, steps=32)
        worst_prof = max(worst_prof, np.abs(prof.lambda_minus - a).max(), np.abs(prof.lambda_plus - a).max())
    ok = worst_ii <= 1e-5 and worst_prof <= 1e-6
    return ok, f"max |II - a| = {worst_ii:.2e}, max profile deviation {worst_prof:.2e}"


def criterion_7():
    sp = SpaceParams(2, 1.0)
    agree, total = 0, 0
    for R in 0.2 * np.arange(1, 11):
        for eps in 0.2 * np.arange(10) + 0.1:
            assert abs(R - eps) >= 1e-3
            v = check_iff_constant_curvature(Ball(sp, sp.origin(), R), eps)
            agree += v.passed == (R >= eps)
            total += 1
    return agree == total, f"{agree}/{total} verdicts agree with R >= eps"


def criterion_8():
    sp = SpaceParams(2, 1.0)
    hs = HalfSpace(sp, sp.origin(), sp.basis(1))
    bounds = PinchBounds(1.0, 1.0)
    margins = [check_necessary(hs, eps, bounds) for eps in (0.1, 0.5, 1.0, 2.0)]
    ok = all(not v.passed and v.margin <= -np.tanh(0.1) + 1e-6 for v in margins)
    return ok, "margins " + ", ".join(f"{v.margin:.4f}" for v in margins)


def criterion_9():
    worst_r, worst_steps = 0.0, 0.0
    for a in (1.0, 2.0):
        sp = SpaceParams(2, a)
        for R in (0.5, 1.0, 2.0):
            b = Ball(sp, sp.origin(), R)
            rep = focal_analysis(b, boundary_sample(b, 8).points[1], 2 * R + 1)
            worst_r = max(worst_r, abs(rep.focal_time - R))
            worst_steps = max(worst_steps, abs(rep.focal_time - rep.blow_up_time) / rep.riccati_last_step)
    ok = worst_r <= 1e-4 and worst_steps <= 2.0
    return ok, f"max |focal - R| = {worst_r:.2e}, max gap to blow-up {worst_steps:.2e} steps"


def criterion_10():
    sp = SpaceParams(2, 1.0)
    o = sp.origin()
    bodies = {"ball": (Ball(sp, o, 1.0), 0.8), "horoball": (Horoball(sp, np.r_[1.0, 1.0, 0.0]), 1.5),
              "geodesic_tube": (GeodesicTube(sp, o, sp.basis(1), 1.0), 0.8),
              "hyperplane_tube": (HyperplaneTube(sp, o, sp.basis(2), 1.0), 0.8)}
    worst = 0.0
    for name, (body, eps) in bodies.items():
        x = boundary_sample(body, 8).points[1]
        prof = flow_curvature_profile(body, x, eps, steps=8)
        assert len(prof.times) == 8
        for t, lm, lp in zip(prof.times, prof.lambda_minus, prof.lambda_plus):
            flowed = body.erode(t) if t > 0 else body
            k = measured_ii(flowed, normal_flow(body, x, t))
            worst = max(worst, abs(k - lm), abs(k - lp))
    return worst <= 1e-4, f"max |II(S_t) - lambda(t)| = {worst:.2e} over 4 bodies x 8 times"


def criterion_11():
    rng = np.random.default_rng(SEED)
    sp = SpaceParams(2, 1.0)
    o = sp.origin()
    worst = 0.0
    for kappa in (0.01, 0.05):
        for body in (Ball(sp, o, 1.0), GeodesicTube(sp, o, sp.basis(1), 0.5)):
            f = SmoothedField(body, kappa)
            for _ in range(100):
                # probes concentrated near the boundary, where smoothing acts
                pts = boundary_sample(body, 8).points
                p = pts[rng.integers(0, len(pts))]
                x = sp.exp(p, rng.uniform(-0.3, 0.3) * inward_normal(body, p))
                x = sp.exp(x, rng.normal(scale=0.1, size=2) @ sp.tangent_frame(x))
                worst = max(worst, abs(f(x) - body.distance(x)) / kappa)
    norm_err = 0.0
    for kappa in (0.01, 0.05):
        k = BumpKernel(kappa)
        total = dblquad(lambda y, x: k(np.hypot(x, y)), -kappa, kappa, -kappa, kappa,
                        epsabs=1e-13, epsrel=1e-13)[0]
        norm_err = max(norm_err, abs(total - 1.0))
    ok = worst < 1.0 and norm_err <= 1e-8
    return ok, f"max |f_k - f| / kappa = {worst:.3f}, kernel normalization error {norm_err:.1e}"


def criterion_12():
    sp = SpaceParams(2, 1.0)
    start = time.perf_counter()
    alpha_p, beta_p = 0.9 * coth(1.3), 1.1 * coth(1.0)
    rep = smoothed_levelset_check(Ball(sp, sp.origin(), 1.0), coth(1.0), coth(1.0), 0.3,
                                  alpha_p, beta_p, seed=SEED)
    elapsed = time.perf_counter() - start
    chain = not any(rep.inclusion_failures.values())
    in_band = alpha_p - 5e-3 <= rep.curvature_low and rep.curvature_high <= beta_p + 5e-3
    ok = chain and in_band and elapsed < 60.0
    return ok, (f"eta'={rep.eta_p:.3f}, level II in [{rep.curvature_low:.5f}, {rep.curvature_high:.5f}] "
                f"(coth(1+t)={coth(1 + rep.level):.5f}), chain ok {chain}, {elapsed:.1f}s")


def criterion_13():
    sp = SpaceParams(2, 1.0)
    o = sp.origin()
    worst = 0.0
    for body in (Ball(sp, o, 1.0), GeodesicTube(sp, o, sp.basis(1), 1.0)):
        rep = erode_dilate_check(body, 0.5 * body.inradius, n_probe=512, seed=SEED)
        worst = max(worst, rep.defect)
        if not rep.convex_probe_passed:
            return False, "eroded core failed the convexity probe"
    return worst <= 1e-8, f"max defect {worst:.2e} over 512 probes"


CRITERIA = [
    (1, "Riccati barrier fidelity", criterion_1),
    (2, "forward randomized suite", criterion_2),
    (3, "converse randomized suite", criterion_3),
    (4, "sphere curvature", criterion_4),
    (5, "tube curvature", criterion_5),
    (6, "horosphere curvature and flat profile", criterion_6),
    (7, "iff grid for balls", criterion_7),
    (8, "half-space counterexample", criterion_8),
    (9, "focal time oracle", criterion_9),
    (10, "geometry / ODE consistency", criterion_10),
    (11, "smoothing approximation", criterion_11),
    (12, "smoothed level set check", criterion_12),
    (13, "erosion-dilation round trip", criterion_13),
]


def report(number, name, fn):
    ok, detail = fn()
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} ({name}): {detail}"
    return ok, line


@pytest.mark.parametrize("number,name,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, name, fn, capsys):
    ok, line = report(number, name, fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [report(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
