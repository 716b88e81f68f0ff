"""Command-line front end: ``epsconvex <command> [options]``.

Exit status is 0 when a run completes and its verdict passes, 2 when a
verdict fails and 1 on any error.  Output goes to stdout as JSON (sorted
keys) or CSV and depends only on the arguments and the seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import criterion, riccati, smoothing
from .bodies import EmptyBodyError, boundary_sample, ray_exits
from .bodyspec import BodySpecError, load_body

PASS, FAIL, ERROR = 0, 2, 1


def _plain(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _emit_json(doc, out):
    out.write(json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n")


def _emit_csv(header, rows, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    out.write(buf.getvalue())


def _require(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise ValueError(f"--{n.replace('_', '-')} is required for '{args.command}'")
        if n in ("eps", "eta") and not getattr(args, n) > 0:
            raise ValueError(f"--{n} must be positive")


def _bounds(args, body=None):
    a = args.a if args.a is not None else (body.space.a if body is not None else None)
    b = args.b if args.b is not None else a
    if a is None:
        raise ValueError("--a is required")
    return riccati.PinchBounds(a, b)


def _base_point(body):
    """A fixed boundary point: the first ray exit from the body's anchor."""
    if body.space.m == 2:
        return boundary_sample(body, 16).points[0]
    anchor = body.anchor()
    frame = body.space.tangent_frame(anchor)
    for e in frame:
        hits, pts = ray_exits(body, anchor, np.array([e]))
        if hits[0]:
            return pts[0]
    raise ValueError("no boundary point reachable from the anchor")


# -- commands ------------------------------------------------------------------

def cmd_riccati(args, out):
    _require(args, "eps")
    bounds = _bounds(args)
    rng = np.random.default_rng(args.seed)
    lo, hi = bounds.forward_band(args.eps)
    if lo > hi:
        raise ValueError(f"forward band is empty: b*tanh(b*eps)={lo:.6g} > a*coth(a*eps)={hi:.6g}")
    A0 = riccati.random_symmetric(rng, args.rank, lo, hi)
    R = riccati.random_piecewise_R(rng, args.rank, bounds, args.eps)
    rep = riccati.forward_positivity_check(A0, R, bounds, args.eps)
    traj = rep.trajectory
    ts = np.linspace(0.0, rep.t_end, args.steps)
    dense = riccati.integrate_riccati(A0, R, rep.t_end, t_eval=ts)
    lm, lp = dense.extremes
    idx = [int(np.argmin(np.abs(dense.times - t))) for t in ts]
    up = riccati.scalar_coth_barrier(bounds.a, args.eps, ts)
    low = riccati.scalar_tanh_barrier(bounds.b, args.eps, ts)
    ok = rep.positive and rep.upper_barrier_ok and rep.lower_barrier_ok
    if args.format == "csv":
        _emit_csv(["t", "lambda_minus", "lambda_plus", "coth_barrier", "tanh_barrier"],
                  [(t, lm[i], lp[i], u, l) for t, i, u, l in zip(ts, idx, up, low)], out)
    else:
        _emit_json({"eps": args.eps, "a": bounds.a, "b": bounds.b, "rank": args.rank,
                    "seed": args.seed, "t_end": rep.t_end,
                    "min_lambda_minus": rep.min_lambda_minus,
                    "max_lambda_plus": rep.max_lambda_plus,
                    "blow_up_detected": rep.blow_up_detected,
                    "upper_barrier_ok": rep.upper_barrier_ok,
                    "lower_barrier_ok": rep.lower_barrier_ok, "passed": ok,
                    "steps": len(traj.times) - 1,
                    "samples": [{"t": t, "lambda_minus": lm[i], "lambda_plus": lp[i],
                                 "coth_barrier": u, "tanh_barrier": l}
                                for t, i, u, l in zip(ts, idx, up, low)]}, out)
    return PASS if ok else FAIL


def _verdict_rows(v):
    return [(f"{v.kind}.ii_lower", v.lower, v.bound_low, v.bound_high,
             str(v.lower >= v.bound_low - v.tolerance).lower()),
            (f"{v.kind}.ii_upper", v.upper, v.bound_low, v.bound_high,
             str(v.upper <= v.bound_high + v.tolerance).lower())]


def cmd_check(args, out):
    _require(args, "body", "eps")
    body = load_body(args.body)
    bounds = _bounds(args, body)
    ii = criterion.ii_bounds(body)
    verdicts = [criterion.check_necessary(body, args.eps, bounds, args.tolerance, ii=ii),
                criterion.check_sufficient(body, args.eps, bounds, args.tolerance, ii=ii)]
    if bounds.a == bounds.b:
        verdicts.append(criterion.check_iff_constant_curvature(body, args.eps, bounds.a,
                                                                args.tolerance, ii=ii))
    if args.format == "csv":
        _emit_csv(["quantity", "value", "bound_low", "bound_high", "pass"],
                  [r for v in verdicts for r in _verdict_rows(v)], out)
    else:
        _emit_json({"body": body.shape, "ii_source": ii.source, "corners": len(ii.corners),
                    "verdicts": {v.kind: v.to_dict() for v in verdicts}}, out)
    return PASS if all(v.passed for v in verdicts) else FAIL


def cmd_profile(args, out):
    _require(args, "body", "eps")
    body = load_body(args.body)
    prof = criterion.flow_curvature_profile(body, _base_point(body), args.eps, steps=args.steps)
    if args.format == "json":
        _emit_json({"times": prof.times, "lambda_minus": prof.lambda_minus,
                    "lambda_plus": prof.lambda_plus, "focal_time": prof.focal_time}, out)
    else:
        _emit_csv(["t", "lambda_minus", "lambda_plus"], prof.rows(), out)
    return PASS


def cmd_focal(args, out):
    _require(args, "body")
    body = load_body(args.body)
    t_max = args.eps if args.eps is not None else 10.0 / body.space.a
    rep = criterion.focal_analysis(body, _base_point(body), t_max)
    doc = {"t_max": t_max,
           "focal_time": "none" if rep.focal_time is None else rep.focal_time,
           "blow_up_time": "none" if rep.blow_up_time is None else rep.blow_up_time}
    if args.format == "csv":
        _emit_csv(["quantity", "value"], sorted(doc.items()), out)
    else:
        _emit_json(doc, out)
    return PASS


def cmd_roundtrip(args, out):
    _require(args, "body", "eps")
    body = load_body(args.body)
    rep = criterion.erode_dilate_check(body, args.eps, n_probe=args.probes, seed=args.seed)
    if args.format == "csv":
        _emit_csv(["quantity", "value", "bound_low", "bound_high", "pass"],
                  [("defect", rep.defect, 0.0, 2 * rep.sampling_step,
                    str(rep.defect <= 2 * rep.sampling_step).lower()),
                   ("convex_probe_worst", rep.convex_probe_worst, "-inf", 1e-8,
                    str(rep.convex_probe_passed).lower())], out)
    else:
        _emit_json(rep.to_dict(), out)
    return PASS if rep.passed else FAIL


def cmd_smooth(args, out):
    _require(args, "body", "eta")
    body = load_body(args.body)
    cf = body.closed_form_ii()
    if cf is None:
        raise ValueError("smoothing check needs a body with closed-form curvature")
    alpha = cf[0] if args.alpha is None else args.alpha
    beta = cf[1] if args.beta is None else args.beta
    alpha_p = 0.9 * alpha if args.alpha_p is None else args.alpha_p
    beta_p = 1.1 * beta if args.beta_p is None else args.beta_p
    rep = smoothing.smoothed_levelset_check(body, alpha, beta, args.eta, alpha_p, beta_p,
                                            seed=args.seed)
    if args.format == "csv":
        _emit_csv(["quantity", "value", "bound_low", "bound_high", "pass"],
                  [("level_set_ii_low", rep.curvature_low, alpha_p, beta_p,
                    str(rep.curvature_ok).lower()),
                   ("level_set_ii_high", rep.curvature_high, alpha_p, beta_p,
                    str(rep.curvature_ok).lower()),
                   ("inclusion_failures", sum(rep.inclusion_failures.values()), 0, 0,
                    str(not any(rep.inclusion_failures.values())).lower())], out)
    else:
        _emit_json(rep.to_dict(), out)
    return PASS if rep.passed else FAIL


COMMANDS = {"riccati": cmd_riccati, "check": cmd_check, "profile": cmd_profile,
            "focal": cmd_focal, "roundtrip": cmd_roundtrip, "smooth": cmd_smooth}


def build_parser():
    p = argparse.ArgumentParser(prog="epsconvex",
                                description="eps-strict convexity checks in hyperbolic space")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--body", help="path to a JSON body description")
    p.add_argument("--eps", type=float, help="neighbourhood radius (flow horizon for 'focal')")
    p.add_argument("--a", type=float, help="curvature pinching lower constant (default: body's a)")
    p.add_argument("--b", type=float, help="curvature pinching upper constant (default: a)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--tolerance", type=float, default=criterion.DEFAULT_TAU)
    p.add_argument("--steps", type=int, default=64, help="samples for 'profile' and 'riccati'")
    p.add_argument("--rank", type=int, default=2, help="matrix size for 'riccati'")
    p.add_argument("--probes", type=int, default=512, help="boundary probes for 'roundtrip'")
    p.add_argument("--eta", type=float, help="neighbourhood bound for 'smooth'")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--alpha-p", dest="alpha_p", type=float)
    p.add_argument("--beta-p", dest="beta_p", type=float)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "profile" else "json"
    if args.tolerance <= 0:
        print("error: --tolerance must be positive", file=sys.stderr)
        return ERROR
    if args.a is not None and args.b is not None and args.a > args.b:
        print("error: need a <= b", file=sys.stderr)
        return ERROR
    try:
        return COMMANDS[args.command](args, out)
    except BodySpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ValueError, ArithmeticError, OSError, EmptyBodyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return ERROR


if __name__ == "__main__":
    sys.exit(main())
