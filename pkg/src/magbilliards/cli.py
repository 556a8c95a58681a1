"""Command-line front end: config ingestion, experiments, CSV/JSON/SVG output."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .curves import (
    TWO_PI,
    Ellipse,
    FieldParams,
    FourierRho,
    check_strong_field,
    curve_from_config,
    offset_point,
)
from .dynamics import (
    BoundaryState,
    boundary_velocity,
    larmor_center,
    trajectory,
)
from .errors import BilliardError
from .gutkin import (
    chord_identity_residual,
    gutkin_residual,
    perturbed_gutkin_curve,
    zindler_report,
)
from .integrability import (
    CircleSampleSet,
    boundary_constancy,
    circle_fourier_degree_test,
    constancy_residual,
    cubic_defect,
    ellipse_offset_polynomial,
    ellipse_offset_singularities,
    global_poly_fit,
    infinity_classification,
)
from .polynomials import BivariatePolynomial
from .svg import export_svg

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(Exception):
    pass


def _f17(x: float) -> str:
    return f"{float(x):.17g}"


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _build_table(cfg: dict):
    if "curve" not in cfg:
        raise ConfigError("config must contain a 'curve' object")
    if "beta" not in cfg:
        raise ConfigError("config must contain 'beta'")
    try:
        curve = curve_from_config(cfg["curve"])
        field = FieldParams(float(cfg["beta"]))
    except (BilliardError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid curve/field config: {exc}") from exc
    return curve, field


def _require_strong_field(curve, field):
    report = check_strong_field(curve, field)
    if not report.passed:
        raise ConfigError(
            "strong-field condition violated: need r*max|k| < 1/2 and simple "
            f"offsets, got r*max|k| = {report.r_times_kmax:.6g}"
            + ("" if report.offsets_simple else " with self-intersecting offsets")
        )
    return report

def _config_hash(cfg: dict) -> str:
    text = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _emit(path: str, text: str, cfg: dict, tolerances: dict, fmt: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    base, _ = os.path.splitext(path)
    meta = {
        "config_hash": _config_hash(cfg),
        "tolerances": tolerances,
        "version": __version__,
        "format": fmt,
    }
    with open(base + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit_meta_only(path: str, cfg: dict, tolerances: dict, fmt: str):
    base, _ = os.path.splitext(path)
    meta = {
        "config_hash": _config_hash(cfg),
        "tolerances": tolerances,
        "version": __version__,
        "format": fmt,
    }
    with open(base + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _curve_polyline(curve, n=512):
    u = np.linspace(0.0, TWO_PI, n, endpoint=False)
    return np.asarray(curve.point(u))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args, cfg):
    curve, field = _build_table(cfg)
    _require_strong_field(curve, field)
    initial = cfg.get("initial", {"u": 0.3, "theta": 1.0})
    steps = args.steps

    if "center" in initial:
        start = np.asarray(initial["center"], dtype=float)
        orbit = trajectory(curve, field, start, steps)
        rows = ["step,cx,cy"]
        rows += [f"{i},{_f17(p[0])},{_f17(p[1])}" for i, p in enumerate(orbit)]
        data = rows
        points = orbit
    else:
        try:
            state = BoundaryState(float(initial["u"]), float(initial["theta"]))
        except KeyError as exc:
            raise ConfigError(f"initial condition missing {exc}") from exc
        states = trajectory(curve, field, state, steps)
        rows = ["step,u,theta,x,y"]
        pts = []
        for i, s in enumerate(states):
            p = curve.point(s.u)
            pts.append(p)
            rows.append(f"{i},{_f17(s.u)},{_f17(s.theta)},{_f17(p[0])},{_f17(p[1])}")
        data = rows
        points = np.asarray(pts)

    out = os.path.join(args.out, "simulate." + ("svg" if args.format == "svg" else "csv"))
    tols = {"tol": args.tol}
    if args.format == "svg":
        export_svg(
            out,
            polylines=[("table", _curve_polyline(curve), True)],
            point_groups=[("orbit", np.asarray(points))],
        )
        _emit_meta_only(out, cfg, tols, "svg")
    else:
        _emit(out, "\n".join(data) + "\n", cfg, tols, "csv")
    return [out]


def _portrait_initials(curve, field, n_orbits, seed):
    n_u = max(1, math.ceil(math.sqrt(n_orbits)))
    n_th = max(1, math.ceil(n_orbits / n_u))
    du = TWO_PI / n_u
    dth = math.pi / (n_th + 1)
    jitter_u = np.zeros((n_u, n_th))
    jitter_t = np.zeros((n_u, n_th))
    if seed is not None:
        rng = np.random.default_rng(seed)
        jitter_u = rng.uniform(-0.25, 0.25, (n_u, n_th)) * du
        jitter_t = rng.uniform(-0.25, 0.25, (n_u, n_th)) * dth
    centers = []
    for i in range(n_u):
        for j in range(n_th):
            if len(centers) == n_orbits:
                break
            u = (i * du + jitter_u[i, j]) % TWO_PI
            th = min(max((j + 1) * dth + jitter_t[i, j], 1e-3), math.pi - 1e-3)
            state = BoundaryState(u, th)
            x = curve.point(u)
            centers.append(larmor_center(x, boundary_velocity(curve, state), field.r))
    return centers


def _cmd_portrait(args, cfg):
    curve, field = _build_table(cfg)
    _require_strong_field(curve, field)
    centers = _portrait_initials(curve, field, args.grid, args.seed)

    orbits = [trajectory(curve, field, c, args.steps) for c in centers]

    out = os.path.join(args.out, "portrait." + ("svg" if args.format == "svg" else "csv"))
    tols = {"tol": args.tol}
    if args.format == "svg":
        u = np.linspace(0.0, TWO_PI, 512, endpoint=False)
        polylines = [
            ("table", _curve_polyline(curve), True),
            ("inner-offset", offset_point(curve, u, field.r), True),
            ("outer-offset", offset_point(curve, u, -field.r), True),
        ]
        groups = [(f"orbit-{k}", orb) for k, orb in enumerate(orbits)]
        export_svg(out, polylines=polylines, point_groups=groups)
        _emit_meta_only(out, cfg, tols, "svg")
    else:
        rows = ["orbit,step,cx,cy"]
        for k, orb in enumerate(orbits):
            rows += [
                f"{k},{i},{_f17(p[0])},{_f17(p[1])}" for i, p in enumerate(orb)
            ]
        _emit(out, "\n".join(rows) + "\n", cfg, tols, "csv")
    return [out]


def _cmd_offset(args, cfg):
    curve, field = _build_table(cfg)
    offsets = cfg.get("offsets", [field.r, -field.r])
    kmax = curve.max_abs_curvature()
    for t in offsets:
        if abs(float(t)) >= 1.0 / kmax:
            raise ConfigError(
                f"offset {t} reaches the focal distance {1.0 / kmax:.6g}"
            )
    u = np.linspace(0.0, TWO_PI, args.grid, endpoint=False)
    rows = ["t,u,x,y,curvature"]
    polylines = [("table", _curve_polyline(curve), True)]
    for t in offsets:
        t = float(t)
        pts = offset_point(curve, u, t)
        k = curve.curvature(u) / (1.0 - t * curve.curvature(u))
        rows += [
            f"{_f17(t)},{_f17(uu)},{_f17(p[0])},{_f17(p[1])},{_f17(kk)}"
            for uu, p, kk in zip(u, pts, k)
        ]
        polylines.append((f"offset-{t:g}", pts, True))

    out = os.path.join(args.out, "offset." + ("svg" if args.format == "svg" else "csv"))
    tols = {"tol": args.tol}
    if args.format == "svg":
        export_svg(out, polylines=polylines)
        _emit_meta_only(out, cfg, tols, "svg")
    else:
        _emit(out, "\n".join(rows) + "\n", cfg, tols, "csv")
    return [out]


def _default_polynomial(curve, field) -> BivariatePolynomial:
    if isinstance(curve, Ellipse):
        return ellipse_offset_polynomial(curve.a, curve.b, field.r)
    # squared center distance minus r^2: the circular-table invariant
    return BivariatePolynomial.from_terms(
        [(2, 0, 1.0), (0, 2, 1.0), (0, 0, -field.r**2)]
    )


def _cmd_integrability(args, cfg):
    curve, field = _build_table(cfg)
    _require_strong_field(curve, field)
    if "polynomial" in cfg:
        try:
            poly = BivariatePolynomial.from_json_dict(cfg["polynomial"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid polynomial config: {exc}") from exc
    else:
        poly = _default_polynomial(curve, field)

    u = np.linspace(0.0, TWO_PI, args.grid, endpoint=False)
    report = {
        "polynomial": poly.to_json_dict(),
        "beta": field.beta,
        "offset_constancy": {},
        "boundary_values": {},
        "cubic_defect": [],
    }
    for label, t in (("inner", field.r), ("outer", -field.r)):
        pts = offset_point(curve, u, t)
        for sign in (+1, -1):
            rep = constancy_residual(poly, pts, field.beta, sign)
            report["offset_constancy"][f"{label}_sign{'+' if sign > 0 else '-'}"] = {
                "mean": rep.mean,
                "max_abs_dev": rep.max_abs_dev,
                "relative_dev": rep.relative_dev,
                "curvature_margin": rep.curvature_margin,
            }
    bc = boundary_constancy(poly, curve, field, n=args.grid)
    report["boundary_values"] = {
        "const_minus": bc.const_minus,
        "const_plus": bc.const_plus,
        "dev_minus": bc.dev_minus,
        "dev_plus": bc.dev_plus,
    }
    # generic probe parameters: symmetry axes of a table can annihilate
    # every term of the cubic defect, leaving nothing to compare
    for uu in 0.35 + np.linspace(0.0, TWO_PI, 4, endpoint=False):
        rep = cubic_defect(poly, curve, field, float(uu), +1)
        report["cubic_defect"].append(
            {
                "u": float(uu),
                "analytic": rep.analytic,
                "numeric": rep.numeric,
                "relative_error": rep.relative_error,
                "even_residual": rep.even_residual,
            }
        )
    report["infinity"] = [
        {
            "direction": [repr(pt.direction[0]), repr(pt.direction[1])],
            "multiplicity": pt.multiplicity,
            "kind": pt.kind,
        }
        for pt in infinity_classification(poly)
    ]
    if isinstance(curve, Ellipse):
        sing = ellipse_offset_singularities(curve.a, curve.b, field.r)
        report["ellipse_singularities"] = {
            "points": [[repr(p.point[0]), repr(p.point[1])] for p in sing.points],
            "max_relative_value": sing.max_relative_value,
            "max_relative_grad": sing.max_relative_grad,
        }

    out = os.path.join(args.out, "integrability.json")
    _emit(out, _json_text(report), cfg, {"tol": args.tol}, "json")
    return [out]


def _cmd_gutkin_check(args, cfg):
    curve, field = _build_table(cfg)
    delta = args.delta if args.delta is not None else cfg.get("delta")
    if delta is None:
        raise ConfigError("gutkin-check needs --delta or a 'delta' config entry")
    delta = float(delta)
    if not 0.0 < delta < math.pi:
        raise ConfigError(f"delta must lie in (0, pi), got {delta}")

    check = gutkin_residual(curve, field, delta, args.grid)
    zrep = zindler_report(curve, field, delta, args.grid)
    rows = ["phi_bar,d,exit_angle,pmx,pmy,ppx,ppy,mx,my,chord_len,mid_dist"]
    for i in range(len(zrep.phi_bar)):
        rows.append(
            ",".join(
                _f17(v)
                for v in (
                    zrep.phi_bar[i],
                    zrep.half_spread[i],
                    zrep.exit_angles[i],
                    zrep.p_minus[i, 0],
                    zrep.p_minus[i, 1],
                    zrep.p_plus[i, 0],
                    zrep.p_plus[i, 1],
                    zrep.midpoints[i, 0],
                    zrep.midpoints[i, 1],
                    zrep.chord_lengths[i],
                    zrep.mid_distances[i],
                )
            )
        )
    out_csv = os.path.join(args.out, "gutkin_check.csv")
    tols = {"tol": args.tol}
    _emit(out_csv, "\n".join(rows) + "\n", cfg, tols, "csv")

    summary = {
        "delta": delta,
        "max_exit_angle_deviation": check.max_deviation,
        "is_gutkin_at_tol": bool(check.max_deviation < args.tol),
        "zindler": zrep.summary(),
        "admissibility": {
            "r_times_kmax": check_strong_field(curve, field).r_times_kmax,
            "passed": check_strong_field(curve, field).passed,
        },
    }
    if isinstance(curve, FourierRho):
        summary["chord_identity_max_residual"] = chord_identity_residual(
            curve, field, delta, args.grid
        ).max_residual
    out_json = os.path.join(args.out, "gutkin_check.json")
    _emit(out_json, _json_text(summary), cfg, tols, "json")
    return [out_csv, out_json]


def _cmd_gutkin_construct(args, cfg):
    delta = args.delta if args.delta is not None else cfg.get("delta")
    if delta is None or "n" not in cfg:
        raise ConfigError("gutkin-construct needs 'n' in the config and a delta")
    try:
        n = int(cfg["n"])
        epsilon = float(cfg.get("epsilon", 0.01))
        delta = float(delta)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid construct parameters: {exc}") from exc

    built = perturbed_gutkin_curve(n, delta, epsilon)
    check = gutkin_residual(built.curve, built.field, delta, args.grid)
    payload = {
        "curve": built.curve.to_config(),
        "beta": built.field.beta,
        "delta": built.delta,
        "d0": built.half_angle,
        "n": built.mode,
        "epsilon": built.epsilon,
        "max_exit_angle_deviation": check.max_deviation,
        "admissibility": {
            "r_times_kmax": built.admissibility.r_times_kmax,
            "curvature_ok": built.admissibility.curvature_ok,
            "offsets_simple": built.admissibility.offsets_simple,
            "passed": built.admissibility.passed,
        },
    }
    out = os.path.join(args.out, "gutkin_construct.json")
    _emit(out, _json_text(payload), cfg, {"tol": args.tol}, "json")
    return [out]


def _cmd_circles_test(args, cfg):
    curve, field = _build_table(cfg)
    if "polynomial" in cfg:
        poly = BivariatePolynomial.from_json_dict(cfg["polynomial"])
    else:
        poly = BivariatePolynomial.from_terms(
            [(3, 0, 1.0), (1, 1, -2.0), (0, 2, 1.0), (1, 0, -1.0), (0, 0, 0.5)]
        )
    n_deg = int(cfg.get("degree", poly.degree))
    n_circles = args.grid
    m2 = 64
    while m2 < 4 * n_deg + 4:
        m2 *= 2

    us = np.linspace(0.0, TWO_PI, n_circles, endpoint=False)
    per_circle = []
    all_pts = []
    all_vals = []
    for uu in us:
        center = np.asarray(curve.point(float(uu)), dtype=float)
        sset = CircleSampleSet.from_function(poly, center, field.r, m2)
        rep = circle_fourier_degree_test(sset, n_deg)
        per_circle.append(
            {"u": float(uu), "passed": rep.passed, "tail_ratio": rep.tail_ratio}
        )
        t = np.linspace(0.0, TWO_PI, m2, endpoint=False)
        pts = center + field.r * np.stack((np.cos(t), np.sin(t)), axis=-1)
        all_pts.append(pts)
        all_vals.append(poly(pts[:, 0], pts[:, 1]))

    pts = np.vstack(all_pts)
    vals = np.concatenate(all_vals)
    fit = global_poly_fit(pts, vals, 2 * n_deg)
    report = {
        "degree_bound": n_deg,
        "n_circles": n_circles,
        "all_circles_pass": all(c["passed"] for c in per_circle),
        "per_circle": per_circle,
        "global_fit_degree": 2 * n_deg,
        "global_fit_max_residual": fit.max_residual,
        "global_fit_ok": bool(fit.max_residual < 1e-8),
    }
    out = os.path.join(args.out, "circles_test.json")
    _emit(out, _json_text(report), cfg, {"tol": args.tol}, "json")
    return [out]


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magbil",
        description="Magnetic billiards: simulation, integrability tests, "
        "Gutkin construction",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "simulate": "iterate the billiard map and write the trajectory",
        "portrait": "iterate a grid of Larmor centers under the center map",
        "offset": "emit offset polylines with curvature",
        "integrability": "polynomial-invariant residual reports",
        "gutkin-check": "constant-incidence residual and Zindler diagnostics",
        "gutkin-construct": "build a first-order Gutkin table",
        "circles-test": "circle-restriction degree test plus global fit",
    }
    grid_defaults = {"portrait": 16, "circles-test": 32}
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
        p.add_argument("--steps", type=int, default=200)
        p.add_argument("--grid", type=int, default=grid_defaults.get(name, 256))
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--seed", type=int, default=None, help="grid jitter only")
        p.add_argument("--tol", type=float, default=1e-8)
    return parser


_COMMANDS = {
    "simulate": _cmd_simulate,
    "portrait": _cmd_portrait,
    "offset": _cmd_offset,
    "integrability": _cmd_integrability,
    "gutkin-check": _cmd_gutkin_check,
    "gutkin-construct": _cmd_gutkin_construct,
    "circles-test": _cmd_circles_test,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        if args.steps < 0 or args.grid < 1:
            raise ConfigError("--steps must be >= 0 and --grid >= 1")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        files = _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BilliardError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
