"""Constant-incidence (Gutkin) billiards: verification and construction.

A table has the delta-Gutkin property when every Larmor arc entering at
angle delta exits at angle delta.  The centers of the entering arcs then
trace a closed curve that is invariant under the center map and is a
Zindler curve: the chord between the two centers of a reflection has
constant length 2r sin(delta) and the chord midpoints move parallel to
it, on a curve parallel to the table at distance r cos(delta).

The construction side deforms the unit circle at first order: a
curvature-radius mode n survives only when n tan(d0) = tan(n d0), where
d0 is the half-spread of the constant-angle chord on the circle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .curves import (
    TWO_PI,
    AdmissibilityReport,
    FieldParams,
    FourierRho,
    PlaneCurve,
    check_strong_field,
    curve_from_rho,
    distance_to_curve,
    rot90,
)
from .dynamics import BoundaryState, boundary_velocity, center_map, flow_step, larmor_center
from .errors import (
    ChordSolveFailure,
    DegenerateLinearization,
    InconsistentModes,
    NoSolution,
)


@dataclass(frozen=True)
class GutkinParams:
    """Incidence angle delta in (0, pi) together with the field."""

    delta: float
    field: FieldParams

    def __post_init__(self):
        if not 0.0 < self.delta < math.pi:
            raise ValueError(f"delta must lie in (0, pi), got {self.delta}")


@dataclass(frozen=True)
class ChordRecord:
    """One constant-incidence chord: entry/exit data and derived centers."""

    phi_bar: float  # mean tangent angle of entry and exit
    half_spread: float  # half the tangent-angle gap, in (0, pi)
    u_entry: float
    u_exit: float
    entry_point: np.ndarray
    exit_point: np.ndarray
    exit_angle: float
    p_minus: np.ndarray  # center of the entering arc
    p_plus: np.ndarray  # center of the reflected arc
    midpoint: np.ndarray
    tangency_point: np.ndarray  # inner-offset tangency of the exit circle


def delta_chord(
    curve: PlaneCurve, field: FieldParams, delta: float, u_entry: float
) -> ChordRecord:
    """Shoot the Larmor arc entering at ``u_entry`` with incidence delta."""
    if not 0.0 < delta < math.pi:
        raise ValueError(f"delta must lie in (0, pi), got {delta}")
    step = flow_step(curve, field, BoundaryState(u=u_entry, theta=delta))
    r = field.r

    phi_e = float(curve.tangent_angle(u_entry))
    phi_x = float(curve.tangent_angle(step.exit.u))
    # the footpoint retreats along the boundary: entry carries the larger angle
    d = ((phi_e - phi_x) % TWO_PI) / 2.0
    phi_bar = phi_e - d

    t_exit = curve.tangent(step.exit.u)
    n_exit = rot90(t_exit)
    p_plus = larmor_center(step.exit_point, boundary_velocity(curve, step.exit), r)
    return ChordRecord(
        phi_bar=phi_bar,
        half_spread=d,
        u_entry=float(u_entry),
        u_exit=step.exit.u,
        entry_point=step.entry_point,
        exit_point=step.exit_point,
        exit_angle=step.exit.theta,
        p_minus=step.center,
        p_plus=p_plus,
        midpoint=0.5 * (step.center + p_plus),
        tangency_point=step.exit_point + r * n_exit,
    )


@dataclass(frozen=True)
class GutkinCheck:
    delta: float
    entry_params: np.ndarray
    deviations: np.ndarray  # |exit angle - delta| per chord
    gamma: np.ndarray  # polyline of entering-arc centers

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviations))


def gutkin_residual(
    curve: PlaneCurve, field: FieldParams, delta: float, grid: int = 256
) -> GutkinCheck:
    """Max deviation of the exit angle from delta over a uniform entry grid."""
    us = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    devs = np.empty(grid)
    gamma = np.empty((grid, 2))
    for i, u in enumerate(us):
        rec = delta_chord(curve, field, delta, float(u))
        devs[i] = abs(rec.exit_angle - delta)
        gamma[i] = rec.p_minus
    return GutkinCheck(delta=delta, entry_params=us, deviations=devs, gamma=gamma)


# ---------------------------------------------------------------------------
# circle relations and first-order theory


def chord_half_angle(delta: float, beta: float) -> float:
    """Half-spread d0 of the constant-incidence chord on the unit circle.

    Root of beta*sin(d) = sin(delta + d) in (0, pi - delta).
    """
    if not 0.0 < delta < math.pi:
        raise ValueError(f"delta must lie in (0, pi), got {delta}")
    if not beta > 0.0:
        raise ValueError("beta must be positive")

    def g(d):
        return beta * math.sin(d) - math.sin(delta + d)

    lo, hi = 1e-15, math.pi - delta - 1e-15
    if not g(lo) < 0.0 < g(hi):
        raise NoSolution(f"no sign change of the chord relation on (0, {math.pi - delta})")
    return brentq(g, lo, hi, xtol=1e-14, rtol=1e-15)


def gutkin_mode_roots(n: int, scan: int = 20000) -> list[float]:
    """All d0 in (0, pi) with n tan(d0) = tan(n d0), away from tan poles.

    Uses the pole-free form sin(n d) cos(d) - n cos(n d) sin(d) and then
    drops roots sitting on a pole of either tangent.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise ValueError(f"mode n must be an integer >= 2, got {n}")

    def g(d):
        return math.sin(n * d) * math.cos(d) - n * math.cos(n * d) * math.sin(d)

    xs = np.linspace(0.0, math.pi, scan + 1)[1:-1]
    vals = np.array([g(x) for x in xs])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        root = brentq(g, xs[i], xs[i + 1], xtol=1e-14, rtol=1e-15)
        if abs(math.cos(root)) < 1e-7 or abs(math.cos(n * root)) < 1e-7:
            continue  # pole of tan(d) or tan(n d): not a genuine solution
        if abs(n * math.tan(root) - math.tan(n * root)) > 1e-10 * (
            1.0 + abs(n * math.tan(root))
        ):
            continue
        if not roots or abs(root - roots[-1]) > 1e-9:
            roots.append(root)
    return roots


@dataclass(frozen=True)
class ModeResponse:
    """First-order half-spread response to a curvature-radius mode."""

    cos_amp: float
    sin_amp: float
    amp_from_imag: float
    amp_from_real: float


def first_order_response(
    n: int,
    half_angle: float,
    delta: float,
    beta: float,
    rho_cos_amp: float = 0.0,
    rho_sin_amp: float = 0.0,
) -> ModeResponse:
    """First-order chord response d1 to a mode-n curvature-radius term.

    Matching both components of the linearized chord identity gives the
    amplitude ratio two ways,

        A = sin(d0) cos(n d0) / K      (imaginary part)
        A = cos(d0) sin(n d0) / (n K)  (real part)

    with K = cos(delta + d0)/beta - cos(d0).  The two agree exactly when
    n satisfies the Gutkin relation; otherwise only the zero response is
    consistent.
    """
    k_coef = math.cos(delta + half_angle) / beta - math.cos(half_angle)
    if abs(k_coef) < 1e-12:
        raise DegenerateLinearization(f"matching coefficient K = {k_coef} vanishes")
    a_im = math.sin(half_angle) * math.cos(n * half_angle) / k_coef
    a_re = math.cos(half_angle) * math.sin(n * half_angle) / (n * k_coef)
    if rho_cos_amp == 0.0 and rho_sin_amp == 0.0:
        return ModeResponse(0.0, 0.0, a_im, a_re)
    if abs(a_im - a_re) > 1e-10 * max(1.0, abs(a_im), abs(a_re)):
        raise InconsistentModes(
            f"mode {n} violates the Gutkin relation at d0={half_angle}: "
            f"matchings {a_im} vs {a_re}"
        )
    amp = 0.5 * (a_im + a_re)
    return ModeResponse(
        cos_amp=amp * rho_cos_amp,
        sin_amp=amp * rho_sin_amp,
        amp_from_imag=a_im,
        amp_from_real=a_re,
    )


@dataclass(frozen=True)
class GutkinConstruction:
    """First-order Gutkin table: curve, field and the seed data."""

    curve: FourierRho
    field: FieldParams
    mode: int
    delta: float
    half_angle: float
    epsilon: float
    admissibility: AdmissibilityReport


def perturbed_gutkin_curve(n: int, delta: float, epsilon: float) -> GutkinConstruction:
    """Unit circle deformed by epsilon*cos(n*phi) in the curvature radius.

    The half-spread d0 is the smallest Gutkin-relation root for mode n
    that yields a positive field beta = sin(delta + d0)/sin(d0); the
    strong-field admissibility of the result is reported, not enforced.
    """
    if not 0.0 < delta < math.pi:
        raise ValueError(f"delta must lie in (0, pi), got {delta}")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1) to keep the curve convex")
    roots = gutkin_mode_roots(n)
    if not roots:
        raise NoSolution(f"mode {n} has no nontrivial Gutkin-relation root")
    half_angle = beta = None
    for d0 in roots:
        s = math.sin(delta + d0)
        if s > 0.0:
            half_angle, beta = d0, s / math.sin(d0)
            break
    if half_angle is None:
        raise NoSolution(
            f"no Gutkin root of mode {n} gives a positive field for delta={delta}"
        )
    cos_coeffs = [0.0] * n
    cos_coeffs[n - 1] = epsilon
    curve = curve_from_rho(1.0, cos_coeffs, [])
    field = FieldParams(beta)
    return GutkinConstruction(
        curve=curve,
        field=field,
        mode=n,
        delta=delta,
        half_angle=half_angle,
        epsilon=epsilon,
        admissibility=check_strong_field(curve, field),
    )


# ---------------------------------------------------------------------------
# chord identity in the tangent-angle picture


@dataclass(frozen=True)
class ChordIdentityReport:
    phi_bar: np.ndarray
    half_spread: np.ndarray
    residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))


def chord_identity_residual(
    curve: FourierRho, field: FieldParams, delta: float, grid: int = 256
) -> ChordIdentityReport:
    """Residual of the chord identity for a curvature-radius table.

    For each measured chord (phi_bar, d) the integral of rho(xi) e^{i xi}
    across the spread must equal (2/beta) sin(delta + d) e^{i phi_bar};
    the max complex mismatch over the grid is reported.
    """
    if not isinstance(curve, FourierRho):
        raise TypeError("chord identity needs a curvature-radius (FourierRho) table")
    us = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    phi_bar = np.empty(grid)
    spread = np.empty(grid)
    resid = np.empty(grid)
    for i, u in enumerate(us):
        try:
            rec = delta_chord(curve, field, delta, float(u))
        except Exception as exc:
            raise ChordSolveFailure(f"chord at entry {u} failed: {exc}") from exc
        lhs = complex(curve.chord_primitive(rec.phi_bar + rec.half_spread)) - complex(
            curve.chord_primitive(rec.phi_bar - rec.half_spread)
        )
        rhs = (
            (2.0 / field.beta)
            * math.sin(delta + rec.half_spread)
            * cmath.exp(1j * rec.phi_bar)
        )
        phi_bar[i] = rec.phi_bar
        spread[i] = rec.half_spread
        resid[i] = abs(lhs - rhs)
    return ChordIdentityReport(phi_bar=phi_bar, half_spread=spread, residuals=resid)


# ---------------------------------------------------------------------------
# Zindler diagnostics and invariance of the center curve


def point_to_polyline(p, polyline: np.ndarray, closed: bool = True) -> float:
    """Distance from a point to a polyline (closed by default)."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(polyline, dtype=float)
    b = np.roll(a, -1, axis=0) if closed else a[1:]
    if not closed:
        a = a[:-1]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0.0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return float(np.min(np.hypot(proj[:, 0] - p[0], proj[:, 1] - p[1])))


@dataclass(frozen=True)
class ZindlerReport:
    """Per-chord Zindler diagnostics over an entry grid."""

    delta: float
    r: float
    phi_bar: np.ndarray
    half_spread: np.ndarray
    exit_angles: np.ndarray
    p_minus: np.ndarray
    p_plus: np.ndarray
    midpoints: np.ndarray
    chord_lengths: np.ndarray
    mid_distances: np.ndarray  # distance of each midpoint to the table
    chord_length_dev: np.ndarray  # vs 2 r sin(delta)
    tangency_dev: np.ndarray  # vs 2 r sin(delta/2), worst of the two legs
    mid_distance_dev: np.ndarray  # vs |r cos(delta)|
    parallel_sin: np.ndarray  # |sin| of (midpoint velocity, chord) angle

    def summary(self) -> dict:
        return {
            "max_chord_length_dev": float(np.max(self.chord_length_dev)),
            "max_tangency_dev": float(np.max(self.tangency_dev)),
            "max_mid_distance_dev": float(np.max(self.mid_distance_dev)),
            "max_parallel_sin": float(np.max(self.parallel_sin)),
            "max_mid_distance": float(np.max(self.mid_distances)),
        }


def zindler_report(
    curve: PlaneCurve, field: FieldParams, delta: float, grid: int = 512
) -> ZindlerReport:
    """Chord-length, tangency, midpoint and parallelism diagnostics.

    On an exact Gutkin table the chord P-P+ has length 2r sin(delta),
    both legs to the inner tangency point measure 2r sin(delta/2), the
    midpoints sit at distance |r cos(delta)| from the table and move
    parallel to the chord (midpoint velocity by centered differences).
    """
    r = field.r
    us = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    recs = [delta_chord(curve, field, delta, float(u)) for u in us]

    p_minus = np.array([rec.p_minus for rec in recs])
    p_plus = np.array([rec.p_plus for rec in recs])
    mids = np.array([rec.midpoint for rec in recs])
    chord_vec = p_plus - p_minus
    chord_len = np.hypot(chord_vec[:, 0], chord_vec[:, 1])

    leg_m = np.array(
        [np.hypot(*(rec.p_minus - rec.tangency_point)) for rec in recs]
    )
    leg_p = np.array(
        [np.hypot(*(rec.p_plus - rec.tangency_point)) for rec in recs]
    )
    leg_target = 2.0 * r * math.sin(0.5 * delta)

    mid_dist = np.array([distance_to_curve(curve, m)[0] for m in mids])

    vel = np.roll(mids, -1, axis=0) - np.roll(mids, 1, axis=0)
    vel_norm = np.hypot(vel[:, 0], vel[:, 1])
    chord_norm = np.where(chord_len > 0.0, chord_len, 1.0)
    cross = vel[:, 0] * chord_vec[:, 1] - vel[:, 1] * chord_vec[:, 0]
    parallel_sin = np.abs(cross) / (np.where(vel_norm > 0.0, vel_norm, 1.0) * chord_norm)

    return ZindlerReport(
        delta=delta,
        r=r,
        phi_bar=np.array([rec.phi_bar for rec in recs]),
        half_spread=np.array([rec.half_spread for rec in recs]),
        exit_angles=np.array([rec.exit_angle for rec in recs]),
        p_minus=p_minus,
        p_plus=p_plus,
        midpoints=mids,
        chord_lengths=chord_len,
        mid_distances=mid_dist,
        chord_length_dev=np.abs(chord_len - 2.0 * r * math.sin(delta)),
        tangency_dev=np.maximum(np.abs(leg_m - leg_target), np.abs(leg_p - leg_target)),
        mid_distance_dev=np.abs(mid_dist - abs(r * math.cos(delta))),
        parallel_sin=parallel_sin,
    )


@dataclass(frozen=True)
class InvarianceReport:
    max_dist_to_gamma: float
    max_reflection_gap: float  # |center_map(P-) - P+|


def gamma_invariance_check(
    curve: PlaneCurve, field: FieldParams, delta: float, grid: int = 128
) -> InvarianceReport:
    """Map the entering-arc centers and measure invariance of their curve.

    The distance of each image to the center curve is bracketed by the
    nearest polyline vertex and then refined against the smooth chord
    family, so a genuinely invariant curve reports solver-level noise
    rather than polyline sagitta.
    """
    check = gutkin_residual(curve, field, delta, grid)
    us = check.entry_params
    du = TWO_PI / grid
    max_dist = 0.0
    max_gap = 0.0
    for u in us:
        rec = delta_chord(curve, field, delta, float(u))
        img = center_map(curve, field, rec.p_minus)
        gaps = np.hypot(check.gamma[:, 0] - img[0], check.gamma[:, 1] - img[1])
        i = int(np.argmin(gaps))

        def dist2(uu):
            p = delta_chord(curve, field, delta, float(uu % TWO_PI)).p_minus
            return float((p[0] - img[0]) ** 2 + (p[1] - img[1]) ** 2)

        res = minimize_scalar(
            dist2,
            bounds=(us[i] - du, us[i] + du),
            method="bounded",
            options={"xatol": 1e-10},
        )
        max_dist = max(max_dist, math.sqrt(max(res.fun, 0.0)))
        max_gap = max(max_gap, float(np.hypot(*(img - rec.p_plus))))
    return InvarianceReport(max_dist_to_gamma=max_dist, max_reflection_gap=max_gap)


# ---------------------------------------------------------------------------
# experimental fixed-point refinement of the chord identity


@dataclass(frozen=True)
class RefinementResult:
    construction: GutkinConstruction
    converged: bool
    iterations: int
    residual_history: list


def refine_gutkin_curve(
    construction: GutkinConstruction,
    n_modes: int = 8,
    grid: int = 256,
    damping: float = 0.5,
    max_iter: int = 200,
    tol: float = 1e-10,
) -> RefinementResult:
    """Best-effort fixed-point refinement of the chord identity (experimental).

    A curvature-radius mode m shifts the residual's (m+1)-frequency by
    i (S+ - S-) e^{-i(d0+delta)} / (2 sin(delta+d0)) per unit amplitude,
    with S+- = 2 sin((m+-1) d0)/(m+-1); inverting this linear response
    per mode, with damping, gives the fixed-point step.  Modes in the
    kernel of the response (the Gutkin modes, S+ = S-) stay untouched:
    they parameterize the solution family.  Convergence is not
    guaranteed; failure is reported via the ``converged`` flag.
    """
    curve = construction.curve
    field = construction.field
    delta = construction.delta
    d0 = construction.half_angle
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        recs = [
            delta_chord(curve, field, delta, float(u))
            for u in np.linspace(0.0, TWO_PI, grid, endpoint=False)
        ]
        res = np.empty(grid, dtype=complex)
        for i, rec in enumerate(recs):
            lhs = complex(
                curve.chord_primitive(rec.phi_bar + rec.half_spread)
            ) - complex(curve.chord_primitive(rec.phi_bar - rec.half_spread))
            rhs = (
                (2.0 / field.beta)
                * math.sin(delta + rec.half_spread)
                * cmath.exp(1j * rec.phi_bar)
            )
            res[i] = lhs - rhs
        history.append(float(np.max(np.abs(res))))
        if history[-1] < tol:
            converged = True
            break
        phase = np.exp(-1j * np.array([rec.phi_bar for rec in recs]))
        cos_new = list(curve.cos_coeffs)
        sin_new = list(curve.sin_coeffs)
        while len(cos_new) < n_modes:
            cos_new.append(0.0)
            sin_new.append(0.0)
        for m in range(2, n_modes + 1):
            s_hi = 2.0 * math.sin((m + 1) * d0) / (m + 1)
            s_lo = 2.0 * math.sin((m - 1) * d0) / (m - 1)
            if abs(s_hi - s_lo) < 1e-6:
                continue  # (near-)kernel mode: leave the family parameter alone
            proj = np.mean(res * phase ** (m + 1))
            inferred = (
                -2j
                * math.sin(delta + d0)
                * cmath.exp(1j * (d0 + delta))
                * proj
                / (s_hi - s_lo)
            )
            cos_new[m - 1] -= damping * 2.0 * inferred.real
            sin_new[m - 1] += damping * 2.0 * inferred.imag
        try:
            curve = curve_from_rho(curve.c0, cos_new, sin_new)
        except Exception:
            break
    refined = GutkinConstruction(
        curve=curve,
        field=field,
        mode=construction.mode,
        delta=delta,
        half_angle=d0,
        epsilon=construction.epsilon,
        admissibility=check_strong_field(curve, field),
    )
    return RefinementResult(
        construction=refined,
        converged=converged,
        iterations=it,
        residual_history=history,
    )
