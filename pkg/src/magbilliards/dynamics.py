"""Larmor-arc dynamics: the boundary reflection map and its dual center map.

A unit-speed charge in a constant field of magnitude beta moves along
counterclockwise circles of radius r = 1/beta.  Between collisions the
motion is p(tau) = c + R_tau (p0 - c) around the Larmor center c; at the
boundary the velocity reflects optically.  The dual description acts on
Larmor centers in the annulus bounded by the two offset curves at
distance +-r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .curves import TWO_PI, SWEEP_N, FieldParams, PlaneCurve, distance_to_curve, rot90, rotate
from .errors import GrazingIntersection, NoExitFound, NotInAnnulus, StencilOutOfDomain

#: an exit crossing with |sin(angle)| below this is treated as tangential
GRAZING_SIN = 1e-8
#: parameter tolerance used to recognize the entry point among circle roots
ENTRY_PARAM_TOL = 1e-8


@dataclass(frozen=True)
class BoundaryState:
    """Footpoint parameter u on the boundary and velocity angle theta.

    theta in (0, pi) measures the velocity against the unit tangent;
    inward vectors have positive normal component sin(theta).
    """

    u: float
    theta: float


@dataclass(frozen=True)
class ArcStep:
    """One Larmor arc from an entry state to the reflected exit state."""

    entry: BoundaryState
    exit: BoundaryState
    center: np.ndarray
    swept_angle: float
    arc_length: float
    entry_point: np.ndarray
    exit_point: np.ndarray


def larmor_center(x, v, r: float) -> np.ndarray:
    """Center x + r*Jv of the Larmor circle through x with velocity v."""
    x = np.asarray(x, dtype=float)
    return x + r * rot90(np.asarray(v, dtype=float))


def reflect(v, n) -> np.ndarray:
    """Optical reflection v - 2<n, v> n for unit v and unit normal n."""
    v = np.asarray(v, dtype=float)
    n = np.asarray(n, dtype=float)
    return v - 2.0 * float(np.dot(n, v)) * n


def boundary_velocity(curve: PlaneCurve, state: BoundaryState) -> np.ndarray:
    """Unit velocity cos(theta)*tangent + sin(theta)*normal at the footpoint."""
    t = curve.tangent(state.u)
    return math.cos(state.theta) * t + math.sin(state.theta) * rot90(t)


def circle_curve_intersections(
    curve: PlaneCurve, center, r: float, grid_n: int = SWEEP_N
) -> list[float]:
    """Parameters u with |gamma(u) - center| = r.

    Sign changes of the squared-distance residual on a uniform grid are
    refined by Brent's method to 1e-13 in the parameter.
    """
    center = np.asarray(center, dtype=float)
    pts = curve.grid(grid_n)
    g = (pts[:, 0] - center[0]) ** 2 + (pts[:, 1] - center[1]) ** 2 - r * r
    gn = np.roll(g, -1)
    idx = np.nonzero((g < 0.0) != (gn < 0.0))[0]
    du = TWO_PI / grid_n

    def f(uu):
        q = curve.point(uu)
        return (q[0] - center[0]) ** 2 + (q[1] - center[1]) ** 2 - r * r

    # endpoint values re-evaluated with the same callable brentq sees, so a
    # cached-vs-fresh rounding flip at a marginal crossing cannot break it
    def f_wrapped(uu):
        return f(uu % TWO_PI)

    roots = []
    for i in idx:
        lo, hi = i * du, (i + 1) * du
        flo, fhi = f_wrapped(lo), f_wrapped(hi)
        if flo == 0.0:
            roots.append(lo % TWO_PI)
            continue
        if fhi == 0.0:
            roots.append(hi % TWO_PI)
            continue
        if flo * fhi > 0.0:
            continue
        root = brentq(f_wrapped, lo, hi, xtol=1e-13, rtol=1e-15)
        roots.append(root % TWO_PI)
    for i in np.nonzero(g == 0.0)[0]:
        roots.append(i * du)
    return sorted(set(roots))


def _ccw_angle(frm: np.ndarray, to: np.ndarray) -> float:
    """Counterclockwise angle in [0, 2*pi) from vector ``frm`` to ``to``."""
    a = math.atan2(to[1], to[0]) - math.atan2(frm[1], frm[0])
    return a % TWO_PI


def flow_step(curve: PlaneCurve, field: FieldParams, state: BoundaryState) -> ArcStep:
    """Follow one counterclockwise Larmor arc to its first boundary crossing.

    Returns the arc summary with the *reflected* state at the exit point.
    Raises NoExitFound when no further crossing exists and
    GrazingIntersection when the crossing is near-tangential.
    """
    if not 0.0 < state.theta < math.pi:
        raise GrazingIntersection(f"entry angle {state.theta} is not interior to (0, pi)")
    r = field.r
    x = np.asarray(curve.point(state.u), dtype=float)
    v = boundary_velocity(curve, state)
    center = larmor_center(x, v, r)

    candidates = []
    for u_root in circle_curve_intersections(curve, center, r):
        d = abs(u_root - state.u)
        if min(d, TWO_PI - d) < ENTRY_PARAM_TOL:
            continue
        q = np.asarray(curve.point(u_root), dtype=float)
        alpha = _ccw_angle(x - center, q - center)
        candidates.append((alpha, u_root, q))
    if not candidates:
        raise NoExitFound(
            f"no boundary crossing for the arc from u={state.u}, theta={state.theta}"
        )
    alpha, u_exit, q = min(candidates, key=lambda c: c[0])

    t_exit = curve.tangent(u_exit)
    n_exit = rot90(t_exit)
    w = rot90(q - center) / r  # unit velocity of ccw motion at the crossing
    s_n = float(np.dot(w, n_exit))
    if abs(s_n) < GRAZING_SIN:
        raise GrazingIntersection(f"crossing angle sine {s_n} at u={u_exit}")
    if s_n > 0.0:
        raise NoExitFound(
            f"first crossing at u={u_exit} is inward; admissibility is violated"
        )
    w_ref = reflect(w, n_exit)
    theta_new = math.atan2(float(np.dot(w_ref, n_exit)), float(np.dot(w_ref, t_exit)))
    exit_state = BoundaryState(u=u_exit, theta=theta_new)
    return ArcStep(
        entry=state,
        exit=exit_state,
        center=center,
        swept_angle=alpha,
        arc_length=r * alpha,
        entry_point=x,
        exit_point=q,
    )


def boundary_map(curve: PlaneCurve, field: FieldParams, state: BoundaryState) -> BoundaryState:
    """Billiard map on boundary states: one arc plus optical reflection."""
    return flow_step(curve, field, state).exit


def center_map(curve: PlaneCurve, field: FieldParams, y) -> np.ndarray:
    """Map a Larmor center to the center of the reflected arc.

    The circle of radius r about y must meet the boundary; the outgoing
    crossing Q and exit angle eps determine the image
    Q + r * R_{pi/2 + eps} tangent(Q).  Centers on the annulus boundary
    (tangent circles) are fixed points and are returned verbatim.
    """
    y = np.asarray(y, dtype=float)
    r = field.r
    boundary_tol = 1e-10 * max(1.0, r, curve.diameter())

    dist, _ = distance_to_curve(curve, y)
    if abs(dist - r) < boundary_tol:
        return y.copy()

    roots = circle_curve_intersections(curve, y, r)
    if not roots:
        raise NotInAnnulus(
            f"circle of radius {r} about {tuple(y)} misses the boundary "
            f"(distance {dist})"
        )

    exits = []
    for u_root in roots:
        q = np.asarray(curve.point(u_root), dtype=float)
        n_q = rot90(curve.tangent(u_root))
        s_n = float(np.dot(rot90(q - y) / r, n_q))
        if abs(s_n) < GRAZING_SIN:
            raise GrazingIntersection(f"tangential crossing at u={u_root}")
        if s_n < 0.0:
            exits.append((u_root, q))
    if len(exits) != 1:
        raise NoExitFound(
            f"expected exactly one outgoing crossing, found {len(exits)}"
        )
    u_exit, q = exits[0]

    t_q = curve.tangent(u_exit)
    n_q = rot90(t_q)
    radial = (y - q) / r
    psi = math.atan2(float(np.dot(radial, n_q)), float(np.dot(radial, t_q)))
    eps = 0.5 * math.pi - psi
    if not 0.0 < eps < math.pi:
        raise GrazingIntersection(f"exit angle {eps} outside (0, pi)")
    return q + r * rotate(t_q, 0.5 * math.pi + eps)


def trajectory(curve: PlaneCurve, field: FieldParams, start, n_steps: int):
    """Iterate the boundary map or the center map, start state included.

    ``start`` may be a BoundaryState (returns a list of states) or a point
    (returns an (n_steps + 1, 2) array of centers).  Step errors are
    re-raised with the failing index attached as ``step_index``.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if isinstance(start, BoundaryState):
        states = [start]
        for i in range(n_steps):
            try:
                states.append(boundary_map(curve, field, states[-1]))
            except Exception as exc:
                exc.step_index = i
                raise
        return states
    y = np.asarray(start, dtype=float)
    out = np.empty((n_steps + 1, 2))
    out[0] = y
    for i in range(n_steps):
        try:
            out[i + 1] = center_map(curve, field, out[i])
        except Exception as exc:
            exc.step_index = i
            raise
    return out


def circle_table_invariant(x, v, beta: float) -> float:
    """Conserved quantity of the circular table centered at the origin.

    Equals |x|^2 + (2/beta)(v1 x2 - v2 x1), i.e. the squared distance of
    the Larmor center from the origin minus r^2.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(x[0] ** 2 + x[1] ** 2 + (2.0 / beta) * (v[0] * x[1] - v[1] * x[0]))


def state_invariant(curve: PlaneCurve, field: FieldParams, state: BoundaryState) -> float:
    """Circle-table invariant evaluated on a boundary state."""
    x = curve.point(state.u)
    v = boundary_velocity(curve, state)
    return circle_table_invariant(x, v, field.beta)


def center_map_jacobian(
    curve: PlaneCurve, field: FieldParams, y, h: float = 1e-6
) -> float:
    """Central-difference Jacobian determinant of the center map at y."""
    if not 1e-7 <= h <= 1e-5:
        raise ValueError("step h must lie in [1e-7, 1e-5]")
    y = np.asarray(y, dtype=float)
    cols = []
    for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        try:
            fp = center_map(curve, field, y + h * e)
            fm = center_map(curve, field, y - h * e)
        except NotInAnnulus as exc:
            raise StencilOutOfDomain(str(exc)) from exc
        cols.append((fp - fm) / (2.0 * h))
    return float(cols[0][0] * cols[1][1] - cols[0][1] * cols[1][0])
