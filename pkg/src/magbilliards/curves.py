"""Closed plane curves, Frenet frames, parallel (offset) curves.

All curves are parameterized counterclockwise on [0, 2*pi).  The complex
structure J is the rotation by +pi/2, so the unit normal n = J*tangent
points into the bounded domain; positive offsets t move inward and the
offset curve gamma_t(u) = gamma(u) + t*n(u).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from shapely.geometry import LinearRing

from .errors import (
    FocalPointCrossed,
    NonConvexRepresentation,
    NotClosed,
    OffsetTooLarge,
)

TWO_PI = 2.0 * math.pi

#: default dense grid for scans and polylines
GRID_N = 1024
#: grid used by intersection bracketing and the self-intersection sweep
SWEEP_N = 2048


def rot90(v: np.ndarray) -> np.ndarray:
    """Rotation by +pi/2 applied to vectors with last axis (x, y)."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def rotate(v: np.ndarray, angle: float) -> np.ndarray:
    """Counterclockwise rotation of a 2-vector by ``angle``."""
    c, s = math.cos(angle), math.sin(angle)
    v = np.asarray(v, dtype=float)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


@dataclass(frozen=True)
class FieldParams:
    """Constant magnetic field: magnitude ``beta``, Larmor radius ``r = 1/beta``."""

    beta: float

    def __post_init__(self):
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def r(self) -> float:
        return 1.0 / self.beta


@dataclass(frozen=True)
class FrameSample:
    """Point, unit tangent, inward unit normal and signed curvature at u."""

    u: float
    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    curvature: float


class PlaneCurve:
    """Base class: closed counterclockwise C^2 curve on [0, 2*pi)."""

    def __init__(self):
        self._grid_cache: dict[int, np.ndarray] = {}
        self._kmax: float | None = None
        self._diameter: float | None = None

    # subclasses implement point / tangent_raw / curvature (array-safe)

    def point(self, u):
        raise NotImplementedError

    def tangent(self, u):
        """Unit tangent; array-safe."""
        raise NotImplementedError

    def curvature(self, u):
        """Signed curvature, positive for this convex ccw orientation."""
        raise NotImplementedError

    def tangent_angle(self, u):
        """Angle of the unit tangent against the x-axis (wrapped by atan2)."""
        t = self.tangent(u)
        return np.arctan2(t[..., 1], t[..., 0])

    def normal(self, u):
        return rot90(self.tangent(u))

    # -- cached helpers ----------------------------------------------------

    def grid(self, n: int = SWEEP_N) -> np.ndarray:
        """Positions on the uniform parameter grid of size n (cached)."""
        if n not in self._grid_cache:
            u = np.linspace(0.0, TWO_PI, n, endpoint=False)
            self._grid_cache[n] = np.ascontiguousarray(self.point(u))
        return self._grid_cache[n]

    def max_abs_curvature(self) -> float:
        if self._kmax is None:
            self._kmax = _max_abs_curvature_scan(self)
        return self._kmax

    def diameter(self) -> float:
        """Bounding-box diagonal; used only as a length scale for tolerances."""
        if self._diameter is None:
            pts = self.grid(GRID_N)
            span = pts.max(axis=0) - pts.min(axis=0)
            self._diameter = float(np.hypot(span[0], span[1]))
        return self._diameter

    def to_config(self) -> dict:
        raise NotImplementedError


class Circle(PlaneCurve):
    """Circle of given radius, parameterized by the central angle."""

    def __init__(self, radius: float, center=(0.0, 0.0)):
        super().__init__()
        if not radius > 0.0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)

    def point(self, u):
        u = np.asarray(u, dtype=float)
        return np.stack(
            (
                self.center[0] + self.radius * np.cos(u),
                self.center[1] + self.radius * np.sin(u),
            ),
            axis=-1,
        )

    def tangent(self, u):
        u = np.asarray(u, dtype=float)
        return np.stack((-np.sin(u), np.cos(u)), axis=-1)

    def curvature(self, u):
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(1.0 / self.radius, u.shape).copy() if u.ndim else 1.0 / self.radius

    def tangent_angle(self, u):
        return np.asarray(u, dtype=float) + 0.5 * math.pi

    def to_config(self) -> dict:
        return {
            "type": "circle",
            "radius": self.radius,
            "center": [float(self.center[0]), float(self.center[1])],
        }


class Ellipse(PlaneCurve):
    """Axis-aligned ellipse x = a cos u, y = b sin u with a >= b > 0."""

    def __init__(self, a: float, b: float):
        super().__init__()
        if not (a >= b > 0.0):
            raise ValueError(f"need a >= b > 0, got a={a}, b={b}")
        self.a = float(a)
        self.b = float(b)

    def point(self, u):
        u = np.asarray(u, dtype=float)
        return np.stack((self.a * np.cos(u), self.b * np.sin(u)), axis=-1)

    def _speed(self, u):
        return np.hypot(self.a * np.sin(u), self.b * np.cos(u))

    def tangent(self, u):
        u = np.asarray(u, dtype=float)
        sp = self._speed(u)
        return np.stack((-self.a * np.sin(u) / sp, self.b * np.cos(u) / sp), axis=-1)

    def curvature(self, u):
        u = np.asarray(u, dtype=float)
        return self.a * self.b / self._speed(u) ** 3

    def to_config(self) -> dict:
        return {"type": "ellipse", "a": self.a, "b": self.b}


class FourierRho(PlaneCurve):
    """Convex curve given by the curvature radius rho in the tangent angle.

    rho(phi) = c0 + sum_m (cos_coeffs[m-1] cos(m phi) + sin_coeffs[m-1] sin(m phi)),
    and the position is the primitive of rho(phi) e^{i phi}, translated so the
    parameter-average of the position is the origin.  Closure requires the
    first harmonic of rho to vanish.
    """

    #: relative tolerance on the first harmonic for the closure test
    CLOSURE_TOL = 1e-12

    def __init__(self, c0: float, cos_coeffs=(), sin_coeffs=()):
        super().__init__()
        if not c0 > 0.0:
            raise NonConvexRepresentation("mean curvature radius must be positive")
        self.c0 = float(c0)
        self.cos_coeffs = np.asarray(cos_coeffs, dtype=float)
        self.sin_coeffs = np.asarray(sin_coeffs, dtype=float)
        n = max(len(self.cos_coeffs), len(self.sin_coeffs))
        self.cos_coeffs = np.pad(self.cos_coeffs, (0, n - len(self.cos_coeffs)))
        self.sin_coeffs = np.pad(self.sin_coeffs, (0, n - len(self.sin_coeffs)))

        scale = self.c0 + np.abs(self.cos_coeffs).sum() + np.abs(self.sin_coeffs).sum()
        if n >= 1 and (
            abs(self.cos_coeffs[0]) > self.CLOSURE_TOL * scale
            or abs(self.sin_coeffs[0]) > self.CLOSURE_TOL * scale
        ):
            raise NotClosed(
                "first Fourier harmonic of the curvature radius must vanish "
                f"(got cos: {self.cos_coeffs[0]}, sin: {self.sin_coeffs[0]})"
            )

        phi = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
        rho_min = float(self.rho(phi).min())
        if rho_min <= 0.0:
            raise NonConvexRepresentation(
                f"curvature radius must stay positive (min {rho_min})"
            )

        # primitive of rho(xi) e^{i xi}: one term per mode m >= 2
        m = np.arange(2, n + 1, dtype=float)
        a = self.cos_coeffs[1:] if n >= 2 else np.zeros(0)
        b = self.sin_coeffs[1:] if n >= 2 else np.zeros(0)
        self._m = m
        self._p_hi = -(1j * a + b) / (2.0 * (m + 1.0))  # factor of e^{i(m+1)phi}
        self._p_lo = (1j * a - b) / (2.0 * (m - 1.0))   # factor of e^{-i(m-1)phi}

    def rho(self, phi):
        phi = np.asarray(phi, dtype=float)
        out = np.full_like(phi, self.c0, dtype=float)
        for k, (ac, as_) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            if ac != 0.0:
                out = out + ac * np.cos(k * phi)
            if as_ != 0.0:
                out = out + as_ * np.sin(k * phi)
        return out

    def chord_primitive(self, phi):
        """Complex primitive of rho(xi) e^{i xi}; its mean over a period is 0."""
        phi = np.asarray(phi, dtype=float)
        out = -1j * self.c0 * np.exp(1j * phi)
        if self._m.size:
            e_hi = np.exp(1j * np.multiply.outer(phi, self._m + 1.0))
            e_lo = np.exp(-1j * np.multiply.outer(phi, self._m - 1.0))
            out = out + e_hi @ self._p_hi + e_lo @ self._p_lo
        return out

    def point(self, u):
        z = self.chord_primitive(u)
        return np.stack((z.real, z.imag), axis=-1)

    def tangent(self, u):
        u = np.asarray(u, dtype=float)
        return np.stack((np.cos(u), np.sin(u)), axis=-1)

    def tangent_angle(self, u):
        return np.asarray(u, dtype=float)

    def curvature(self, u):
        rho = self.rho(u)
        if np.any(rho <= 0.0):
            raise NonConvexRepresentation("curvature radius non-positive at request")
        return 1.0 / rho

    def perimeter(self) -> float:
        return TWO_PI * self.c0

    def to_config(self) -> dict:
        return {
            "type": "fourier_rho",
            "c0": self.c0,
            "cos": self.cos_coeffs.tolist(),
            "sin": self.sin_coeffs.tolist(),
        }


# ---------------------------------------------------------------------------
# operations


def eval_frame(curve: PlaneCurve, u: float) -> FrameSample:
    """Position, unit tangent, inward unit normal and signed curvature at u."""
    t = np.asarray(curve.tangent(u), dtype=float)
    return FrameSample(
        u=float(u),
        point=np.asarray(curve.point(u), dtype=float),
        tangent=t,
        normal=rot90(t),
        curvature=float(curve.curvature(u)),
    )


def offset_point(curve: PlaneCurve, u, t: float):
    """Point gamma(u) + t*n(u) of the parallel curve at signed distance t."""
    if abs(t) >= 1.0 / curve.max_abs_curvature():
        raise OffsetTooLarge(
            f"|t| = {abs(t)} reaches the focal distance "
            f"{1.0 / curve.max_abs_curvature()}"
        )
    return _offset_point_raw(curve, u, t)


def _offset_point_raw(curve: PlaneCurve, u, t: float):
    return np.asarray(curve.point(u)) + t * curve.normal(u)


def offset_curvature(curve: PlaneCurve, u, t: float):
    """Curvature k/(1 - t*k) of the parallel curve gamma_t at parameter u."""
    k = curve.curvature(u)
    denom = 1.0 - t * k
    if np.any(denom <= 0.0):
        raise FocalPointCrossed(f"1 - t*k = {denom} is not positive")
    return k / denom


def _max_abs_curvature_scan(curve: PlaneCurve, n: int = GRID_N) -> float:
    """Grid scan of |k| refined by bracketed local maximization."""
    u = np.linspace(0.0, TWO_PI, n, endpoint=False)
    k = np.abs(np.asarray(curve.curvature(u), dtype=float))
    i = int(np.argmax(k))
    du = TWO_PI / n
    lo, hi = u[i] - du, u[i] + du
    res = minimize_scalar(
        lambda uu: -abs(float(curve.curvature(uu % TWO_PI))),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return max(float(k[i]), -float(res.fun))


def max_abs_curvature(curve: PlaneCurve) -> float:
    return curve.max_abs_curvature()


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of the strong-field check for a (curve, field) pair."""

    beta: float
    r: float
    max_curvature: float
    r_times_kmax: float
    curvature_ok: bool
    offsets_simple: bool
    failed_offsets: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return self.curvature_ok and self.offsets_simple


def check_strong_field(
    curve: PlaneCurve, fieldp: FieldParams, sweep_n: int = SWEEP_N
) -> AdmissibilityReport:
    """Strong-field admissibility: r*max|k| < 1/2 plus simple offsets.

    The offsets gamma_t for a sample of |t| <= 2r are polylined on a
    ``sweep_n`` grid and checked for self-intersection.  Report-valued:
    never raises for inadmissible data.
    """
    kmax = curve.max_abs_curvature()
    r = fieldp.r
    product = r * kmax
    curvature_ok = bool(product < 0.5)

    u = np.linspace(0.0, TWO_PI, sweep_n, endpoint=False)
    pts = curve.grid(sweep_n)
    normals = rot90(curve.tangent(u))
    failed = []
    for frac in (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0):
        t = frac * r
        poly = pts + t * normals
        try:
            simple = LinearRing(poly).is_simple
        except Exception:
            simple = False
        if not simple:
            failed.append(t)
    return AdmissibilityReport(
        beta=fieldp.beta,
        r=r,
        max_curvature=kmax,
        r_times_kmax=product,
        curvature_ok=curvature_ok,
        offsets_simple=not failed,
        failed_offsets=tuple(failed),
    )


def curve_from_rho(c0: float, cos_coeffs=(), sin_coeffs=()) -> FourierRho:
    """Curve from curvature-radius Fourier data; raises if open or non-convex."""
    return FourierRho(c0, cos_coeffs, sin_coeffs)


# ---------------------------------------------------------------------------
# JSON configuration


def curve_from_config(cfg: dict) -> PlaneCurve:
    """Build a curve from the configuration object's ``curve`` entry."""
    if not isinstance(cfg, dict) or "type" not in cfg:
        raise ValueError("curve config must be an object with a 'type' field")
    kind = cfg["type"]
    if kind == "circle":
        return Circle(float(cfg["radius"]), cfg.get("center", (0.0, 0.0)))
    if kind == "ellipse":
        return Ellipse(float(cfg["a"]), float(cfg["b"]))
    if kind == "fourier_rho":
        return FourierRho(float(cfg["c0"]), cfg.get("cos", ()), cfg.get("sin", ()))
    raise ValueError(f"unknown curve type {kind!r}")


def distance_to_curve(curve: PlaneCurve, p, grid_n: int = SWEEP_N):
    """Global distance from point p to the curve and the foot parameter."""
    p = np.asarray(p, dtype=float)
    pts = curve.grid(grid_n)
    d2 = (pts[:, 0] - p[0]) ** 2 + (pts[:, 1] - p[1]) ** 2
    i = int(np.argmin(d2))
    du = TWO_PI / grid_n
    u0 = i * du

    def f(uu):
        q = curve.point(uu % TWO_PI)
        return float((q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2)

    res = minimize_scalar(
        f, bounds=(u0 - du, u0 + du), method="bounded", options={"xatol": 1e-12}
    )
    u_star = float(res.x % TWO_PI)
    return math.sqrt(max(res.fun, 0.0)), u_star
