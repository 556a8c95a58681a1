"""Polynomial-integral machinery for strong-field magnetic billiards.

Centerpiece quantities for a candidate invariant polynomial F:

* the curvature form ``H(F) = Fxx Fy^2 - 2 Fxy Fx Fy + Fyy Fx^2`` whose
  ratio to |grad F|^3 is the signed curvature of a level set,
* the constancy residual of ``H(F) +- beta |grad F|^3`` along the offset
  curves at distance +-r, a necessary condition for invariance,
* the cubic Taylor coefficient of the reflection-invariance defect,
  compared analytic vs numeric,
* the closed-form degree-8 polynomial vanishing on both parallel curves
  of an ellipse, together with its four complex singular points,
* the classification of a curve's points on the line at infinity,
* the circle-restriction trigonometric-degree test, the associated
  three-term Fourier recursion, and a global least-squares polynomial fit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq

from .curves import TWO_PI, FieldParams, PlaneCurve, offset_point
from .errors import (
    ConcentricDegenerate,
    DegenerateLeadingForm,
    IllConditionedFit,
    NotApplicable,
    RootsOffUnitCircle,
    SingularPoint,
)
from .polynomials import BivariatePolynomial

_GRAD_FLOOR = 1e-12


def _partials(F: BivariatePolynomial):
    fx, fy = F.gradient()
    return fx, fy


def _gradient_floor(F: BivariatePolynomial, x, y) -> float:
    mag = np.maximum(1.0, np.hypot(np.abs(x), np.abs(y)))
    return _GRAD_FLOOR * (1.0 + F.coeff_max) * mag ** max(F.degree - 1, 0)


def curvature_form(F: BivariatePolynomial, p):
    """H(F) = Fxx Fy^2 - 2 Fxy Fx Fy + Fyy Fx^2 evaluated at p.

    Exact polynomial differentiation; p may be one point or an (n, 2)
    array.
    """
    p = np.asarray(p)
    x, y = p[..., 0], p[..., 1]
    fx, fy = F.gradient()
    fxx, fxy = fx.gradient()
    fyy = fy.diff_y()
    vx, vy = fx(x, y), fy(x, y)
    out = fxx(x, y) * vy**2 - 2.0 * fxy(x, y) * vx * vy + fyy(x, y) * vx**2
    return out if out.ndim else float(out)


def implicit_curvature(F: BivariatePolynomial, p) -> float:
    """Signed curvature H(F)/|grad F|^3 of the level set of F through p."""
    p = np.asarray(p, dtype=float)
    fx, fy = F.gradient()
    gx, gy = float(fx(p[0], p[1])), float(fy(p[0], p[1]))
    g = math.hypot(gx, gy)
    if g <= _gradient_floor(F, p[0], p[1]):
        raise SingularPoint(f"gradient norm {g} vanishes at {tuple(p)}")
    return float(curvature_form(F, p)) / g**3


@dataclass(frozen=True)
class ConstancyReport:
    """Statistics of H(F) + sign*beta*|grad F|^3 over offset samples."""

    sign: int
    mean: float
    max_abs_dev: float
    #: min over samples of | H/|grad F|^3 + sign*beta |; a zero margin
    #: would make the constant zero, which the curvature bound forbids
    curvature_margin: float

    @property
    def relative_dev(self) -> float:
        return self.max_abs_dev / abs(self.mean) if self.mean else math.inf


def constancy_residual(
    F: BivariatePolynomial, samples, beta: float, sign: int
) -> ConstancyReport:
    """Evaluate H(F) + sign*beta*|grad F|^3 on offset samples.

    A polynomial invariant forces this combination to be constant along
    each offset curve; the report carries the mean, the maximal absolute
    deviation from it, and the margin keeping the constant away from 0.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    pts = np.asarray(samples, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    fx, fy = F.gradient()
    gx, gy = fx(x, y), fy(x, y)
    g = np.hypot(gx, gy)
    floor = _gradient_floor(F, x, y)
    if np.any(g <= floor):
        i = int(np.argmin(g - floor))
        raise SingularPoint(f"gradient vanishes at sample {i}: {(x[i], y[i])}")
    h = curvature_form(F, pts)
    vals = h + sign * beta * g**3
    mean = float(np.mean(vals))
    margin = float(np.min(np.abs(h / g**3 + sign * beta)))
    return ConstancyReport(
        sign=sign,
        mean=mean,
        max_abs_dev=float(np.max(np.abs(vals - mean))),
        curvature_margin=margin,
    )


@dataclass(frozen=True)
class CubicDefectReport:
    """Third-order coefficient of the reflection defect at one offset point."""

    analytic: float
    numeric: float
    #: dimensionless size of the extracted even-order coefficient; the
    #: defect is odd in the crossing angle, so this must vanish
    even_residual: float
    #: sum of the absolute term magnitudes of the closed form; values far
    #: below it are zero up to cancellation, whatever their sign
    term_scale: float

    @property
    def relative_error(self) -> float:
        scale = max(abs(self.analytic), abs(self.numeric), 1e-9 * self.term_scale)
        return abs(self.analytic - self.numeric) / scale if scale else 0.0


def cubic_defect(
    F: BivariatePolynomial,
    curve: PlaneCurve,
    field: FieldParams,
    u: float,
    sign: int,
) -> CubicDefectReport:
    """Analytic vs numeric cubic coefficient of the invariance defect.

    At the inner-offset point P' of boundary parameter u, the difference
    of F at the two reflected Larmor centers is an odd function of the
    crossing angle.  Its cubic Taylor coefficient has the closed form

        (Fxxx Fy^3 - 3 Fxxy Fy^2 Fx + 3 Fxyy Fy Fx^2 - Fyyy Fx^3)
        + sign * 3 beta |grad F| (Fxx Fx Fy + Fxy (Fy^2 - Fx^2) - Fyy Fx Fy)

    and is recovered numerically from odd finite differences of the
    defect with one Richardson step.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    beta = field.beta
    r = field.r
    p = np.asarray(offset_point(curve, u, r), dtype=float)
    x0, y0 = float(p[0]), float(p[1])

    fx, fy = F.gradient()
    fxx, fxy = fx.gradient()
    fyy = fy.diff_y()
    fxxx, fxxy = fxx.gradient()
    fxyy = fxy.diff_y()
    fyyy = fyy.diff_y()

    vx, vy = float(fx(x0, y0)), float(fy(x0, y0))
    g = math.hypot(vx, vy)
    if g <= _gradient_floor(F, x0, y0):
        raise SingularPoint(f"gradient vanishes at offset point {(x0, y0)}")

    cubic = (
        fxxx(x0, y0) * vy**3
        - 3.0 * fxxy(x0, y0) * vy**2 * vx
        + 3.0 * fxyy(x0, y0) * vy * vx**2
        - fyyy(x0, y0) * vx**3
    )
    quad = (
        fxx(x0, y0) * vx * vy
        + fxy(x0, y0) * (vy**2 - vx**2)
        - fyy(x0, y0) * vx * vy
    )
    analytic = float(cubic + sign * 3.0 * beta * g * quad)
    term_scale = float(
        abs(fxxx(x0, y0) * vy**3)
        + 3.0 * abs(fxxy(x0, y0) * vy**2 * vx)
        + 3.0 * abs(fxyy(x0, y0) * vy * vx**2)
        + abs(fyyy(x0, y0) * vx**3)
        + 3.0
        * beta
        * g
        * (
            abs(fxx(x0, y0) * vx * vy)
            + abs(fxy(x0, y0)) * (vy**2 + vx**2)
            + abs(fyy(x0, y0) * vx * vy)
        )
    )

    def defect(eps: float) -> float:
        ce, se = math.cos(eps), math.sin(eps)
        ax = x0 + sign * r * (vx * (1.0 - ce) + vy * se) / g
        ay = y0 + sign * r * (vy * (1.0 - ce) - vx * se) / g
        bx = x0 + sign * r * (vx * (1.0 - ce) - vy * se) / g
        by = y0 + sign * r * (vy * (1.0 - ce) + vx * se) / g
        return float(F(ax, ay)) - float(F(bx, by))

    # the defect is ~ c3 * eps^3, so too small a step drowns in the
    # cancellation noise of the two F evaluations; 5e-2*r keeps both the
    # truncation and the rounding error below 1e-5 relative
    h = 5e-2 * r

    def third(hh: float) -> float:
        return (defect(2.0 * hh) - 2.0 * defect(hh)) / (6.0 * hh**3)

    c3 = (4.0 * third(h) - third(2.0 * h)) / 3.0
    numeric = sign * 3.0 * beta**3 * g**3 * c3

    dp, dm = defect(h), defect(-h)
    even_residual = abs(dp + dm) / (abs(dp) + abs(dm) + 1e-300)
    return CubicDefectReport(
        analytic=analytic,
        numeric=numeric,
        even_residual=even_residual,
        term_scale=term_scale,
    )


@dataclass(frozen=True)
class BoundaryConstancyReport:
    const_minus: float
    const_plus: float
    dev_minus: float
    dev_plus: float


def boundary_constancy(
    F: BivariatePolynomial, curve: PlaneCurve, field: FieldParams, n: int = 512
) -> BoundaryConstancyReport:
    """Means and max deviations of F sampled on the two offset curves."""
    u = np.linspace(0.0, TWO_PI, n, endpoint=False)
    out = []
    for t in (-field.r, +field.r):
        pts = offset_point(curve, u, t)
        vals = F(pts[:, 0], pts[:, 1])
        out.append((float(np.mean(vals)), float(np.max(np.abs(vals - np.mean(vals))))))
    return BoundaryConstancyReport(
        const_minus=out[0][0], const_plus=out[1][0],
        dev_minus=out[0][1], dev_plus=out[1][1],
    )


def normalize_integral(
    F: BivariatePolynomial, c1: float, c2: float
) -> BivariatePolynomial:
    """F^2 - (c1 + c2) F + c1*c2; vanishes wherever F = c1 or F = c2."""
    return F * F - (c1 + c2) * F + BivariatePolynomial.constant(c1 * c2)


# ---------------------------------------------------------------------------
# the ellipse offset polynomial and its singular points


def ellipse_offset_polynomial(a: float, b: float, r: float) -> BivariatePolynomial:
    """Degree-8 polynomial vanishing on both parallel curves of an ellipse.

    Closed form for the offsets at distance r of x^2/a^2 + y^2/b^2 = 1;
    the same irreducible polynomial covers the inner and outer offset.
    """
    if not (a > b > 0.0):
        raise ValueError(f"need a > b > 0, got a={a}, b={b}")
    if not r > 0.0:
        raise ValueError("offset distance r must be positive")
    C = BivariatePolynomial.constant
    x2 = BivariatePolynomial.monomial(2, 0)
    y2 = BivariatePolynomial.monomial(0, 2)
    x2y2 = x2 * y2
    x4, y4 = x2 * x2, y2 * y2
    x6, y6 = x4 * x2, y4 * y2
    a2 = a * a
    a4, a6, a8 = a2 * a2, a2**3, a2**4
    b2 = b * b
    b4, b6, b8 = b2 * b2, b2**3, b2**4
    r2 = r * r
    r4, r6 = r2 * r2, r2**3

    g1 = a8 * (C(b4) + (C(r2) - y2) ** 2 - 2.0 * b2 * (C(r2) + y2))
    g2 = b4 * ((C(r2) - x2) ** 2) * (
        C(b4) - 2.0 * b2 * (C(r2) - x2 + y2) + (x2 + y2 - C(r2)) ** 2
    )
    g3 = -2.0 * a6 * (
        C(b6)
        + ((C(r2) - y2) ** 2) * (C(r2) + x2 - y2)
        - b4 * (C(r2) - 2.0 * x2 + 3.0 * y2)
        - b2 * (C(r4) + 3.0 * (x2y2 - y4) + r2 * (3.0 * x2 + 2.0 * y2))
    )
    g4 = 2.0 * a2 * b2 * (
        -b6 * (C(r2) + x2)
        - ((x2 + y2 - C(r2)) ** 2) * (C(r4) - x2y2 - r2 * (x2 + y2))
        + b4 * (C(r4) - 3.0 * x4 + 3.0 * x2y2 + r2 * (2.0 * x2 + 3.0 * y2))
        + b2 * (
            C(r6)
            - 2.0 * x6
            + x4 * y2
            - 3.0 * x2 * y4
            + r4 * (-4.0 * x2 + 2.0 * y2)
            + r2 * (5.0 * x4 - 3.0 * x2y2 - 3.0 * y4)
        )
    )
    g5 = a4 * (
        C(b8)
        + 2.0 * b6 * (C(r2) + 3.0 * x2 - 2.0 * y2)
        + ((C(r2) - y2) ** 2) * ((x2 + y2 - C(r2)) ** 2)
        - 2.0 * b4 * (
            C(3.0 * r4) - 3.0 * x4 + 5.0 * x2y2 - 3.0 * y4 + 4.0 * r2 * (x2 + y2)
        )
        + 2.0 * b2 * (
            C(r6)
            - 3.0 * x4 * y2
            + x2 * y4
            - 2.0 * y6
            + 2.0 * r4 * (x2 - 2.0 * y2)
            + r2 * (-3.0 * x4 - 3.0 * x2y2 + 5.0 * y4)
        )
    )
    return g1 + g2 + g3 + g4 + g5


@dataclass(frozen=True)
class SingularPointRecord:
    point: tuple  # complex coordinates (x, y)
    is_real: bool
    value: float  # |f| at the point
    grad_norm: float  # |(fx, fy)| at the point


@dataclass(frozen=True)
class SingularityReport:
    points: tuple
    max_relative_value: float
    max_relative_grad: float


def ellipse_offset_singularities(a: float, b: float, r: float) -> SingularityReport:
    """Four singular points of the offset polynomial, with residual checks.

    The points are (0, +-sqrt(b^2-a^2) sqrt(a^2-r^2)/a) and
    (+-sqrt(a^2-b^2) sqrt(b^2-r^2)/b, 0); for a > b the first pair is
    purely imaginary in y.  Verifies f = fx = fy = 0 at all four.
    """
    if math.isclose(a, b, rel_tol=1e-12):
        raise NotApplicable("singular-point formulas collapse for a circle (a = b)")
    f = ellipse_offset_polynomial(a, b, r)
    fx, fy = f.gradient()

    sy = cmath.sqrt(complex(b * b - a * a)) * cmath.sqrt(complex(a * a - r * r)) / a
    sx = cmath.sqrt(complex(a * a - b * b)) * cmath.sqrt(complex(b * b - r * r)) / b
    pts = [(0.0, sy), (0.0, -sy), (sx, 0.0), (-sx, 0.0)]

    # typical magnitudes on the real offsets, for relative tolerances
    u = np.linspace(0.0, TWO_PI, 64, endpoint=False)
    probe = np.stack((a * np.cos(u), b * np.sin(u)), axis=-1)
    grad_typ = float(
        np.max(np.hypot(fx(probe[:, 0], probe[:, 1]), fy(probe[:, 0], probe[:, 1])))
    )
    val_typ = f.coeff_max

    records = []
    for px, py in pts:
        val = abs(complex(f(px, py)))
        gnorm = math.hypot(abs(complex(fx(px, py))), abs(complex(fy(px, py))))
        records.append(
            SingularPointRecord(
                point=(px, py),
                is_real=abs(complex(px).imag) + abs(complex(py).imag) < 1e-12,
                value=val,
                grad_norm=gnorm,
            )
        )
    return SingularityReport(
        points=tuple(records),
        max_relative_value=max(rec.value for rec in records) / val_typ,
        max_relative_grad=max(rec.grad_norm for rec in records) / grad_typ,
    )


# ---------------------------------------------------------------------------
# points at infinity


@dataclass(frozen=True)
class InfinitePoint:
    """A projective point (x : y : 0) of the curve closure."""

    direction: tuple  # complex (x, y), normalized to unit norm
    multiplicity: int
    kind: str  # isotropic | singular | tangency | transversal
    residuals: dict


def _homogeneous_eval(coeffs: np.ndarray, x: complex, y: complex) -> complex:
    """Evaluate sum_i coeffs[i] x^i y^(len-1-i)."""
    d = len(coeffs) - 1
    return sum(coeffs[i] * x**i * y ** (d - i) for i in range(d + 1))


def infinity_classification(
    F: BivariatePolynomial, tol: float = 1e-8
) -> list[InfinitePoint]:
    """Classify the intersections of the projective closure with z = 0.

    Roots (x : y) of the leading homogeneous form are clustered into
    multiplicities; each direction is reported as isotropic (x^2+y^2 = 0),
    singular (all three partials of the homogenization vanish), a
    tangency with the infinite line ((fx)^2 + (fy)^2 = 0), or transversal.
    """
    d = F.degree
    if F.is_zero():
        raise DegenerateLeadingForm("zero polynomial has no leading form")
    if d < 2:
        raise ValueError("degree must be at least 2")
    lead = F.homogeneous_part(d)  # lead[i] = coeff of x^i y^(d-i)
    if not lead.any():
        raise DegenerateLeadingForm("leading homogeneous form vanishes")
    sub = F.homogeneous_part(d - 1)

    # roots of p(x) = sum lead[i] x^i (y = 1), plus (1 : 0) when deg_x < d
    deg_x = int(np.nonzero(lead)[0][-1])
    dirs: list[tuple[complex, complex, int]] = []
    if deg_x > 0:
        clusters: list[list[complex]] = []
        for z in np.roots(lead[: deg_x + 1][::-1]):
            z = complex(z)
            for members in clusters:
                if abs(z - members[0]) <= 1e-6:
                    members.append(z)
                    break
            else:
                clusters.append([z])
        for members in clusters:
            dirs.append((complex(np.mean(members)), 1.0 + 0.0j, len(members)))
    if deg_x < d:
        dirs.append((1.0 + 0.0j, 0.0 + 0.0j, d - deg_x))

    lead_x = lead[1:] * np.arange(1, d + 1)  # d/dx: coeff of x^(i-1) y^(d-i)
    lead_y = lead[:-1] * np.arange(d, 0, -1)  # d/dy: coeff of x^i y^(d-1-i)

    scale = 1.0 + float(np.max(np.abs(lead)))
    scale_sub = 1.0 + float(np.max(np.abs(sub))) if sub.any() else 1.0

    out = []
    for x0, y0, mult in dirs:
        norm = math.hypot(abs(x0), abs(y0))
        x0, y0 = x0 / norm, y0 / norm
        iso = abs(x0 * x0 + y0 * y0)
        hx = _homogeneous_eval(lead_x, x0, y0) if d >= 1 else 0.0
        hy = _homogeneous_eval(lead_y, x0, y0) if d >= 1 else 0.0
        fz = _homogeneous_eval(sub, x0, y0) if sub.any() else 0.0
        residuals = {
            "isotropy": float(iso),
            "fx": abs(hx),
            "fy": abs(hy),
            "fz": abs(fz),
            "tangency": abs(hx * hx + hy * hy),
        }
        if iso < tol:
            kind = "isotropic"
        elif (
            abs(hx) < tol * scale * d
            and abs(hy) < tol * scale * d
            and abs(fz) < tol * scale_sub
        ):
            kind = "singular"
        elif abs(hx * hx + hy * hy) < tol * (abs(hx) ** 2 + abs(hy) ** 2 + 1e-300):
            kind = "tangency"
        else:
            kind = "transversal"
        out.append(
            InfinitePoint(
                direction=(x0, y0), multiplicity=mult, kind=kind, residuals=residuals
            )
        )
    return out


# ---------------------------------------------------------------------------
# restriction to circles: trigonometric degree, recursion, global fit


@dataclass(frozen=True)
class CircleSampleSet:
    """Uniform angle samples of a scalar function on one circle.

    The circle is taken in the rotated frame whose center lies at
    (center_offset, 0); sample k sits at angle 2*pi*k/len(values).
    """

    center_offset: float
    radius: float
    values: np.ndarray

    def __post_init__(self):
        n = len(self.values)
        if n < 8 or n & (n - 1):
            raise ValueError(f"sample count must be a power of two >= 8, got {n}")

    @classmethod
    def from_function(cls, func, center, radius: float, n_samples: int):
        """Sample ``func(x, y)`` on the circle about ``center``.

        The plane is rotated so the center lands on the positive x-axis,
        which only re-phases the Fourier coefficients.
        """
        center = np.asarray(center, dtype=float)
        a = float(np.hypot(center[0], center[1]))
        theta_c = math.atan2(center[1], center[0])
        t = np.linspace(0.0, TWO_PI, n_samples, endpoint=False)
        x = center[0] + radius * np.cos(t + theta_c)
        y = center[1] + radius * np.sin(t + theta_c)
        return cls(center_offset=a, radius=radius, values=np.asarray(func(x, y)))


@dataclass(frozen=True)
class FourierDegreeReport:
    passed: bool
    degree_bound: int
    tail_max: float
    coeff_max: float
    coefficients: np.ndarray

    @property
    def tail_ratio(self) -> float:
        return self.tail_max / self.coeff_max if self.coeff_max else 0.0


def circle_fourier_degree_test(
    samples: CircleSampleSet, n_degree: int, rel_tol: float = 1e-9
) -> FourierDegreeReport:
    """Does the circle restriction have trigonometric degree <= n_degree?

    Passes iff every Fourier coefficient of index |k| > n_degree is below
    rel_tol times the largest coefficient.
    """
    m2 = len(samples.values)
    if m2 < 4 * n_degree + 4:
        raise ValueError(
            f"need at least 4N+4 = {4 * n_degree + 4} samples, got {m2}"
        )
    coeff = np.fft.fft(np.asarray(samples.values, dtype=complex)) / m2
    k = np.fft.fftfreq(m2, d=1.0 / m2)
    tail = np.abs(coeff[np.abs(k) > n_degree])
    coeff_max = float(np.max(np.abs(coeff)))
    tail_max = float(tail.max()) if tail.size else 0.0
    return FourierDegreeReport(
        passed=bool(tail_max <= rel_tol * coeff_max),
        degree_bound=n_degree,
        tail_max=tail_max,
        coeff_max=coeff_max,
        coefficients=coeff,
    )


@dataclass(frozen=True)
class RecursionReport:
    alpha: float
    roots: tuple
    c1: complex
    c2: complex
    tail: np.ndarray
    decaying: bool


def fourier_division_recursion(
    f_coeffs,
    a: float,
    r: float,
    n_degree: int,
    seeds=(0.0, 0.0),
    tail_length: int = 48,
    amp_tol: float = 1e-10,
) -> RecursionReport:
    """Three-term recursion r g_{k+1} + a g_k + r g_{k-1} = f_k / a.

    ``f_coeffs`` holds Fourier coefficients f_k for k = -K..K (odd
    length, centered); beyond them the forcing is zero.  Starting from
    seeds (g_N, g_{N+1}) the recursion is run forward; the characteristic
    roots e^{+-i alpha} with cos(alpha) = -a/(2r) lie on the unit circle
    for |a| < 2r, so the tail decays only if both homogeneous amplitudes
    c1, c2 (solved from the seeds) vanish.
    """
    if a == 0.0:
        raise ConcentricDegenerate("center offset a = 0 divides the forcing by a")
    if abs(a) >= 2.0 * r:
        raise RootsOffUnitCircle(
            f"|a| = {abs(a)} >= 2r = {2 * r}: roots leave the unit circle"
        )
    f_coeffs = np.asarray(f_coeffs, dtype=complex)
    if f_coeffs.ndim != 1 or len(f_coeffs) % 2 == 0:
        raise ValueError("f_coeffs must be a centered odd-length array")
    kmax = (len(f_coeffs) - 1) // 2

    def forcing(k: int) -> complex:
        return f_coeffs[k + kmax] if -kmax <= k <= kmax else 0.0

    alpha = math.acos(-a / (2.0 * r))
    lam1, lam2 = cmath.exp(1j * alpha), cmath.exp(-1j * alpha)

    g_n, g_n1 = complex(seeds[0]), complex(seeds[1])
    det = lam1 - lam2
    c1 = (g_n1 - g_n * lam2) / det
    c2 = (g_n * lam1 - g_n1) / det

    tail = np.empty(tail_length + 2, dtype=complex)
    tail[0], tail[1] = g_n, g_n1
    for i in range(2, tail_length + 2):
        k = n_degree + i - 1  # recursion centered at index k
        tail[i] = (forcing(k) / a - a * tail[i - 1] - r * tail[i - 2]) / r
    decaying = abs(c1) <= amp_tol and abs(c2) <= amp_tol
    return RecursionReport(
        alpha=alpha, roots=(lam1, lam2), c1=c1, c2=c2, tail=tail, decaying=decaying
    )


@dataclass(frozen=True)
class FitReport:
    polynomial: BivariatePolynomial
    max_residual: float
    rank: int
    n_terms: int


def global_poly_fit(points, values, degree: int) -> FitReport:
    """Least-squares monomial fit of scattered samples up to total degree.

    QR-based solve (pivoted); raises IllConditionedFit on rank
    deficiency.  The residual is the max norm relative to the largest
    sample magnitude.
    """
    pts = np.asarray(points, dtype=float)
    vals = np.asarray(values, dtype=float)
    exps = [(i, j) for s in range(degree + 1) for i in range(s + 1) for j in [s - i]]
    n_terms = len(exps)
    if len(vals) < 3 * n_terms:
        raise ValueError(
            f"need at least {3 * n_terms} samples for degree {degree}, got {len(vals)}"
        )
    x, y = pts[:, 0], pts[:, 1]
    cols = [x**i * y**j for i, j in exps]
    design = np.stack(cols, axis=-1)
    scales = np.max(np.abs(design), axis=0)
    scales[scales == 0.0] = 1.0
    coef, _, rank, _ = lstsq(design / scales, vals, lapack_driver="gelsy")
    if rank < n_terms:
        raise IllConditionedFit(f"design rank {rank} < {n_terms} monomials")
    coef = coef / scales
    poly = BivariatePolynomial.from_terms(
        (i, j, c) for (i, j), c in zip(exps, coef)
    )
    resid = np.max(np.abs(design @ coef - vals))
    denom = float(np.max(np.abs(vals))) or 1.0
    return FitReport(
        polynomial=poly,
        max_residual=float(resid / denom),
        rank=int(rank),
        n_terms=n_terms,
    )
