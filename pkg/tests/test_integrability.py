"""Invariant-polynomial machinery: residuals, offset polynomial, circle tests."""

import math

import numpy as np
import pytest
from scipy.special import iv

from magbilliards import (
    BivariatePolynomial,
    Circle,
    CircleSampleSet,
    Ellipse,
    FieldParams,
    boundary_constancy,
    circle_fourier_degree_test,
    constancy_residual,
    cubic_defect,
    curvature_form,
    ellipse_offset_polynomial,
    ellipse_offset_singularities,
    eval_frame,
    fourier_division_recursion,
    global_poly_fit,
    implicit_curvature,
    infinity_classification,
    normalize_integral,
    offset_point,
)
from magbilliards.curves import TWO_PI
from magbilliards.errors import (
    ConcentricDegenerate,
    NotApplicable,
    RootsOffUnitCircle,
    SingularPoint,
)

BP = BivariatePolynomial

CIRCLE = Circle(1.0)
CIRCLE_FIELD = FieldParams(4.0)
ELLIPSE = Ellipse(2.0, 1.0)
ELLIPSE_FIELD = FieldParams(5.0)

CIRCLE_INVARIANT = BP.from_terms([(2, 0, 1.0), (0, 2, 1.0), (0, 0, -0.75**2)])


def offset_samples(curve, field, t, n=256):
    u = np.linspace(0.0, TWO_PI, n, endpoint=False)
    return offset_point(curve, u, t)


def random_poly(rng, degree):
    return BP.from_terms(
        (i, j, rng.uniform(-1, 1))
        for i in range(degree + 1)
        for j in range(degree + 1 - i)
    )


# ---------------------------------------------------------------------------
# curvature form and implicit curvature


def test_curvature_form_examples():
    assert curvature_form(BP.from_terms([(2, 0, 1.0), (0, 2, 1.0)]), [1, 0]) == pytest.approx(8.0)
    assert curvature_form(BP.from_terms([(0, 1, 1.0)]), [3.7, -1.2]) == pytest.approx(0.0)
    assert curvature_form(BP.from_terms([(1, 1, 1.0)]), [1, 1]) == pytest.approx(-2.0)


def test_implicit_curvature_examples():
    circle = BP.from_terms([(2, 0, 1.0), (0, 2, 1.0), (0, 0, -1.0)])
    assert implicit_curvature(circle, [1, 0]) == pytest.approx(1.0)
    parabola = BP.from_terms([(0, 1, 1.0), (2, 0, -1.0)])
    assert implicit_curvature(parabola, [0, 0]) == pytest.approx(-2.0)
    ell = BP.from_terms([(2, 0, 0.25), (0, 2, 1.0), (0, 0, -1.0)])
    k = implicit_curvature(ell, [2, 0])
    assert abs(k) == pytest.approx(eval_frame(ELLIPSE, 0.0).curvature, rel=1e-12)


def test_implicit_curvature_matches_parametric_on_grid():
    ell = BP.from_terms([(2, 0, 1.0 / 4.0), (0, 2, 1.0), (0, 0, -1.0)])
    for u in np.linspace(0.0, TWO_PI, 17):
        f = eval_frame(ELLIPSE, u)
        k = implicit_curvature(ell, f.point)
        assert abs(k) == pytest.approx(f.curvature, rel=1e-8)


def test_singular_point_raises():
    with pytest.raises(SingularPoint):
        implicit_curvature(BP.constant(3.0), [0.5, 0.5])


# ---------------------------------------------------------------------------
# constancy residual along offsets


def test_constancy_residual_circle_value_18():
    pts = offset_samples(CIRCLE, CIRCLE_FIELD, CIRCLE_FIELD.r)
    rep = constancy_residual(CIRCLE_INVARIANT, pts, CIRCLE_FIELD.beta, +1)
    assert rep.mean == pytest.approx(18.0, rel=1e-12)
    assert rep.max_abs_dev < 1e-10
    assert rep.curvature_margin > 1e-6 * CIRCLE_FIELD.beta


def test_constancy_residual_noninvariant_ellipse():
    f = ellipse_offset_polynomial(2.0, 1.0, ELLIPSE_FIELD.r)
    pts = offset_samples(ELLIPSE, ELLIPSE_FIELD, ELLIPSE_FIELD.r)
    rep = constancy_residual(f, pts, ELLIPSE_FIELD.beta, +1)
    assert rep.relative_dev > 1e-3  # no invariant exists: not constant


def test_constancy_residual_rejects_constant():
    pts = offset_samples(CIRCLE, CIRCLE_FIELD, CIRCLE_FIELD.r)
    with pytest.raises(SingularPoint):
        constancy_residual(BP.constant(1.0), pts, 4.0, +1)


# ---------------------------------------------------------------------------
# cubic defect coefficient


def test_cubic_defect_odd_and_zero_for_invariant():
    rep = cubic_defect(CIRCLE_INVARIANT, CIRCLE, CIRCLE_FIELD, 0.37, +1)
    assert rep.even_residual < 1e-8
    assert rep.analytic == 0.0
    scale = CIRCLE_FIELD.beta**3  # typical normalization magnitude
    assert abs(rep.numeric) < 1e-5 * scale


def test_cubic_defect_x3y():
    f = BP.from_terms([(3, 1, 1.0)])
    for sign in (+1, -1):
        rep = cubic_defect(f, ELLIPSE, ELLIPSE_FIELD, 0.9, sign)
        assert rep.relative_error < 1e-4
        assert rep.even_residual < 1e-8


@pytest.mark.parametrize(
    "curve,field", [(CIRCLE, CIRCLE_FIELD), (ELLIPSE, ELLIPSE_FIELD)]
)
def test_cubic_defect_random_trials(curve, field):
    rng = np.random.default_rng(17)
    for _ in range(20):
        f = random_poly(rng, int(rng.integers(2, 5)))
        u = rng.uniform(0.0, TWO_PI)
        sign = 1 if rng.random() < 0.5 else -1
        rep = cubic_defect(f, curve, field, u, sign)
        assert rep.relative_error < 1e-4
        assert rep.even_residual < 1e-8


# ---------------------------------------------------------------------------
# boundary constancy and normalization


def test_boundary_constancy_circle_invariant():
    f = BP.from_terms([(2, 0, 1.0), (0, 2, 1.0), (0, 0, -CIRCLE_FIELD.r**2)])
    rep = boundary_constancy(f, CIRCLE, CIRCLE_FIELD)
    assert rep.dev_minus < 1e-12 and rep.dev_plus < 1e-12
    assert rep.const_minus == pytest.approx(1.25**2 - 0.0625)
    assert rep.const_plus == pytest.approx(0.75**2 - 0.0625)


def test_boundary_constancy_offset_polynomial():
    f = ellipse_offset_polynomial(2.0, 1.0, ELLIPSE_FIELD.r)
    rep = boundary_constancy(f, ELLIPSE, ELLIPSE_FIELD)
    scale = f.coeff_max
    assert abs(rep.const_minus) < 1e-8 * scale
    assert abs(rep.const_plus) < 1e-8 * scale
    assert rep.dev_minus < 1e-8 * scale and rep.dev_plus < 1e-8 * scale


def test_boundary_constancy_nonconstant_function():
    f = BP.from_terms([(1, 0, 1.0)])  # x: range over an offset circle = radius
    rep = boundary_constancy(f, CIRCLE, CIRCLE_FIELD)
    assert rep.dev_minus == pytest.approx(1.25, rel=1e-6)
    assert rep.dev_plus == pytest.approx(0.75, rel=1e-6)


def test_normalize_integral():
    f = BP.from_terms([(2, 0, 1.0), (0, 2, 1.0)])  # values 1 and 2 on radii 1, sqrt(2)
    g = normalize_integral(f, 1.0, 2.0)
    assert g(1.0, 0.0) == pytest.approx(0.0, abs=1e-14)
    assert g(0.0, math.sqrt(2.0)) == pytest.approx(0.0, abs=1e-13)
    assert g.degree == 2 * f.degree
    f2 = normalize_integral(f, 0.0, 0.0)
    assert f2(1.3, -0.4) == pytest.approx(f(1.3, -0.4) ** 2, rel=1e-13)


# ---------------------------------------------------------------------------
# ellipse offset polynomial


def test_offset_polynomial_vanishes_on_both_offsets():
    a, b, r = 2.0, 1.0, 0.2
    f = ellipse_offset_polynomial(a, b, r)
    assert f.degree == 8
    u = np.linspace(0.0, TWO_PI, 512, endpoint=False)
    for t in (r, -r):
        pts = offset_point(Ellipse(a, b), u, t)
        assert np.max(np.abs(f.eval_points(pts))) < 1e-8 * f.coeff_max


def test_offset_polynomial_r_to_zero_degenerates_to_ellipse():
    a, b = 2.0, 1.0
    f = ellipse_offset_polynomial(a, b, 1e-300)
    u = np.linspace(0.0, TWO_PI, 512, endpoint=False)
    pts = Ellipse(a, b).point(u)
    assert np.max(np.abs(f.eval_points(pts))) < 1e-8 * f.coeff_max


def test_offset_polynomial_even_symmetry():
    f = ellipse_offset_polynomial(2.0, 1.0, 0.2)
    rng = np.random.default_rng(2)
    for _ in range(10):
        x, y = rng.uniform(-2, 2, 2)
        assert f(x, y) == pytest.approx(f(-x, y), rel=1e-12)
        assert f(x, y) == pytest.approx(f(x, -y), rel=1e-12)
    nz = np.argwhere(f.coeffs != 0.0)
    assert np.all(nz % 2 == 0)  # only even powers appear


def test_offset_singularities_closed_form():
    a, b, r = 2.0, 1.0, 0.2
    rep = ellipse_offset_singularities(a, b, r)
    assert rep.max_relative_value < 1e-8
    assert rep.max_relative_grad < 1e-8
    ys = sorted(abs(complex(p.point[1]).imag) for p in rep.points if not p.is_real)
    xs = sorted(abs(complex(p.point[0]).real) for p in rep.points if p.is_real)
    want_y = math.sqrt(a * a - b * b) * math.sqrt(a * a - r * r) / a
    want_x = math.sqrt(a * a - b * b) * math.sqrt(b * b - r * r) / b
    assert ys == pytest.approx([want_y, want_y])
    assert xs == pytest.approx([want_x, want_x])
    # two purely imaginary, two real singular points
    assert sum(p.is_real for p in rep.points) == 2


def test_offset_singularities_circle_not_applicable():
    with pytest.raises(NotApplicable):
        ellipse_offset_singularities(1.0, 1.0, 0.2)


# ---------------------------------------------------------------------------
# infinity classification


def test_infinity_product_of_circles_is_isotropic():
    p = BP.from_terms([(2, 0, 1.0), (0, 2, 1.0), (0, 0, -2.0)])
    q = BP.from_terms([(2, 0, 1.0), (0, 2, 1.0), (0, 0, -3.0)])
    points = infinity_classification(p * q)
    assert len(points) == 2
    assert all(pt.kind == "isotropic" and pt.multiplicity == 2 for pt in points)


def test_infinity_parabola_is_tangency():
    points = infinity_classification(BP.from_terms([(2, 0, 1.0), (0, 1, -1.0)]))
    assert len(points) == 1
    pt = points[0]
    # the single infinite point is the y-direction (0 : 1 : 0)
    assert abs(pt.direction[0]) < 1e-12 and abs(abs(pt.direction[1]) - 1.0) < 1e-12
    assert pt.kind == "tangency"
    assert pt.multiplicity == 2


def test_infinity_offset_polynomial_trichotomy():
    f = ellipse_offset_polynomial(2.0, 1.0, 0.2)
    points = infinity_classification(f)
    assert len(points) == 4
    kinds = sorted(pt.kind for pt in points)
    assert kinds == ["isotropic", "isotropic", "singular", "singular"]
    # non-isotropic double points are the complex directions b*x = +-i*a*y
    for pt in points:
        if pt.kind == "singular":
            x0, y0 = pt.direction
            assert abs(x0 / y0) == pytest.approx(2.0, rel=1e-6)


def test_infinity_transversal_case():
    points = infinity_classification(BP.from_terms([(2, 0, 1.0), (1, 1, 1.0), (0, 0, 1.0)]))
    kinds = {pt.kind for pt in points}
    assert "transversal" in kinds


# ---------------------------------------------------------------------------
# circle restriction tests


def test_circle_degree_test_quadratic():
    f = BP.from_terms([(2, 0, 1.0), (0, 2, 1.0)])
    samples = CircleSampleSet.from_function(f, [0.8, 0.0], 0.25, 64)
    for n in (1, 2, 5):
        assert circle_fourier_degree_test(samples, n).passed


def test_circle_degree_test_cubic_monomial():
    f = BP.from_terms([(3, 0, 1.0)])
    samples = CircleSampleSet.from_function(f, [0.5, 0.4], 0.3, 64)
    assert circle_fourier_degree_test(samples, 3).passed
    assert not circle_fourier_degree_test(samples, 2).passed


def test_circle_degree_test_exponential_fails():
    samples = CircleSampleSet.from_function(
        lambda x, y: np.exp(x), [1.0, 0.0], 2.5, 256
    )
    for n in range(1, 11):
        rep = circle_fourier_degree_test(samples, n)
        assert not rep.passed
        # tail coefficients are modified-Bessel values of the radius
        expected = math.exp(1.0) * iv(n + 1, 2.5)
        assert rep.tail_max == pytest.approx(expected, rel=1e-6)


def test_circle_sample_set_validation():
    with pytest.raises(ValueError):
        CircleSampleSet(0.5, 0.25, np.zeros(48))  # not a power of two
    samples = CircleSampleSet(0.5, 0.25, np.zeros(16))
    with pytest.raises(ValueError):
        circle_fourier_degree_test(samples, 4)  # needs 4N+4 = 20 > 16


# ---------------------------------------------------------------------------
# three-term recursion


def test_recursion_roots_on_unit_circle():
    rng = np.random.default_rng(4)
    for _ in range(20):
        r = rng.uniform(0.1, 2.0)
        a = rng.uniform(-1.0, 1.0) * 2.0 * r * 0.999
        if a == 0.0:
            continue
        rep = fourier_division_recursion(np.zeros(5), a, r, 2)
        assert abs(abs(rep.roots[0]) - 1.0) < 1e-12
        assert abs(abs(rep.roots[1]) - 1.0) < 1e-12
        assert math.cos(rep.alpha) == pytest.approx(-a / (2 * r), abs=1e-12)


def test_recursion_alpha_for_a_equal_r():
    rep = fourier_division_recursion(np.zeros(5), 0.25, 0.25, 2)
    assert rep.alpha == pytest.approx(2.0 * math.pi / 3.0, abs=1e-12)


def test_recursion_zero_seeds_zero_tail():
    rep = fourier_division_recursion(np.zeros(9), 0.1, 0.25, 4, seeds=(0.0, 0.0))
    assert rep.decaying
    assert np.max(np.abs(rep.tail)) == 0.0


def test_recursion_nonzero_seed_never_decays():
    rep0 = fourier_division_recursion(np.zeros(9), 0.1, 0.25, 4)
    alpha = rep0.alpha
    rep = fourier_division_recursion(
        np.zeros(9), 0.1, 0.25, 4, seeds=(1.0, math.cos(alpha)), tail_length=256
    )
    assert not rep.decaying
    assert rep.c1 == pytest.approx(0.5) and rep.c2 == pytest.approx(0.5)
    # the (bounded) tail oscillates instead of converging to zero
    assert np.max(np.abs(rep.tail[-32:])) > 0.4


def test_recursion_degenerate_inputs():
    with pytest.raises(ConcentricDegenerate):
        fourier_division_recursion(np.zeros(5), 0.0, 0.25, 2)
    with pytest.raises(RootsOffUnitCircle):
        fourier_division_recursion(np.zeros(5), 0.6, 0.25, 2)


# ---------------------------------------------------------------------------
# global polynomial fit


def test_global_fit_exact_degree4():
    rng = np.random.default_rng(9)
    pts = rng.uniform(-1.2, 1.2, (400, 2))
    f = random_poly(rng, 4)
    fit = global_poly_fit(pts, f(pts[:, 0], pts[:, 1]), 4)
    assert fit.max_residual < 1e-10


def test_global_fit_exponential_fails_at_degree8():
    rng = np.random.default_rng(10)
    theta = rng.uniform(0.0, TWO_PI, 800)
    rad = rng.uniform(3.0, 5.0, 800)
    pts = np.stack((rad * np.cos(theta), rad * np.sin(theta)), axis=-1)
    fit = global_poly_fit(pts, np.exp(pts[:, 0]), 8)
    assert fit.max_residual > 1e-4


def test_global_fit_needs_enough_samples():
    with pytest.raises(ValueError):
        global_poly_fit(np.zeros((10, 2)), np.zeros(10), 4)


def test_pipeline_circle_test_then_fit():
    # degree-N circle restrictions globally fit at degree 2N
    f = BP.from_terms([(3, 0, 0.5), (2, 1, -1.0), (1, 1, 2.0), (0, 1, 1.0), (0, 0, -1.0)])
    n_deg = 3
    us = np.linspace(0.0, TWO_PI, 32, endpoint=False)
    all_pts = []
    for u in us:
        center = CIRCLE.point(u)
        samples = CircleSampleSet.from_function(f, center, CIRCLE_FIELD.r, 64)
        assert circle_fourier_degree_test(samples, n_deg).passed
        t = np.linspace(0.0, TWO_PI, 64, endpoint=False)
        all_pts.append(center + CIRCLE_FIELD.r * np.stack((np.cos(t), np.sin(t)), axis=-1))
    pts = np.vstack(all_pts)
    fit = global_poly_fit(pts, f(pts[:, 0], pts[:, 1]), 2 * n_deg)
    assert fit.max_residual < 1e-8
