"""Planar magnetic billiards in a strong constant field.

Simulation of Larmor-arc dynamics (boundary and center maps), residual
tests for polynomial invariants on the offset annulus, and construction
and verification of constant-incidence (Gutkin) tables.
"""

__version__ = "0.1.0"

from .curves import (
    AdmissibilityReport,
    Circle,
    Ellipse,
    FieldParams,
    FourierRho,
    FrameSample,
    PlaneCurve,
    check_strong_field,
    curve_from_config,
    curve_from_rho,
    eval_frame,
    max_abs_curvature,
    offset_curvature,
    offset_point,
)
from .dynamics import (
    ArcStep,
    BoundaryState,
    boundary_map,
    center_map,
    center_map_jacobian,
    circle_table_invariant,
    flow_step,
    larmor_center,
    reflect,
    trajectory,
)
from .gutkin import (
    ChordRecord,
    GutkinConstruction,
    GutkinParams,
    chord_half_angle,
    chord_identity_residual,
    delta_chord,
    first_order_response,
    gamma_invariance_check,
    gutkin_mode_roots,
    gutkin_residual,
    perturbed_gutkin_curve,
    refine_gutkin_curve,
    zindler_report,
)
from .integrability import (
    CircleSampleSet,
    boundary_constancy,
    circle_fourier_degree_test,
    constancy_residual,
    cubic_defect,
    curvature_form,
    ellipse_offset_polynomial,
    ellipse_offset_singularities,
    fourier_division_recursion,
    global_poly_fit,
    implicit_curvature,
    infinity_classification,
    normalize_integral,
)
from .polynomials import BivariatePolynomial
from .svg import export_svg

__all__ = [
    "AdmissibilityReport",
    "ArcStep",
    "BivariatePolynomial",
    "BoundaryState",
    "Circle",
    "CircleSampleSet",
    "ChordRecord",
    "Ellipse",
    "FieldParams",
    "FourierRho",
    "FrameSample",
    "GutkinConstruction",
    "GutkinParams",
    "PlaneCurve",
    "boundary_constancy",
    "boundary_map",
    "center_map",
    "center_map_jacobian",
    "check_strong_field",
    "chord_half_angle",
    "chord_identity_residual",
    "circle_fourier_degree_test",
    "circle_table_invariant",
    "constancy_residual",
    "cubic_defect",
    "curvature_form",
    "curve_from_config",
    "curve_from_rho",
    "delta_chord",
    "ellipse_offset_polynomial",
    "ellipse_offset_singularities",
    "eval_frame",
    "export_svg",
    "first_order_response",
    "flow_step",
    "fourier_division_recursion",
    "gamma_invariance_check",
    "global_poly_fit",
    "gutkin_mode_roots",
    "gutkin_residual",
    "implicit_curvature",
    "infinity_classification",
    "larmor_center",
    "max_abs_curvature",
    "normalize_integral",
    "offset_curvature",
    "offset_point",
    "perturbed_gutkin_curve",
    "reflect",
    "refine_gutkin_curve",
    "trajectory",
    "zindler_report",
]
