"""Exception hierarchy for geometric, dynamical and algebraic failures."""


class BilliardError(Exception):
    """Base class for all package-specific errors."""


# --- curve geometry ---------------------------------------------------------

class NonConvexRepresentation(BilliardError):
    """Curvature-radius representation is non-positive somewhere."""


class NotClosed(BilliardError):
    """Curvature-radius data violates the closure condition."""


class OffsetTooLarge(BilliardError):
    """Requested offset distance reaches the focal set of the curve."""


class FocalPointCrossed(BilliardError):
    """Offset curvature undefined: 1 - t*k(u) <= 0."""


# --- Larmor dynamics --------------------------------------------------------

class NoExitFound(BilliardError):
    """No admissible boundary crossing for a Larmor arc."""


class GrazingIntersection(BilliardError):
    """Arc meets the boundary near-tangentially."""


class NotInAnnulus(BilliardError):
    """Center's Larmor circle does not meet the boundary curve."""


class StencilOutOfDomain(BilliardError):
    """Finite-difference stencil leaves the center annulus."""


# --- polynomial machinery ---------------------------------------------------

class SingularPoint(BilliardError):
    """Gradient of the polynomial vanishes at an evaluation point."""


class DegenerateLeadingForm(BilliardError):
    """Leading homogeneous form is identically zero."""


class ConcentricDegenerate(BilliardError):
    """Circle center offset a = 0: the three-term recursion degenerates."""


class RootsOffUnitCircle(BilliardError):
    """|a| >= 2r: characteristic roots leave the unit circle."""


class IllConditionedFit(BilliardError):
    """Least-squares design matrix is rank deficient."""


class NotApplicable(BilliardError):
    """Closed-form expression degenerates for these parameters."""


# --- Gutkin pipeline --------------------------------------------------------

class NoSolution(BilliardError):
    """Root bracketing failed: no solution in the admissible interval."""


class DegenerateLinearization(BilliardError):
    """First-order matching coefficient vanishes."""


class InconsistentModes(BilliardError):
    """Mode does not satisfy the Gutkin relation: only the zero response."""


class ChordSolveFailure(BilliardError):
    """Chord construction for a mean tangent angle did not converge."""


# --- output -----------------------------------------------------------------

class EmptyPlot(BilliardError):
    """Nothing to draw."""
