"""Exception types raised by the verification lab.

Every failure mode that a caller can meaningfully distinguish gets its own
class.  All of them derive from :class:`UclabError` so blanket handling
(``except UclabError``) stays possible at the CLI boundary.
"""


class UclabError(Exception):
    """Base class for all package-specific errors."""


# ---------------------------------------------------------------- fields

class EvaluationAtOrigin(UclabError):
    """A field with a radial singularity was evaluated at x = 0."""


class MissingHessian(UclabError):
    """Second derivatives requested from a grid too coarse to supply them."""


class InvalidOrder(UclabError):
    """Vanishing order sigma outside the admissible range (sigma > 0)."""


class UnsupportedField(UclabError):
    """Operation requires properties (e.g. compact support) the field lacks."""


# ------------------------------------------------------------ quadrature

class NonIntegrable(UclabError):
    """Weighted integrand diverges at the origin (exponent at or below -n)."""


class WeightOverflow(UclabError):
    """Weight magnitude exceeds representable exponents even in log space."""


# -------------------------------------------------------------- carleman

class ZeroRHS(UclabError):
    """Carleman right-hand side vanished; the ratio is undefined."""


class NotHalfInteger(UclabError):
    """Power-weight exponent m must lie in N + 1/2."""


class DegenerateAnnulus(UclabError):
    """Annulus radii violate 0 < r_in < r_out."""


# -------------------------------------------------------------- constants

class InvalidRatios(UclabError):
    """Sphere radii ratios violate 0 < rho1 < rho2 <= 1/4."""


class RatioNotAboveOne(UclabError):
    """Norm ratio rho must exceed 1 for the recursion to make sense."""


class ZeroSolution(UclabError):
    """Both norms in a ratio vanish; the field is zero on the region."""


class BoundsViolated(UclabError):
    """Derived constant a fell outside the guaranteed window 2 < a <= -4 log R0."""


class AdmissibilityFailed(UclabError):
    """Recursion depth m = j1 + 1/2 fails the admissibility inequalities."""


# ---------------------------------------------------------------- verify

class ZeroNorm(UclabError):
    """A sphere norm needed with positive value is identically zero."""


class RadiusTooLarge(UclabError):
    """Doubling requested at a radius beyond the certified range R3."""


class InsufficientDecay(UclabError):
    """Log-norms are degenerate; a decay slope cannot be fitted."""


# -------------------------------------------------------------- pdesolver

class SingularSystem(UclabError):
    """Discrete system is singular or produced non-finite values."""


class NonElliptic(UclabError):
    """Principal coefficient matrix loses positivity on the grid."""
