"""Exception types shared across the package.

Everything derives from CurvexError so callers can catch broadly.  Numerical
quality problems (unstable differentiation, noisy quadrature, bad fits) get
their own types because the calling layers branch on them.
"""


class CurvexError(Exception):
    pass


class DimensionMismatch(CurvexError):
    pass


class DimensionTooSmall(CurvexError):
    pass


class MissingField(CurvexError):
    """A CurvatureData optional field is required by the requested operation."""


class InvalidSpec(CurvexError):
    pass


class OutOfDomain(CurvexError):
    pass


class DifferentiationUnstable(CurvexError):
    """Finite-difference curvature failed its internal symmetry checks."""


class GeodesicLeftDomain(CurvexError):
    pass


class JacobianSingular(CurvexError):
    """Conjugate-point territory: det of the exponential-map Jacobian <= 0."""


class SupportTooLarge(CurvexError):
    pass


class TimeTooLarge(CurvexError):
    pass


class QuadratureNotConverged(CurvexError):
    pass


class IllConditionedFit(CurvexError):
    pass


class NoiseDominates(CurvexError):
    pass


class NonPositiveVolume(CurvexError):
    pass


class VolumeTooLarge(CurvexError):
    pass


class LevelSetDegenerate(CurvexError):
    pass


class GammaOutOfRange(CurvexError):
    pass


class ConfigInvalid(CurvexError):
    pass


class PositivityWarning(UserWarning):
    """Test-function profile dipped to the clamp floor somewhere on its support."""
