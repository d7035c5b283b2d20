"""Exception types raised by haarint."""


class HaarintError(ValueError):
    """Base class for all errors raised by this package."""


class DimensionError(HaarintError):
    """Incompatible or empty dimensions."""


class SingularMatrixError(HaarintError):
    """A matrix that must be invertible is singular."""


class BallDomainError(HaarintError):
    """A matrix has a singular value at or above one."""


class DecompositionError(HaarintError):
    """A matrix factorization failed to converge."""


class NonFiniteIntegrandError(HaarintError):
    """An integrand returned inf or nan."""

    def __init__(self, index, value):
        super().__init__(f"integrand returned non-finite value {value!r} at sample index {index}")
        self.index = index
        self.value = value


class IntegrandOverflowError(HaarintError):
    """An exponential integrand overflowed; retry with an exponent shift."""


class QuadratureError(HaarintError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, abscissa=None):
        if abscissa is not None:
            message = f"{message} (worst subinterval near {abscissa:.6g})"
        super().__init__(message)
        self.abscissa = abscissa


class HomogeneityError(HaarintError):
    """An integrand is not homogeneous of its declared degree."""


class EnumerationCapError(HaarintError):
    """A permutation enumeration would exceed the supported size."""


class GeometricRegimeError(HaarintError):
    """The scaled exponential example was asked for beta >= 1."""


class NotHermitianError(HaarintError):
    """A matrix that must be Hermitian is not."""


class NoInteriorSaddleError(HaarintError):
    """The quartic exponent has no interior maximum (beta below 4)."""


class DomainError(HaarintError):
    """An argument lies outside the domain of a scalar function."""
