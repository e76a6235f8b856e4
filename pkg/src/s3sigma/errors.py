"""Structured exceptions shared across the package."""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


class ChartBoundaryError(DomainError):
    """Chart formula involves 1/rho and |rho| is below the safe floor.

    The point sits on (or numerically at) the equator of the chart;
    evaluate through the opposite-hemisphere chart or move the point
    into the chart interior.
    """


class StencilError(DomainError):
    """A finite-difference stencil would leave the valid chart region."""


class QuadratureError(ValueError):
    """Invalid quadrature construction or a non-finite integrand value."""
