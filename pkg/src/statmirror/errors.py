"""Semantic exception hierarchy.

Every error carries an ``exit_code`` so the CLI and service can map failures
uniformly: 2 for input/domain problems, 3 for numeric failures.
"""


class StatMirrorError(Exception):
    """Base class for all laboratory errors."""

    exit_code = 3


class InputError(StatMirrorError):
    """Bad input: unknown names, malformed points, domain violations."""

    exit_code = 2


class NumericError(StatMirrorError):
    """A numeric procedure failed to meet its contract."""

    exit_code = 3


class DomainViolation(InputError):
    """Point lies outside the declared domain of a potential or chart."""


class ArithmeticDomain(NumericError):
    """Elementary-function argument out of range during jet evaluation.

    Inside a declared domain this signals a wrong sign convention upstream,
    so it is classified as a numeric failure rather than an input error.
    """


class RangeViolation(InputError):
    """Familiar parameters outside the family's parameter range."""


class ToleranceNotMet(NumericError):
    """Quadrature or series summation failed to reach the target tolerance."""


class NotConverged(NumericError):
    """Iterative solver exhausted its iteration budget."""


class LeftDomain(InputError):
    """Newton line search cannot stay interior; the target point is outside
    the image of the gradient map."""


class NotPositiveDefinite(NumericError):
    """Hessian failed a Cholesky factorization; signals a wrong sign
    convention in the potential."""


class DegeneratePlane(InputError):
    """The two vectors spanning a section are (numerically) parallel."""


class NotOrthogonal(InputError):
    """A pair of directions required to be metric-orthogonal is not."""


class ZeroVector(InputError):
    """A direction vector is (numerically) zero."""


class WrongDimension(InputError):
    """Operation defined only for a specific dimension."""


class StabilityViolation(InputError):
    """Requested time step violates the parabolic stability bound."""


class HessianDegenerate(NumericError):
    """Discrete Hessian lost positive definiteness during grid integration.

    Carries the trajectory accumulated before the abort in ``trajectory``.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory or []


class UnknownName(InputError):
    """Catalogue lookup failed."""


class ParseError(InputError):
    """Malformed flag value (point, grid size, ...)."""
