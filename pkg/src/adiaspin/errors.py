"""Exception hierarchy.

Everything raised deliberately by the package derives from
:class:`AdiaspinError`, so callers (and the CLI) can separate usage
problems from numerical breakdowns.
"""


class AdiaspinError(Exception):
    """Base class for all package errors."""


class InvalidInputError(AdiaspinError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(InvalidInputError):
    """A JSON field or sweep configuration could not be parsed."""


class FieldRangeError(InvalidInputError):
    """A sampled field was evaluated outside its tabulated interval."""


class NumericError(AdiaspinError, ArithmeticError):
    """A numerical procedure failed to reach its requested accuracy."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v!r}" for k, v in sorted(self.diagnostics.items()))
        return f"{base} ({extra})"


class QuadratureError(NumericError):
    """Adaptive quadrature did not converge."""


class StiffnessError(NumericError):
    """Step size control collapsed below the resolvable limit."""


class DegenerateFieldError(NumericError):
    """The transverse field vanishes where frame quantities are needed."""


class SingularFrameError(DegenerateFieldError):
    """An interior zero of the transverse field makes the rotating frame singular."""


class GimbalError(NumericError):
    """The (alpha, gamma, delta) chart reached sin(gamma) ~ 0."""


class BranchTrackingError(NumericError):
    """A continuous phase branch could not be followed on the given grid."""


class MisuseError(InvalidInputError):
    """A scenario runner received a field outside its scenario."""
