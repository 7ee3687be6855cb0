"""Exception hierarchy. Each class maps to one CLI exit code."""


class SSHEmergenceError(Exception):
    exit_code = 1


class ValidationError(SSHEmergenceError, ValueError):
    """Input parameters violate a model invariant."""

    exit_code = 3


class GapClosedError(ValidationError):
    """The Bloch symbol passes through the origin (|t_in| == |t_out|)."""


class NumericalError(SSHEmergenceError, ArithmeticError):
    """A root scan or iteration failed to converge."""

    exit_code = 4


class StabilityError(NumericalError):
    """Transfer-matrix product overflowed the guard threshold."""


class ResourceError(SSHEmergenceError):
    exit_code = 5
