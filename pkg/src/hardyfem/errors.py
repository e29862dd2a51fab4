"""Exception types shared across the package."""


class HardyFemError(Exception):
    """Base class for all package errors."""


class DomainError(HardyFemError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class HypothesisError(HardyFemError):
    """A structural hypothesis of the problem class fails.

    The CLI maps this to exit status 2 ("theory says no"), as opposed to
    runtime failures which map to status 1.
    """

    def __init__(self, message, inequality=None):
        super().__init__(message)
        self.inequality = inequality


class BoundUnavailable(HardyFemError):
    """The L^m estimate constant has nonpositive denominator at this m."""

    def __init__(self, message, c_lin):
        super().__init__(message)
        self.c_lin = c_lin


class MeshError(HardyFemError, ValueError):
    """Invalid mesh parameters or mesh/field mismatch."""


class SingularSystemError(HardyFemError):
    """Zero pivot encountered in the banded factorization."""


class ConvergenceError(HardyFemError):
    """A fixed-point or eigenvalue iteration failed to converge."""

    def __init__(self, message, history=None, level=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []
        self.level = level


class UnsupportedFormError(HardyFemError):
    """A manufactured source cannot be closed within finite power sums."""


class ConfigError(HardyFemError):
    """Malformed run configuration, with optional location."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            loc += ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column
