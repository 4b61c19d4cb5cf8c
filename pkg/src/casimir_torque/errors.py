"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class CasimirError(Exception):
    exit_code = 1


class ConfigError(CasimirError, ValueError):
    exit_code = 2


class DomainError(CasimirError, ValueError):
    """Input outside the mathematical domain of an operation (NaN integrand, K = xi = 0, ...)."""

    exit_code = 3


class ConsistencyError(CasimirError, ValueError):
    exit_code = 2


class ConvergenceError(CasimirError, ArithmeticError):
    """Numerical procedure did not reach its tolerance.

    ``best`` and ``error`` hold the last estimate and its error so callers can
    decide whether to use it anyway.
    """

    exit_code = 3

    def __init__(self, message, best=None, error=None):
        super().__init__(message)
        self.best = best
        self.error = error


class BracketError(ConvergenceError):
    """Requested extremum is not inside the bracket."""


class OptimizationError(ConvergenceError):
    pass


class RegimeError(CasimirError, ValueError):
    """Input violates a validity guard (perturbative amplitudes, long-line regime)."""

    exit_code = 4
