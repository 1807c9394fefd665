"""Exception types shared across modules."""


class ProbeError(Exception):
    """Base class for all package errors."""


class DomainError(ProbeError, ValueError):
    """Argument outside the domain of a function or chart."""


class ChartError(ProbeError, ValueError):
    """Events on incompatible charts."""


class SingularityError(ProbeError, ValueError):
    """Evaluation at a singular point (coincident events, z = 0, ...)."""


class AmbiguityError(ProbeError, ValueError):
    """Evaluation exactly on a branch cut with no side given."""


class ConvergenceError(ProbeError, ArithmeticError):
    """A series failed to converge within its term budget."""


class AccuracyError(ProbeError, ArithmeticError):
    """Quadrature did not reach tolerance.

    ``best`` and ``error`` hold the last estimate and its error bound.
    """

    def __init__(self, message, best=None, error=None):
        super().__init__(message)
        self.best = best
        self.error = error


class ConsistencyError(ProbeError, ValueError):
    """Inputs that should agree do not."""


class ProtocolError(ProbeError, ValueError):
    """Detector protocol preconditions violated."""


class GeometryError(ProbeError, ValueError):
    """Detector events with the wrong causal relation."""


class ConfigError(ProbeError, ValueError):
    """Invalid experiment configuration."""
