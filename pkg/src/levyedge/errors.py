"""Exception hierarchy shared by every levyedge module."""


class LevyEdgeError(Exception):
    """Base class for all library errors."""


class ModelError(LevyEdgeError, ValueError):
    """A triplet, measure or config violates its invariants."""


class QuadratureError(LevyEdgeError, ArithmeticError):
    """Adaptive quadrature failed to reach its tolerance."""


class MomentDoesNotExist(QuadratureError):
    """A requested moment integral of the Levy measure diverges."""


class ConditionGateError(LevyEdgeError):
    """Exact-series mode was requested outside the validated theorem class."""


class SeriesDivergenceError(LevyEdgeError, ArithmeticError):
    """Raised by callers that demand a converged series and did not get one."""
