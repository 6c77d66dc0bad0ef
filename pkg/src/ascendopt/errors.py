"""Exception hierarchy shared by the solvers and the CLI."""


class AscendError(Exception):
    """Base class for all errors raised by this package."""


class InfeasibleError(AscendError):
    """The instance has an empty feasible set.

    ``prefix`` is the first (1-based) prefix length ``l`` at which the
    cumulative demand exceeds the cumulative capacity.
    """

    def __init__(self, prefix, message=None):
        self.prefix = prefix
        super().__init__(message or f"infeasible: prefix constraint violated at l={prefix}")


class CapabilityError(AscendError):
    """The requested operation is outside what the chosen routine supports."""


class NumericalError(AscendError):
    """An iterative search failed to converge."""


class InvariantError(AscendError):
    """An internal invariant that the theory guarantees was violated."""


class ProblemFileError(AscendError):
    """A problem file could not be parsed into a valid instance."""
