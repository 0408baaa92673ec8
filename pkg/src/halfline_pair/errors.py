"""Exception hierarchy shared by all modules."""


class HalflinePairError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(HalflinePairError, ValueError):
    """Invalid user-supplied parameters or configuration."""


class DomainError(HalflinePairError, ValueError):
    """An evaluation point or support lies outside the available grid or table."""


class PreconditionError(HalflinePairError, ValueError):
    """An operation was called outside the parameter range where it is meaningful."""


class AssemblyError(HalflinePairError, ValueError):
    """A discrete operator could not be assembled (non-finite potential sample)."""


class GroundStateError(HalflinePairError, RuntimeError):
    """The discrete ground state failed a structural check such as positivity."""


class ConvergenceError(HalflinePairError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, eigenvalues=None, residuals=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.residuals = residuals


class ConsistencyError(HalflinePairError, RuntimeError):
    """Two independent computations of the same quantity disagree."""
