"""Exception and warning classes shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the supported domain of an operation."""


class ConvergenceError(RuntimeError):
    """An iterative method hit its iteration cap."""


class ResolutionError(ValueError):
    """A discretization cannot resolve the requested quantity."""


class DegenerateInputError(ValueError):
    """Input data cannot support the requested fit."""


class NumericalWarning(UserWarning):
    """Base class for warnings about possibly unreliable numerics."""


class TruncationWarning(NumericalWarning):
    """A state has non-negligible mass at the edge of a truncated domain."""


class BoundaryWarning(NumericalWarning):
    """A supremum search is dominated by the edge of its search grid."""
