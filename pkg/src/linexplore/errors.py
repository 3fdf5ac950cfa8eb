"""Exception types shared across the library."""


class LinExploreError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(LinExploreError, ValueError):
    """A vector or matrix does not match the ambient dimension of a set."""


class NotEnumerableError(LinExploreError, TypeError):
    """Enumeration requested on a continuous action set."""


class CapExceededError(LinExploreError):
    """Enumeration would produce more arms than the caller's cap allows."""

    def __init__(self, count: int, cap: int):
        super().__init__(f"enumeration needs {count} arms, cap is {cap}")
        self.count = count
        self.cap = cap


class MixedSupportError(LinExploreError, ValueError):
    """A union-of-balls arm has support straddling several coordinate blocks."""


class NotSpanningError(LinExploreError, ValueError):
    """The action set (or a finite atom pool) does not span its ambient space."""


class NotPSDError(LinExploreError, ValueError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


class SingularError(LinExploreError, ValueError):
    """A moment matrix is numerically singular where invertibility is required."""


class BudgetTooSmallError(LinExploreError, ValueError):
    """A pull budget is below the minimum the operation supports."""


class RegimeViolationError(LinExploreError, ValueError):
    """Inputs fall outside the parameter regime an estimator is specified for."""


class TooFewArmsError(LinExploreError, ValueError):
    """A partition into d regions was requested with fewer than d arms."""


class InsufficientPointsError(LinExploreError, ValueError):
    """A scaling fit needs at least three sweep points."""


class ConfigError(LinExploreError, ValueError):
    """An experiment configuration failed validation."""
