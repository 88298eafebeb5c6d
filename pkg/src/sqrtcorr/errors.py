"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class EmptySequenceError(DomainError):
    pass


class InsufficientDataError(ValueError):
    pass


class ConditioningError(ArithmeticError):
    """A lattice basis is too close to singular to count points reliably."""


class TruncationWarning(UserWarning):
    """A coset enumeration was capped before it became exact."""
