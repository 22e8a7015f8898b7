"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the set where an operation is defined."""


class AdmissibilityError(DomainError):
    """Initial data violate the a-priori bound required by an estimate."""


class ConvergenceError(RuntimeError):
    """An iterative method did not reach its tolerance."""
