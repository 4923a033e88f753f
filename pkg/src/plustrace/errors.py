class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedParameterError(ValueError):
    """A parameter value for which no constant is tabulated."""


class InternalError(RuntimeError):
    """An internal invariant failed (should never happen on valid input)."""
