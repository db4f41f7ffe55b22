"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's precondition."""


class ValidationError(InvalidInputError):
    """Cross-field validation failure of a problem or run configuration."""


class InternalConsistencyError(RuntimeError):
    """A numerical routine detected that its own assumptions were broken."""
