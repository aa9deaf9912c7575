"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class TruncationError(ArithmeticError):
    """The series could not be truncated within the allowed number of terms.

    Attributes
    ----------
    bound : float
        Upper bound on the discarded tail at the last index tried.
    index : int
        Last truncation index tried (the cap).
    """

    def __init__(self, message, bound, index):
        super().__init__(message)
        self.bound = bound
        self.index = index


class EvaluationError(ArithmeticError):
    """A test function produced a non-finite value at a sampling node."""


class ConfigError(ValueError):
    """Malformed function/sequence spec or experiment configuration."""
