"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A scenario or model description failed validation.

    `path` locates the offending field, e.g. "network.W[0][2]".
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class EnumerationLimitError(ValueError):
    """A request would require enumerating too large a binary space."""


class PolicyContractError(RuntimeError):
    """A policy returned a control that is infeasible at the queried state."""

    def __init__(self, message: str, diagnostic=None):
        self.diagnostic = diagnostic
        super().__init__(message)


class SolverStallError(RuntimeError):
    """The LP solver failed to make progress within its iteration budget."""
