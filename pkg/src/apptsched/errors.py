"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside a function's mathematical domain."""


class DegenerateInputError(ValueError):
    """A moment pair that none of the supported families can represent.

    Raised for zero variance (a point mass) and for squared coefficients
    of variation so small that the mixed-Erlang phase count would blow up.
    """


class ConvergenceError(RuntimeError):
    """An iterative numeric routine exhausted its iteration budget."""
