"""Exception types shared across the package."""


class RangeError(ValueError):
    """Requested evaluation lies outside the numerically validated range."""


class DomainError(ValueError):
    """Argument lies outside the mathematical domain of the operation."""


class ConvergenceError(RuntimeError):
    """A self-validating quadrature failed to converge.

    Carries the last two values so the caller can judge how bad it is.
    """

    def __init__(self, message, value, previous):
        super().__init__(f"{message} (last={value!r}, previous={previous!r})")
        self.value = value
        self.previous = previous


class TruncationError(RuntimeError):
    """Fock-space truncation could not be validated."""

    def __init__(self, message, tail_mass, dimension):
        super().__init__(f"{message} (tail={tail_mass:.3e}, N={dimension})")
        self.tail_mass = tail_mass
        self.dimension = dimension


class TruncatedFlowError(RuntimeError):
    """A trajectory left the integration domain before the requested time."""

    def __init__(self, escape_time, requested_time):
        super().__init__(
            f"trajectory escaped at t={escape_time:.6g} before t={requested_time:.6g}"
        )
        self.escape_time = escape_time
        self.requested_time = requested_time
