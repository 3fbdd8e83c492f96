"""Exception types raised by the library."""


class LieCubicsError(Exception):
    """Base class for all library errors."""


class InvariantError(LieCubicsError, ValueError):
    """An input violates a documented invariant (e.g. a non-rotation matrix)."""


class NonConvergence(LieCubicsError, RuntimeError):
    """The implicit fixed-point solve did not reach its tolerance.

    ``step`` is the index of the failing step when raised from a flow.
    """

    def __init__(self, message, residual=None, iterations=None, step=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.step = step


class LineSearchFailure(LieCubicsError, RuntimeError):
    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class TooShort(LieCubicsError, ValueError):
    pass


class DimensionMismatch(LieCubicsError, ValueError):
    pass
