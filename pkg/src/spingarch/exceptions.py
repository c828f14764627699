"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter lies outside its admissible domain."""


class DataError(ValueError):
    """Input data is malformed or degenerate (bad CSV cell, constant series, ...)."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite intermediate value.

    Carries the index of the offending step when one is known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConvergenceWarning(UserWarning):
    """An optimization finished without meeting its tolerances."""
