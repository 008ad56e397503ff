"""Exception types shared by all fracpp modules."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class AccuracyError(ArithmeticError):
    """A numerical result could not be obtained to the requested accuracy.

    The best available estimate is kept on ``value`` so that callers can
    decide whether it is still usable.
    """

    def __init__(self, message, value=float("nan")):
        super().__init__(message)
        self.value = value
