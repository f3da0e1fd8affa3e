"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates an operation's precondition."""


class FeasibilityError(RuntimeError):
    """A sampling task could not produce the required objects within budget.

    Carries whatever per-group statistics were gathered before giving up, so
    callers can report how close the search came.
    """

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = dict(stats or {})


class SamplingBudgetError(FeasibilityError):
    """A rejection sampler exhausted its attempt cap."""
