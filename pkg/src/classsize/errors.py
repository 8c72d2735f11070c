"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """A precondition on an argument was violated."""


class CapacityError(RuntimeError):
    """An exhaustive enumeration would exceed the configured cap."""


class RootNotBracketed(ValueError):
    """Bisection was asked to work on an interval without a sign change."""


class ImprovementNotGuaranteed(ValueError):
    """A cycle perturbation was requested along rows with tied probabilities."""
