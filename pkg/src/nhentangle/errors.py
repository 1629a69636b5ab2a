"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid argument or violated model invariant."""


class PostSelectionExtinct(ArithmeticError):
    """The no-jump trajectory has (numerically) vanishing probability."""

    def __init__(self, survival: float, time: float | None = None):
        self.survival = survival
        self.time = time
        where = "" if time is None else f" at Jt={time:g}"
        super().__init__(f"post-selection extinct{where}: survival {survival:.3e} below threshold")


class NumericalFailure(RuntimeError):
    """A numerical routine failed to converge or produced non-finite output."""
