"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or unsupported input (bad shape, NaN, k < 1, ...)."""


class BudgetExceeded(RuntimeError):
    """A requested structure would exceed the configured size budget."""

    def __init__(self, what, estimate, budget):
        super().__init__(f"{what}: estimated {estimate:.4g} entries exceeds budget {budget:.4g}")
        self.what = what
        self.estimate = estimate
        self.budget = budget


class OutOfRange(ValueError):
    """A point lies outside the outermost grid layer."""
