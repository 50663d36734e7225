"""Exception hierarchy shared across the package."""


class SupergaussError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(SupergaussError):
    """A vector, matrix or seminorm was applied to data of the wrong length."""


class IncompatibleKernelsError(SupergaussError):
    """ker(p) is not contained in ker(q); the balancing supremum is infinite."""


class DivergentSumError(SupergaussError):
    """A declared eigenvalue tail makes a required series diverge."""


class DivergentBalanceError(SupergaussError):
    """The balancing objective is unbounded above (no finite certificate)."""


class GaussianDivergenceError(SupergaussError):
    """The pure-Gaussian integrand exp(alpha*q^2) is not integrable."""


class TailBoundDomainError(SupergaussError):
    """A tail bound was requested outside its region of validity (R <= R*)."""


class ConfigError(SupergaussError):
    """Run configuration is invalid; carries (path, reason) pairs."""

    def __init__(self, issues):
        self.issues = list(issues)
        lines = "; ".join(f"{path}: {reason}" for path, reason in self.issues)
        super().__init__(lines or "invalid configuration")
