"""Exception hierarchy and CLI exit codes."""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION_FAILED = 2


class ExitwiseError(Exception):
    """Base class for every error raised by exitwise."""


class InvalidParameter(ExitwiseError, ValueError):
    pass


class UsageError(ExitwiseError):
    pass


class AbortMaxTerms(ExitwiseError):
    """A series loop ran past its term budget."""

    def __init__(self, where: str, max_terms: int, **params):
        self.where = where
        self.max_terms = max_terms
        self.params = params
        detail = ", ".join(f"{k}={v!r}" for k, v in params.items())
        super().__init__(f"{where}: more than {max_terms} series terms needed ({detail})")


class MaxStepsExceeded(ExitwiseError):
    def __init__(self, max_steps: int, time: float):
        self.max_steps = max_steps
        self.time = time
        super().__init__(f"Euler path still inside the interval after {max_steps} steps (t={time:.6g})")


class ExpressionError(ExitwiseError, ValueError):
    pass


class DriftSpecError(ExitwiseError):
    pass


class NonIntegrableDrift(DriftSpecError):
    pass


class NegativeGamma(DriftSpecError):
    pass


class GammaEnvelopeTooSmall(DriftSpecError):
    pass


class RhoNotZero(DriftSpecError):
    def __init__(self, rho: float):
        self.rho = rho
        super().__init__(
            f"DET needs rho == 0 (got rho={rho:.6g}); use kdet/gdet or pass tilted=True "
            f"to sample the exponentially tilted law"
        )
