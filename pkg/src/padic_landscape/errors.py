"""Exception hierarchy shared by every module."""


class LandscapeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(LandscapeError, ValueError):
    """Inconsistent or invalid parameters (mismatched primes, bad windows, ...)."""


class DivergenceError(LandscapeError, ArithmeticError):
    """A series or integral that the computation needs does not converge."""


class PreconditionError(LandscapeError, ValueError):
    """An operation was called outside the hypotheses it is valid under."""


class NonMonotoneSymbolError(LandscapeError):
    """The symbol is not increasing in the norm; the heat kernel is refused."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
