"""Exception hierarchy shared by the library and the command line."""


class TensorConcError(Exception):
    """Base class for all errors raised by tensorconc."""


class ConfigError(TensorConcError, ValueError):
    """Invalid user-facing parameters (distribution, grid, sizes, ...)."""


class NumericalError(TensorConcError, ArithmeticError):
    """A numerical routine failed or its result is not representable."""


class DivergentMGFError(NumericalError):
    """The requested moment generating function is infinite."""


class InsufficientDataError(TensorConcError, ValueError):
    """Not enough usable points to fit a tail constant."""
