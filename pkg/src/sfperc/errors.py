"""Exception types raised across the package."""


class SfpercError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SfpercError, ValueError):
    pass


class DivergenceError(SfpercError, ArithmeticError):
    """A requested integral or moment is infinite for the given parameters."""


class InsufficientDataError(SfpercError, ValueError):
    pass


class DegenerateTailError(InsufficientDataError):
    """All upper order statistics coincide, so the tail index is undefined."""


class ConfigError(SfpercError, ValueError):
    pass
