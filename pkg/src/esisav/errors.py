"""Exception hierarchy shared by the solver modules and the CLI."""


class EsiSavError(Exception):
    """Base class for all package errors."""


class ConfigError(EsiSavError, ValueError):
    """Invalid run configuration or invalid constructor arguments."""


class GridMismatchError(EsiSavError, ValueError):
    """Two operands live on different grids (or have the wrong shape)."""


class NumericalError(EsiSavError, ArithmeticError):
    """A computation produced NaN/Inf or hit a singular operation."""


class SingularModeError(NumericalError):
    """A diagonal solve met a mode with (near) zero multiplier."""

    def __init__(self, message, kx=None, ky=None):
        super().__init__(message)
        self.kx = kx
        self.ky = ky


class ScaleOverflowError(NumericalError):
    """exp(log R - E/C) overflowed; the energy scale C is too small."""


class InsufficientHistoryError(EsiSavError, RuntimeError):
    """A multistep scheme was stepped before its history was filled."""
