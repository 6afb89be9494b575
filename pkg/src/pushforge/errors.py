"""Exception types shared across the package."""


class PushforgeError(Exception):
    """Base class for all errors raised by pushforge."""


class InputError(PushforgeError, ValueError):
    """Invalid argument: bad dimensions, out-of-range parameters, malformed data."""


class NumericError(PushforgeError, ArithmeticError):
    """A computation produced a non-finite value."""


class RegionBudgetError(PushforgeError, RuntimeError):
    """Region enumeration exceeded its work budget."""


class InsufficientCarryError(InputError):
    """Space-filling construction requested with N <= d*L."""


class FormatError(InputError):
    """A serialized artifact could not be parsed (unknown version, bad fields)."""
