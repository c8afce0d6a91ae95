"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: InputError -> 2, CapacityError -> 3,
NumericalError -> 4.
"""


class NaivetmError(Exception):
    """Base class for all package errors."""


class InputError(NaivetmError):
    """Malformed or inconsistent user input (files, symbols, parameters)."""


class UnsupportedFeatureError(InputError):
    """The operation is well-defined but not supported for this input."""


class CapacityError(NaivetmError):
    """An enumeration would exceed its configured cap."""


class NumericalError(NaivetmError):
    """A numerical failure: NaN, divergence, or an undefined quantity."""


class DivergenceError(NumericalError):
    """KL divergence evaluated against a distribution with a forbidden zero."""
