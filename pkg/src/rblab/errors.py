"""Exception types shared across the package.

The CLI maps these to exit codes: ``ContractError`` and its subclasses to 3,
``CapacityError`` to 4.
"""


class RbLabError(Exception):
    """Base class for package errors."""


class ContractError(RbLabError, ValueError):
    """An input violates an operation's precondition."""


class DomainError(ContractError):
    """A numeric parameter lies outside its admissible range."""


class CapacityError(RbLabError):
    """The request exceeds a dense-representation or enumeration limit."""


class UnsupportedModeError(ContractError):
    """The operation is not defined for the noise model's mode."""
