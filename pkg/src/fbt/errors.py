"""Shared exception types.

ValidationError maps to CLI exit code 2, NumericalError to exit code 3.
"""


class ValidationError(ValueError):
    """Bad input or violated precondition."""


class NumericalError(RuntimeError):
    """A numeric routine failed to converge or resolve."""
