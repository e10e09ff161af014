"""Semantic exception hierarchy.

The CLI maps these onto exit codes: usage/domain/size problems exit 2,
numerical failures exit 3, statistical failures exit 1 (no exception,
reported through the comparison report).
"""


class TaplinError(Exception):
    """Base class for all library errors."""


class DomainError(TaplinError, ValueError):
    """A parameter is outside the mathematical domain of the operation."""


class UsageError(TaplinError, ValueError):
    """Operands are individually valid but combined incorrectly."""


class SizeError(TaplinError, ValueError):
    """The request would exceed the configured resource caps."""


class NumericalError(TaplinError, RuntimeError):
    """A numerical procedure failed beyond its recovery budget."""
