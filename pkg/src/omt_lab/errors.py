"""
Exception hierarchy for omt-lab.

Contract violations derive from ValueError so callers that only know the
standard library still catch them.
"""

from typing import Any, Optional


class OmtLabError(Exception):
    """Base class for every error raised by omt-lab."""


class ContractError(OmtLabError, ValueError):
    """A precondition or contract of an operation was violated."""


class ExpressionSyntaxError(ContractError):
    """An expression or complex literal could not be parsed."""

    def __init__(self, message: str, text: str = "", position: int = -1):
        if position >= 0:
            message = f"{message} at position {position} in {text!r}"
        super().__init__(message)
        self.text = text
        self.position = position


class UsageError(ContractError):
    """Command-line usage error; `flag` names the offending flag when known."""

    def __init__(self, message: str, flag: Optional[str] = None):
        super().__init__(message)
        self.flag = flag


class EvaluationOverflowError(OmtLabError, ArithmeticError):
    """An analytic function produced a non-finite intermediate value."""


class BudgetExceededError(OmtLabError):
    """A sampled path hit max_steps before reaching the stopping circle."""

    def __init__(self, message: str, partial_path: Any = None):
        super().__init__(message)
        self.partial_path = partial_path


class GeometryError(ContractError):
    """Circles, arcs or start points are inconsistent with each other."""


class ClockRangeError(ContractError):
    """A clock value outside [0, sigma_end] was requested."""


class DegenerateClockError(OmtLabError):
    """The clock never advanced: |f'| vanished along the whole path."""


class DegenerateMarginError(OmtLabError):
    """The margin m of the gamma curve is not safely positive."""


class RadiusSelectionError(OmtLabError):
    """No radius with a positive margin was found within the halving budget."""


class NonconstantRequiredError(ContractError):
    """The operation needs a nonconstant analytic function."""
