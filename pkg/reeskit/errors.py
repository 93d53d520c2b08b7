"""Exception family shared by every reeskit service.

Input and precondition failures are ``ValueError`` subclasses so callers that only care
about "bad input" can catch ``ValueError``; running out of a resource budget is a
``RuntimeError`` because the input itself was fine.
"""

from typing import Optional


class ParseError(ValueError):
    """Polynomial text that does not follow the grammar."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.line = line
        self.column = column
        self.reason = message
        super().__init__(f"{message} (line {line}, column {column})")


class RingMismatchError(ValueError):
    """Operands live in different rings or have mismatched lengths."""


class NonHomogeneousError(ValueError):
    """A homogeneous input was required."""


class ContainmentError(ValueError):
    """A subspace or element is not contained where it has to be."""


class ZeroElementError(ValueError):
    """The operation is undefined on the zero element."""


class OutOfWindowError(ValueError):
    """A result would land outside the computed degree window."""


class CartierError(ValueError):
    """The divisor is Cartier, so the non-Cartier check does not apply."""


class BudgetExceededError(RuntimeError):
    """A configured resource budget ran out before the computation finished."""

    def __init__(self, resource: str, limit: Optional[float] = None):
        self.resource = resource
        self.limit = limit
        detail = f" (limit {limit})" if limit is not None else ""
        super().__init__(f"Budget exceeded: {resource}{detail}")
