"""Exception hierarchy for ratiolab."""

from __future__ import annotations


class RatioLabError(Exception):
    """Base class for all ratiolab errors."""


class InvalidElement(RatioLabError, ValueError):
    """An element is not in canonical form for its group."""


class GroupMismatch(RatioLabError, ValueError):
    """Operands live on different group spaces."""


class OutsideWindow(RatioLabError, ValueError):
    """A grid-group element lies outside the quadrature window."""


class BudgetExceeded(RatioLabError):
    """An operation would produce more atoms than the support budget allows."""

    def __init__(self, required: int, budget: int, step: int | None = None):
        self.required = required
        self.budget = budget
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"support budget exceeded{where}: need {required} atoms, budget {budget}")


class TruncationError(RatioLabError):
    """Mass lost through an absorbing boundary exceeds the configured bound."""

    def __init__(self, mass: float, bound: float):
        self.mass = mass
        self.bound = bound
        super().__init__(f"truncation mass {mass:.3e} exceeds bound {bound:.3e}")


class NoInteriorMinimum(RatioLabError):
    """The Laplace transform of a law has no finite minimiser."""


class PreconditionError(RatioLabError, ValueError):
    """A documented precondition of an operation is violated."""


class ConfigError(RatioLabError, ValueError):
    """A scenario configuration failed validation."""
