"""Random walks on explicit groups and numerical checks of strong ratio limits."""

from .errors import (
    BudgetExceeded,
    ConfigError,
    GroupMismatch,
    InvalidElement,
    NoInteriorMinimum,
    OutsideWindow,
    PreconditionError,
    RatioLabError,
    TruncationError,
)
from .groups import CyclicGroup, FreeGroup, GridAffine, Heisenberg, IntegerLattice, make_group
from .measures import WeightedSupport, apply_P, convolve, integrate, iterate_P

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "ConfigError",
    "GroupMismatch",
    "InvalidElement",
    "NoInteriorMinimum",
    "OutsideWindow",
    "PreconditionError",
    "RatioLabError",
    "TruncationError",
    "CyclicGroup",
    "FreeGroup",
    "GridAffine",
    "Heisenberg",
    "IntegerLattice",
    "make_group",
    "WeightedSupport",
    "apply_P",
    "convolve",
    "integrate",
    "iterate_P",
]
