"""Exact small-scale experiments on the submodularity gap of optimum-cost functions.

Instances (diamond graphs, HSTs, bipartite universes), exact solvers,
tabulated set functions, the gap LP, closed-form bounds and FRT tree
embeddings, all in exact rational arithmetic where it matters.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    GroundMismatchError,
    InvariantViolation,
    PreconditionError,
    SchemaError,
    SizeLimitError,
    SubmodGapError,
)
from .setfn import SetFunction, is_submodular, symmetrize, tabulate  # noqa: E402
from .gap_lp import GapLpResult, envelope_ratio, submodularity_gap, verify_envelope  # noqa: E402

__all__ = [
    "GapLpResult",
    "GroundMismatchError",
    "InvariantViolation",
    "PreconditionError",
    "SchemaError",
    "SetFunction",
    "SizeLimitError",
    "SubmodGapError",
    "envelope_ratio",
    "is_submodular",
    "submodularity_gap",
    "symmetrize",
    "tabulate",
    "verify_envelope",
]
