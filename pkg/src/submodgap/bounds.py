"""Closed-form cost sequences and the lower-bound recursion built on them.

If a submodular ``f`` dominates the optimum costs ``t_j`` on the nested sets
and satisfies ``f_k >= t_k / 2^k + f_{k-1} / 2 + ... + f_0 / 2^k``, then
``2^k f_k >= sum_{j=1..k} 2^{k-j} (t_j - t_{j-1}) + 2^k t_0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InvariantViolation, PreconditionError


@dataclass(frozen=True)
class BoundSequence:
    t: tuple[Fraction, ...]
    f_lower: tuple[Fraction, ...]
    o: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if len(self.t) != len(self.f_lower) or (self.o is not None and len(self.o) != len(self.t)):
            raise PreconditionError("sequence lengths differ")
        if self.t and self.f_lower[0] != self.t[0]:
            raise InvariantViolation("f_lower[0] must equal t[0]")


def steiner_t(j: int) -> Fraction:
    """Spanning-tree cost of the diamond ``D_j``: (2/3) 2^j + (1/3) 2^-j."""
    return Fraction(2, 3) * 2**j + Fraction(1, 3) / 2**j


def steiner_t_sequence(k: int) -> list[Fraction]:
    if k < 0:
        raise PreconditionError("k must be non-negative")
    return [steiner_t(j) for j in range(k + 1)]


def estimating_lower_bound(t: Sequence, k: int) -> Fraction:
    """2^-k [sum_{j=1..k} 2^{k-j} (t_j - t_{j-1}) + 2^k t_0]."""
    if k < 0 or len(t) < k + 1:
        raise PreconditionError(f"need at least {k + 1} terms, got {len(t)}")
    t = [Fraction(x) for x in t]
    total = 2**k * t[0]
    for j in range(1, k + 1):
        total += 2 ** (k - j) * (t[j] - t[j - 1])
    return total / 2**k


def recurrence_lower_bound(t: Sequence, k: int) -> Fraction:
    """Same bound by unrolling g_l = t_l + g_{l-1} + ... + g_0 and dividing by 2^k."""
    if k < 0 or len(t) < k + 1:
        raise PreconditionError(f"need at least {k + 1} terms, got {len(t)}")
    g: list[Fraction] = []
    for l in range(k + 1):
        g.append(Fraction(t[l]) + sum(g, Fraction(0)))
    return g[k] / 2**k


def steiner_closed_form(k: int) -> Fraction:
    """k/3 - (1 - 4^-k)/9 + 1, checked against the recursion."""
    if k < 0:
        raise PreconditionError("k must be non-negative")
    value = Fraction(k, 3) - (1 - Fraction(1, 4**k)) / 9 + 1
    unrolled = estimating_lower_bound(steiner_t_sequence(k), k)
    if value != unrolled:
        raise InvariantViolation(f"closed form {value} disagrees with recursion {unrolled} at k={k}")
    return value


def steiner_closed_form_as_printed(k: int) -> Fraction:
    """The variant with ``+(1 - 4^-k)/9``; kept only to document the sign slip."""
    return Fraction(k, 3) + (1 - Fraction(1, 4**k)) / 9 + 1


def _check_alpha(alpha) -> Fraction:
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise PreconditionError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def ufl_t(j: int, alpha) -> Fraction:
    """Optimum cost on ``H_j``: 2^{j+1}/alpha + (2^{j+1} - 1)/(1 - alpha)."""
    alpha = _check_alpha(alpha)
    return Fraction(2 ** (j + 1)) / alpha + Fraction(2 ** (j + 1) - 1) / (1 - alpha)


def ufl_o(j: int, alpha) -> Fraction:
    """Optimum cost on a rooted path with ``j`` edges: one facility plus ``j+1``
    client vertices, each paying 1/(1 - alpha) to reach a leaf below the path."""
    alpha = _check_alpha(alpha)
    return 2 / alpha + (j + 1) / (1 - alpha)


def ufl_sequences(d: int, alpha) -> BoundSequence:
    alpha = _check_alpha(alpha)
    if d < 0:
        raise PreconditionError("d must be non-negative")
    t = [ufl_t(j, alpha) for j in range(d + 1)]
    step = 1 / alpha + 1 / (1 - alpha)
    for j in range(1, d + 1):
        if t[j] - t[j - 1] != 2**j * step:
            raise InvariantViolation(f"t_{j} - t_{j-1} != 2^{j} (1/alpha + 1/(1-alpha))")
    f_lower = [estimating_lower_bound(t, j) for j in range(d + 1)]
    o = [ufl_o(j, alpha) for j in range(d + 1)]
    return BoundSequence(tuple(t), tuple(f_lower), tuple(o))


def ufl_f_lower(d: int, alpha) -> Fraction:
    """(d+2)/alpha + (d+1)/(1 - alpha), checked against the recursion."""
    alpha = _check_alpha(alpha)
    value = (d + 2) / alpha + (d + 1) / (1 - alpha)
    unrolled = estimating_lower_bound([ufl_t(j, alpha) for j in range(d + 1)], d)
    if value != unrolled:
        raise InvariantViolation(f"closed form {value} disagrees with recursion {unrolled}")
    return value


def ufl_gap_bound(d: int, alpha) -> Fraction:
    """Lower bound on f_d / o_d for facility location on the depth-d HST.

    ((d+2)/alpha + (d+1)/(1-alpha)) / (2/alpha + (d+1)/(1-alpha)); tends to
    (d+2)/2 as alpha -> 0.
    """
    alpha = _check_alpha(alpha)
    if d < 0:
        raise PreconditionError("d must be non-negative")
    return ufl_f_lower(d, alpha) / (2 / alpha + (d + 1) / (1 - alpha))


def bound_rows(problem: str, k: int, alpha=None) -> list[tuple[int, Fraction, Fraction, Fraction]]:
    """Rows (j, t_j, f_lower_j, ratio) with ratio = f_lower_j / cost of a depth-j path."""
    if problem == "steiner":
        t = steiner_t_sequence(k)
        return [(j, t[j], estimating_lower_bound(t, j), estimating_lower_bound(t, j)) for j in range(k + 1)]
    if problem == "ufl":
        if alpha is None:
            raise PreconditionError("ufl bounds need alpha")
        seq = ufl_sequences(k, alpha)
        return [(j, seq.t[j], seq.f_lower[j], ufl_gap_bound(j, alpha)) for j in range(k + 1)]
    raise PreconditionError(f"unknown problem {problem!r}")
