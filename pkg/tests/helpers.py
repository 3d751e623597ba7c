"""Random set functions for property tests (exact rationals throughout)."""

from fractions import Fraction
from itertools import combinations

from hypothesis import strategies as st

from submodgap.setfn import SetFunction

small_fracs = st.fractions(min_value=0, max_value=8, max_denominator=6)


@st.composite
def coverage_functions(draw, n):
    """f(S) = weight of the union of the items covered by S."""
    items = draw(st.integers(1, 6))
    weights = [draw(small_fracs) for _ in range(items)]
    covers = [draw(st.sets(st.integers(0, items - 1))) for _ in range(n)]
    vals = []
    for mask in range(2**n):
        union = set().union(*(covers[p] for p in range(n) if mask >> p & 1))
        vals.append(sum((weights[i] for i in union), Fraction(0)))
    return SetFunction(n, tuple(vals))


@st.composite
def budget_additive(draw, n):
    """f(S) = min(B, sum of weights)."""
    w = [draw(small_fracs) for _ in range(n)]
    budget = draw(small_fracs)
    vals = tuple(min(budget, sum((w[p] for p in range(n) if m >> p & 1), Fraction(0))) for m in range(2**n))
    return SetFunction(n, vals)


@st.composite
def submodular_functions(draw, min_n=1, max_n=5):
    """Non-negative combination of coverage, budget-additive and uniform-rank functions."""
    n = draw(st.integers(min_n, max_n))
    parts = [draw(coverage_functions(n)), draw(budget_additive(n))]
    r = draw(st.integers(0, n))
    parts.append(SetFunction(n, tuple(Fraction(min(r, bin(m).count("1"))) for m in range(2**n))))
    coefs = [draw(st.fractions(min_value=0, max_value=3, max_denominator=4)) for _ in parts]
    vals = tuple(sum((c * f[m] for c, f in zip(coefs, parts)), Fraction(0)) for m in range(2**n))
    return SetFunction(n, vals)


@st.composite
def cost_functions(draw, min_n=1, max_n=4):
    """Arbitrary non-negative tables with f(empty) = 0 (submodular or not)."""
    n = draw(st.integers(min_n, max_n))
    vals = [Fraction(0)] + [draw(st.fractions(min_value=Fraction(1, 4), max_value=6, max_denominator=4)) for _ in range(2**n - 1)]
    return SetFunction(n, tuple(vals))


def submodular_by_definition(f: SetFunction) -> bool:
    """f(A) + f(B) >= f(A | B) + f(A & B) for every pair of subsets."""
    return all(
        f[a] + f[b] >= f[a | b] + f[a & b] for a, b in combinations(range(2**f.n), 2)
    )
