from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from helpers import cost_functions, submodular_functions
from submodgap.errors import GroundMismatchError, PreconditionError, SizeLimitError
from submodgap.frt import proxy_function
from submodgap.gap_lp import (
    FLOAT_TOL,
    envelope_ratio,
    max_violation,
    submodularity_gap,
    verify_envelope,
)
from submodgap.instances import build_hst, build_matching_universe
from submodgap.setfn import SetFunction, is_submodular
from submodgap.solvers import matching_table, rooted_steiner_table, ufl_cost_table


def two_element_gap(c):
    """Closed form on two elements: only c(a) + c(b) >= c(ab) can fail."""
    a, b, ab = c[1], c[2], c[3]
    if a == 0 or b == 0:
        return None if ab > a + b else Fraction(1)
    return max(Fraction(1), ab / (a + b))


@given(cost_functions(min_n=2, max_n=2))
def test_two_element_closed_form(c):
    res = submodularity_gap(c, exact=True)
    expected = two_element_gap(c)
    if expected is None:
        assert res.status == "infeasible"
    else:
        assert res.lambda_star == expected
        assert verify_envelope(c, res.g, res.lambda_star)


@settings(max_examples=40)
@given(submodular_functions(max_n=4))
def test_submodular_input_has_gap_one(c):
    res = submodularity_gap(c, exact=True)
    assert res.lambda_star == 1
    assert res.g == c


@settings(max_examples=30)
@given(cost_functions(min_n=1, max_n=4))
def test_exact_and_float_agree(c):
    ex = submodularity_gap(c, exact=True)
    fl = submodularity_gap(c, exact=False)
    assert ex.status == fl.status or (ex.status == "infeasible") == (fl.status == "infeasible")
    if ex.status == "optimal":
        assert abs(float(ex.lambda_star) - fl.lambda_star) < 1e-7
        assert verify_envelope(c, ex.g, ex.lambda_star)
        assert verify_envelope(c, fl.g, fl.lambda_star, tol=FLOAT_TOL)
        assert fl.certified_upper >= ex.lambda_star
        assert float(fl.certified_upper) - fl.lambda_star < 1e-6
        assert ex.certified_upper == ex.lambda_star
        # no feasible envelope does better than the optimum
        assert envelope_ratio(c, ex.g) == ex.lambda_star


def test_d1_gap_is_five_quarters(d1):
    c = rooted_steiner_table(d1)
    res = submodularity_gap(c)
    assert res.exact and res.status == "optimal"
    assert res.lambda_star == Fraction(5, 4)
    assert res.residual == 0
    assert is_submodular(res.g).holds


def test_ufl_gap_small():
    res = submodularity_gap(ufl_cost_table(build_hst(1, Fraction(1, 2))))
    assert res.lambda_star == Fraction(5, 4)


def test_matching_gap_is_one():
    c = matching_table(build_matching_universe(2), [0, 1, 2, 2])
    res = submodularity_gap(c, exact=False)
    assert res.status == "optimal" and abs(res.lambda_star - 1) <= 1e-9


def test_infeasible_when_pinned_zeros_conflict():
    # c vanishes on both singletons but not on the pair: g(a) = g(b) = 0 forces g(ab) = 0
    c = SetFunction(2, tuple(map(Fraction, (0, 0, 0, 1))))
    assert submodularity_gap(c, exact=True).status == "infeasible"
    assert submodularity_gap(c, exact=False).status == "infeasible"


def test_preconditions():
    with pytest.raises(PreconditionError):
        submodularity_gap(SetFunction(1, (Fraction(1), Fraction(1))))
    with pytest.raises(PreconditionError):
        submodularity_gap(SetFunction(1, (Fraction(0), Fraction(-1))))
    with pytest.raises(SizeLimitError):
        submodularity_gap(SetFunction(15, (Fraction(0),) * 2**15))


def test_verify_envelope_and_ratio(d1):
    c = rooted_steiner_table(d1)
    g = submodularity_gap(c).g
    assert verify_envelope(c, g, Fraction(5, 4))
    assert not verify_envelope(c, g, Fraction(6, 5))
    assert not verify_envelope(c, c, 10)  # c itself is not submodular
    assert max_violation(c, c, 1) > 0
    other = SetFunction(3, c.values, ("x", "y", "z"))
    with pytest.raises(GroundMismatchError):
        verify_envelope(c, other, 2)
    with pytest.raises(PreconditionError):
        envelope_ratio(c, c.scale(Fraction(1, 2)))


def test_frt_proxy_bounds_the_gap(d1):
    from submodgap.instances import metric_closure

    m = metric_closure(d1.graph)
    c = rooted_steiner_table(d1, m)
    proxy = proxy_function(m, c.labels, 30, seed=1, root=d1.root).tabulation
    ratio = envelope_ratio(c, proxy)
    assert verify_envelope(c, proxy, ratio)
    assert ratio >= submodularity_gap(c).lambda_star


def test_json_record(d1):
    res = submodularity_gap(rooted_steiner_table(d1))
    obj = res.to_json()
    assert obj["lambda_star"] == "5/4" and obj["status"] == "optimal"
    assert SetFunction.from_json(obj["g"]) == res.g
