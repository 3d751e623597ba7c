from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st

from submodgap.rational import common_denominator, fmt, parse, scaled_ints, unscale

fractions = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**6)


@given(fractions)
def test_fmt_parse_round_trip(x):
    s = fmt(x)
    assert "/" in s
    assert parse(s) == x


def test_fmt_lowest_terms():
    assert fmt(Fraction(6, 4)) == "3/2"
    assert fmt(2) == "2/1"
    assert fmt("-4/6") == "-2/3"


@given(st.lists(fractions, min_size=1, max_size=20))
def test_scaled_ints_exact(values):
    ints, den = scaled_ints(values)
    assert den == common_denominator(values)
    assert unscale(ints, den) == values


def test_scaled_ints_falls_back_to_python_ints():
    ints, den = scaled_ints([Fraction(2**70), Fraction(1, 3)])
    assert ints.dtype == object
    assert unscale(ints, den) == [Fraction(2**70), Fraction(1, 3)]
    small, _ = scaled_ints([Fraction(1, 2), 3])
    assert small.dtype == np.int64
