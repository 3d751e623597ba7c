"""Exact-rational helpers: "p/q" text format and common-denominator scaling."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable

import numpy as np

_INT64_SAFE = 2**59


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def fmt(x) -> str:
    """Lowest-terms ``p/q`` text, always with an explicit denominator."""
    x = to_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse(s) -> Fraction:
    return to_fraction(s)


def common_denominator(values: Iterable[Fraction]) -> int:
    d = 1
    for v in values:
        d = lcm(d, to_fraction(v).denominator)
    return d


def scaled_ints(values, denom: int | None = None) -> tuple[np.ndarray, int]:
    """Return ``(ints, denom)`` with ``values == ints / denom`` exactly.

    The array is int64 when every entry fits, otherwise an object array of
    Python ints so that arithmetic stays exact.
    """
    vals = [to_fraction(v) for v in values]
    if denom is None:
        denom = common_denominator(vals)
    ints = [v.numerator * (denom // v.denominator) for v in vals]
    if all(abs(i) < _INT64_SAFE for i in ints):
        return np.array(ints, dtype=np.int64), denom
    return np.array(ints, dtype=object), denom


def unscale(ints, denom: int) -> list[Fraction]:
    return [Fraction(int(i), denom) for i in ints]
