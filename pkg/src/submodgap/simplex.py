"""Exact dense simplex over the rationals.

Integer-preserving (fraction-free) tableau: all entries are integers and the
true tableau is ``T / d`` where ``d`` is the last pivot.  Pivots follow
Bland's rule, so the method terminates on degenerate problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: tuple[Fraction, ...] | None
    objective: Fraction | None
    pivots: int


class _Tableau:
    def __init__(self, rows: np.ndarray, basis: list[int]):
        self.T = rows  # (m + 1) x (N + 1); last row objective, last column rhs
        self.basis = basis
        self.d = 1
        self.pivots = 0

    @property
    def m(self) -> int:
        return self.T.shape[0] - 1

    def sign(self) -> int:
        return 1 if self.d > 0 else -1

    def pivot(self, r: int, c: int) -> None:
        T = self.T
        p = T[r, c]
        col = T[:, c].copy()
        col[r] = 0
        new = (T * p - np.outer(col, T[r])) // self.d
        new[r] = T[r]
        self.T = new
        self.d = p
        self.basis[r] = c
        self.pivots += 1

    def run(self, allowed: np.ndarray) -> str:
        """Minimise the objective row over ``allowed`` entering columns."""
        while True:
            s = self.sign()
            obj = self.T[-1, :-1] * s
            cand = np.nonzero((obj < 0) & allowed)[0]
            if len(cand) == 0:
                return "optimal"
            c = int(cand[0])
            colv = self.T[:-1, c] * s
            rows = np.nonzero(colv > 0)[0]
            if len(rows) == 0:
                return "unbounded"
            rhs = self.T[:-1, -1] * s
            best = None
            for r in rows:
                r = int(r)
                if best is None:
                    best = r
                    continue
                # compare rhs[r]/colv[r] with rhs[best]/colv[best]
                lhs = rhs[r] * colv[best]
                rhs_best = rhs[best] * colv[r]
                if lhs < rhs_best or (lhs == rhs_best and self.basis[r] < self.basis[best]):
                    best = r
            self.pivot(best, c)

    def value(self, r: int, c: int) -> Fraction:
        return Fraction(int(self.T[r, c]), int(self.d))


def _integer_row(coefs: Sequence, rhs) -> tuple[list[int], int]:
    fr = [Fraction(x) for x in coefs] + [Fraction(rhs)]
    den = 1
    for x in fr:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in fr]
    return ints[:-1], ints[-1]


def solve_lp(
    c: Sequence,
    A: Sequence[Sequence],
    b: Sequence,
    secondary: Sequence | None = None,
) -> LpSolution:
    """Minimise ``c.x`` subject to ``A x <= b``, ``x >= 0`` in exact arithmetic.

    With ``secondary``, ties among optimal solutions are broken by minimising
    ``secondary.x`` while the primary objective is held at its optimum.
    """
    m, nvar = len(A), len(c)
    rows_int = []
    negate = []
    for row, rhs in zip(A, b):
        ints, r = _integer_row(row, rhs)
        neg = r < 0
        if neg:
            ints, r = [-x for x in ints], -r
        rows_int.append((ints, r))
        negate.append(neg)
    n_art = sum(negate)
    width = nvar + m + n_art
    T = np.zeros((m + 1, width + 1), dtype=object)
    T[:, :] = 0
    basis = []
    art = nvar + m
    art_cols = []
    for i, ((ints, r), neg) in enumerate(zip(rows_int, negate)):
        T[i, :nvar] = ints
        T[i, nvar + i] = -1 if neg else 1
        T[i, -1] = r
        if neg:
            T[i, art] = 1
            basis.append(art)
            art_cols.append(art)
            art += 1
        else:
            basis.append(nvar + i)

    tab = _Tableau(T, basis)
    is_art = np.zeros(width, dtype=bool)
    is_art[art_cols] = True

    if n_art:
        obj = np.zeros(width + 1, dtype=object)
        obj[:] = 0
        obj[is_art.nonzero()[0]] = 1
        for i, bcol in enumerate(basis):
            if is_art[bcol]:
                obj = obj - tab.T[i]
        tab.T[-1] = obj
        tab.run(np.ones(width, dtype=bool))
        if tab.value(m, width) != 0:
            return LpSolution("infeasible", None, None, tab.pivots)
        _drive_out_artificials(tab, is_art)

    allowed = ~is_art
    scale = _load_objective(tab, c, nvar)
    status = tab.run(allowed)
    if status != "optimal":
        return LpSolution(status, None, None, tab.pivots)
    primary = -tab.value(tab.m, width) / scale

    if secondary is not None:
        s = tab.sign()
        reduced = tab.T[-1, :-1] * s
        allowed = allowed & ~(reduced > 0)
        _load_objective(tab, secondary, nvar)
        status = tab.run(allowed)

    x = [Fraction(0)] * nvar
    for r, col in enumerate(tab.basis):
        if col < nvar:
            x[col] = tab.value(r, width)
    return LpSolution("optimal", tuple(x), primary, tab.pivots)


def _drive_out_artificials(tab: _Tableau, is_art: np.ndarray) -> None:
    r = 0
    while r < tab.m:
        if is_art[tab.basis[r]]:
            nz = [j for j in np.nonzero(tab.T[r, :-1] != 0)[0] if not is_art[j]]
            if nz:
                tab.pivot(r, int(nz[0]))
            else:
                # redundant equality row
                tab.T = np.delete(tab.T, r, axis=0)
                del tab.basis[r]
                continue
        r += 1


def _load_objective(tab: _Tableau, c: Sequence, nvar: int) -> int:
    """Install ``c`` (scaled to integers) as the objective row; returns the scale."""
    den = 1
    cf = [Fraction(x) for x in c]
    for x in cf:
        den = lcm(den, x.denominator)
    row = np.zeros(tab.T.shape[1], dtype=object)
    row[:] = 0
    row[:nvar] = [int(x * den) * tab.d for x in cf]
    for r, col in enumerate(tab.basis):
        if col < nvar and cf[col] != 0:
            row = row - int(cf[col] * den) * tab.T[r]
    tab.T[-1] = row
    return den
