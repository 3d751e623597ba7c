"""Submodularity gap of a tabulated cost function via linear programming.

Variables are the excess ``h(S) = g(S) - c(S) >= 0`` and ``mu = lambda - 1 >= 0``;
the LP minimises ``mu`` subject to ``h(S) <= mu * c(S)`` and the local
submodularity inequalities on ``g``.  Entries with ``c(S) = 0`` pin
``g(S) = 0`` and are dropped from the variable set.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .errors import GroundMismatchError, PreconditionError, SizeLimitError
from .setfn import SetFunction, is_submodular, local_violations
from .simplex import solve_lp

MAX_GAP_GROUND = 14
EXACT_MAX_GROUND = 6
FLOAT_TOL = 1e-9
_ROUNDING_DENOMINATOR = 10**6
_SIMPLEX_ITERATIONS = 2000


@dataclass(frozen=True)
class GapLpResult:
    lambda_star: Fraction | float | None
    g: SetFunction | None
    status: str  # "optimal" | "infeasible" | "unstable"
    residual: Fraction | float
    exact: bool
    certified_upper: Fraction | None = None  # envelope ratio of an exactly verified rational g

    def to_json(self) -> dict:
        from .rational import fmt

        lam = self.lambda_star
        return {
            "status": self.status,
            "exact": self.exact,
            "lambda_star": (fmt(lam) if isinstance(lam, Fraction) else lam),
            "lambda_float": None if lam is None else float(lam),
            "residual": fmt(self.residual) if isinstance(self.residual, Fraction) else self.residual,
            "certified_upper": None if self.certified_upper is None else fmt(self.certified_upper),
            "g": None if self.g is None else self.g.to_json(),
        }


def _validate(c: SetFunction) -> None:
    if c.n > MAX_GAP_GROUND:
        raise SizeLimitError(f"gap LP limited to ground sets of size {MAX_GAP_GROUND}, got {c.n}")
    if c[0] != 0:
        raise PreconditionError("c(empty set) must be 0")
    if any(v < 0 for v in c.values):
        raise PreconditionError("c must be non-negative")


def _constraints(c: SetFunction):
    """Sparse rows (cols, coefs, rhs) over variables [mu, h_S for active S]."""
    n = c.n
    active = [S for S in range(2**n) if c[S] != 0]
    col = {S: k + 1 for k, S in enumerate(active)}
    rows = []
    for S in active:
        rows.append(([col[S], 0], [Fraction(1), -c[S]], Fraction(0)))
    for i in range(n):
        bi = 1 << i
        for j in range(i + 1, n):
            bj = 1 << j
            for A in range(2**n):
                if A & (bi | bj):
                    continue
                terms = {}
                for S, coef in ((A, 1), (A | bi | bj, 1), (A | bi, -1), (A | bj, -1)):
                    if S in col:
                        terms[col[S]] = terms.get(col[S], 0) + coef
                slack = c[A | bi] + c[A | bj] - c[A | bi | bj] - c[A]
                terms = {k: v for k, v in terms.items() if v}
                if not terms:
                    if slack < 0:
                        rows.append(([], [], slack))  # infeasible constant row
                    continue
                rows.append((list(terms), [Fraction(v) for v in terms.values()], slack))
    return active, rows


def _assemble(c: SetFunction, active, x) -> SetFunction:
    h = dict(zip(active, x[1:]))
    vals = tuple(c[S] + h.get(S, 0) for S in range(2**c.n))
    return SetFunction(c.n, vals, c.labels)


def submodularity_gap(c: SetFunction, exact: bool | None = None) -> GapLpResult:
    """Smallest lambda with a submodular g such that c <= g <= lambda * c.

    ``exact=None`` picks the rational simplex for ground sets up to
    :data:`EXACT_MAX_GROUND` and HiGHS beyond that.
    """
    _validate(c)
    if exact is None:
        exact = c.n <= EXACT_MAX_GROUND
    active, rows = _constraints(c)
    if any(not cols and rhs < 0 for cols, _, rhs in rows):
        return GapLpResult(None, None, "infeasible", Fraction(0), exact)
    rows = [r for r in rows if r[0]]
    nvar = len(active) + 1
    if exact:
        return _solve_exact(c, active, rows, nvar)
    return _solve_float(c, active, rows, nvar)


def _solve_exact(c, active, rows, nvar) -> GapLpResult:
    A = []
    for cols, coefs, _ in rows:
        row = [0] * nvar
        for k, v in zip(cols, coefs):
            row[k] = v
        A.append(row)
    b = [rhs for *_, rhs in rows]
    obj = [1] + [0] * (nvar - 1)
    tie = [0] + [1] * (nvar - 1)
    sol = solve_lp(obj, A, b, secondary=tie)
    if sol.status != "optimal":
        return GapLpResult(None, None, sol.status, Fraction(0), True)
    g = _assemble(c, active, sol.x)
    lam = 1 + sol.x[0]
    residual = max_violation(c, g, lam)
    return GapLpResult(lam, g, "optimal", residual, True, lam if residual == 0 else None)


def _highs(obj, A, b, bounds):
    """Dual simplex under an iteration cap, then interior point.

    Degenerate instances (submodular c) are settled by simplex presolve at
    once, while the larger Steiner tables need the interior-point method.  An
    iteration cap, unlike a time limit, keeps the choice deterministic.
    """
    res = linprog(obj, A_ub=A, b_ub=b, bounds=bounds, method="highs-ds",
                  options={"maxiter": _SIMPLEX_ITERATIONS})
    if res.status != 1:
        return res
    return linprog(obj, A_ub=A, b_ub=b, bounds=bounds, method="highs-ipm")


def _solve_float(c, active, rows, nvar) -> GapLpResult:
    ri, ci, vals = [], [], []
    for r, (cols, coefs, _) in enumerate(rows):
        ri += [r] * len(cols)
        ci += cols
        vals += [float(v) for v in coefs]
    A = coo_matrix((vals, (ri, ci)), shape=(len(rows), nvar)).tocsr()
    b = np.array([float(rhs) for *_, rhs in rows])
    obj = np.zeros(nvar)
    obj[0] = 1.0
    first = _highs(obj, A, b, (0, None))
    if first.status == 2:
        return GapLpResult(None, None, "infeasible", 0.0, False)
    if first.status != 0:
        return GapLpResult(None, None, "unstable", float("nan"), False)
    mu = float(first.x[0])
    tie = np.ones(nvar)
    tie[0] = 0.0
    bounds = [(0, mu + FLOAT_TOL * max(1.0, mu))] + [(0, None)] * (nvar - 1)
    second = _highs(tie, A, b, bounds)
    x = second.x if second.status == 0 else first.x
    x = [float(v) for v in x]
    x[0] = mu
    g = _assemble(c, active, [Fraction(v) for v in x])
    lam = 1.0 + mu
    cert = _rational_certificate(c, g, lam)
    if cert is not None and abs(float(cert[1]) - lam) <= FLOAT_TOL * max(1.0, lam):
        # the rounded table is an exactly verified envelope at the float optimum
        g = cert[0]
    residual = float(max_violation(c, g, Fraction(lam)))
    status = "optimal" if residual <= FLOAT_TOL * max(1.0, max(float(v) for v in c.values)) else "unstable"
    return GapLpResult(lam, g, status, residual, False, None if cert is None else cert[1])


def _rational_certificate(c: SetFunction, g: SetFunction, lam: float) -> tuple[SetFunction, Fraction] | None:
    """Round g onto a rational grid; return the first exactly verified rounding.

    Nearest fractions with denominators bounded by 10, 100, ... are tried
    first (small denominators recover exact optima), then grids
    ``1 / (q 2^k)`` with ``q`` the common denominator of ``c``.  Roundings whose
    envelope ratio exceeds ``lam`` by more than the float tolerance are skipped.
    """
    _, q = c.scaled
    ladder = [10**e for e in range(1, 7) if 10**e <= _ROUNDING_DENOMINATOR]
    rounders = [lambda x, den=den: x.limit_denominator(den) for den in ladder]
    rounders += [lambda x, den=q * 2**k: Fraction(round(x * den), den) for k in range(31)]
    fallback = None
    for rnd in rounders:
        gr = SetFunction(c.n, tuple(max(rnd(g[S]), c[S]) for S in range(2**c.n)), c.labels)
        if any(c[S] == 0 and gr[S] != 0 for S in range(2**c.n)) or not is_submodular(gr).holds:
            continue
        ratio = envelope_ratio(c, gr)
        if ratio <= lam + FLOAT_TOL * max(1.0, lam):
            return gr, ratio
        if fallback is None or ratio < fallback[1]:
            fallback = (gr, ratio)
    return fallback


def max_violation(c: SetFunction, g: SetFunction, lam) -> Fraction:
    """Largest violation of c <= g <= lam * c and of local submodularity of g."""
    lam = Fraction(lam)
    worst = Fraction(0)
    for S in range(2**c.n):
        worst = max(worst, c[S] - g[S], g[S] - lam * c[S])
    gi, den = g.scaled
    for *_, deficits in local_violations(g):
        worst = max(worst, Fraction(-int(np.min(deficits)), den))
    return worst


def _same_ground(c: SetFunction, g: SetFunction) -> None:
    if c.n != g.n or c.labels != g.labels:
        raise GroundMismatchError("set functions live on different ground sets")


def verify_envelope(c: SetFunction, g: SetFunction, lam, tol: float = 0) -> bool:
    """True iff g is submodular and c <= g <= lam * c (within ``tol``)."""
    _same_ground(c, g)
    if tol == 0:
        return max_violation(c, g, lam) == 0
    return float(max_violation(c, g, lam)) <= tol


def envelope_ratio(c: SetFunction, g: SetFunction) -> Fraction:
    """max g(S)/c(S) over c(S) > 0; a feasible g bounds the gap from above."""
    _same_ground(c, g)
    best = Fraction(1)
    for S in range(2**c.n):
        if g[S] < c[S]:
            raise PreconditionError(f"g is below c at mask {S}")
        if c[S] == 0:
            if g[S] != 0:
                raise PreconditionError(f"g must vanish where c does (mask {S})")
            continue
        best = max(best, g[S] / c[S])
    return best
