"""Dense bitmask-indexed set functions and the checks run on them.

Bit ``p`` of a mask stands for ground element ``labels[p]``.  Values are kept
as exact :class:`~fractions.Fraction` and mirrored into a common-denominator
integer array for vectorised checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import GroundMismatchError, PreconditionError, SchemaError, SizeLimitError
from .instances import DiamondInstance, HstInstance, enumerate_sr_paths, rooted_paths_hst
from .rational import fmt, parse, scaled_ints

MAX_GROUND = 24


@dataclass(frozen=True, eq=False)
class SetFunction:
    n: int
    values: tuple[Fraction, ...]
    labels: tuple = field(default=None)

    def __post_init__(self):
        if self.n > MAX_GROUND:
            raise SizeLimitError(f"ground set of size {self.n} exceeds {MAX_GROUND}")
        if len(self.values) != 2**self.n:
            raise PreconditionError(f"expected {2**self.n} values, got {len(self.values)}")
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(range(self.n)))
        elif len(self.labels) != self.n:
            raise PreconditionError("one label per ground element required")

    @classmethod
    def from_values(cls, values: Iterable, labels: Sequence | None = None) -> "SetFunction":
        vals = tuple(Fraction(v) for v in values)
        n = len(vals).bit_length() - 1
        return cls(n, vals, None if labels is None else tuple(labels))

    @cached_property
    def scaled(self) -> tuple[np.ndarray, int]:
        return scaled_ints(self.values)

    @cached_property
    def _position(self) -> dict:
        return {lab: p for p, lab in enumerate(self.labels)}

    def __getitem__(self, mask: int) -> Fraction:
        return self.values[mask]

    def __eq__(self, other):
        if not isinstance(other, SetFunction):
            return NotImplemented
        return self.n == other.n and self.values == other.values and self.labels == other.labels

    def mask_of(self, elements: Iterable, ignore: Iterable = ()) -> int:
        """Bitmask of a set of labels; labels in ``ignore`` may be absent from the ground set."""
        ignore = set(ignore)
        mask = 0
        for e in elements:
            p = self._position.get(e)
            if p is None:
                if e in ignore:
                    continue
                raise GroundMismatchError(f"{e!r} is not in the ground set")
            mask |= 1 << p
        return mask

    def elements(self, mask: int) -> list:
        return [self.labels[p] for p in range(self.n) if mask >> p & 1]

    def value(self, elements: Iterable) -> Fraction:
        return self.values[self.mask_of(elements)]

    def scale(self, factor) -> "SetFunction":
        factor = Fraction(factor)
        return SetFunction(self.n, tuple(v * factor for v in self.values), self.labels)

    def to_json(self) -> dict:
        return {"n": self.n, "labels": list(self.labels), "values": [fmt(v) for v in self.values]}

    @classmethod
    def from_json(cls, obj: dict) -> "SetFunction":
        try:
            labels = tuple(tuple(x) if isinstance(x, list) else x for x in obj["labels"])
            return cls(int(obj["n"]), tuple(parse(v) for v in obj["values"]), labels)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SizeLimitError):
                raise
            raise SchemaError(f"not a set-function document: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def tabulate(oracle: Callable[[list], object], ground: Sequence) -> SetFunction:
    """Evaluate ``oracle`` on every subset of ``ground``."""
    n = len(ground)
    if n > MAX_GROUND:
        raise SizeLimitError(f"ground set of size {n} exceeds {MAX_GROUND}")
    ground = tuple(ground)
    values = []
    for mask in range(2**n):
        subset = [ground[p] for p in range(n) if mask >> p & 1]
        values.append(Fraction(oracle(subset)))
    return SetFunction(n, tuple(values), ground)


@dataclass(frozen=True)
class SubmodularityWitness:
    holds: bool
    subset: int | None = None  # mask A
    i: int | None = None  # bit positions
    j: int | None = None

    def describe(self, f: SetFunction) -> str:
        if self.holds:
            return "submodular"
        a = f.elements(self.subset)
        li, lj = f.labels[self.i], f.labels[self.j]
        base = self.subset
        lhs = f[base | 1 << self.i] + f[base | 1 << self.j]
        rhs = f[base | 1 << self.i | 1 << self.j] + f[base]
        return f"violation at A={a}, i={li!r}, j={lj!r}: {lhs} < {rhs}"


def local_violations(f: SetFunction, nonempty: bool = False):
    """Yield ``(i, j, A_masks, deficits)`` for each pair with a broken local inequality.

    With ``nonempty`` the base set ``A`` ranges over nonempty sets only.
    """
    v, _ = f.scaled
    masks = np.arange(1 if nonempty else 0, 2**f.n, dtype=np.int64)
    for i in range(f.n):
        bi = 1 << i
        for j in range(i + 1, f.n):
            bj = 1 << j
            a = masks[(masks & (bi | bj)) == 0]
            slack = v[a | bi] + v[a | bj] - v[a | bi | bj] - v[a]
            bad = slack < 0
            if np.any(bad):
                yield i, j, a[bad], slack[bad]


def is_submodular(f: SetFunction, nonempty: bool = False) -> SubmodularityWitness:
    """Check f(A+i) + f(A+j) >= f(A+i+j) + f(A) for every A and i, j outside A.

    Unrooted Steiner-type costs vanish on singletons and so fail at ``A = {}``;
    ``nonempty=True`` restricts the check to nonempty ``A``.
    """
    for i, j, a, _ in local_violations(f, nonempty):
        return SubmodularityWitness(False, int(a[0]), i, j)
    return SubmodularityWitness(True)


def marginal(f: SetFunction, S: Iterable, v) -> Fraction:
    mask = f.mask_of(S)
    bit = f.mask_of([v])
    if mask & bit:
        raise PreconditionError(f"{v!r} already belongs to the set")
    return f[mask | bit] - f[mask]


def permute_masks(perm: Sequence[int], n: int) -> np.ndarray:
    """Image of every mask under the position permutation ``p -> perm[p]``."""
    masks = np.arange(2**n, dtype=np.int64)
    out = np.zeros_like(masks)
    for p, q in enumerate(perm):
        out |= ((masks >> p) & 1) << q
    return out


def _check_perm(perm, n: int) -> list[int]:
    perm = [int(x) for x in perm]
    if sorted(perm) != list(range(n)):
        raise PreconditionError(f"{perm} is not a permutation of {n} positions")
    return perm


def positions_perm(f: SetFunction, perm) -> list[int]:
    """Convert a permutation of labels (``perm[label]``) into one of ground positions."""
    try:
        out = [f._position[perm[lab]] for lab in f.labels]
    except (KeyError, IndexError) as exc:
        raise GroundMismatchError(f"permutation does not map the ground set onto itself: {exc}") from exc
    return _check_perm(out, f.n)


def orbits(n: int, autos: Sequence[Sequence[int]]) -> np.ndarray:
    """Orbit id of every mask under the group generated by ``autos``."""
    size = 2**n
    src, dst = [], []
    for perm in autos:
        src.append(np.arange(size, dtype=np.int64))
        dst.append(permute_masks(_check_perm(perm, n), n))
    if not src:
        return np.arange(size)
    src, dst = np.concatenate(src), np.concatenate(dst)
    graph = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(size, size))
    _, comp = connected_components(graph, directed=False)
    return comp


def symmetrize(f: SetFunction, autos: Sequence[Sequence[int]]) -> SetFunction:
    """Average ``f`` over the group generated by ``autos``.

    A group average of ``f(sigma(L))`` equals the uniform average of ``f`` over
    the orbit of ``L``, so orbits are used instead of listing the group.
    """
    comp = orbits(f.n, autos)
    ints, denom = f.scaled
    ncomp = int(comp.max()) + 1
    sums = [0] * ncomp
    counts = np.bincount(comp, minlength=ncomp)
    for mask, c in enumerate(comp):
        sums[c] += int(ints[mask])
    avg = [Fraction(sums[c], denom * int(counts[c])) for c in range(ncomp)]
    return SetFunction(f.n, tuple(avg[c] for c in comp), f.labels)


def is_invariant(f: SetFunction, perm: Sequence[int]) -> bool:
    img = permute_masks(_check_perm(perm, f.n), f.n)
    return all(f.values[m] == f.values[int(img[m])] for m in range(2**f.n))


@dataclass(frozen=True)
class ChainRow:
    j: int
    f_level: Fraction  # f(D_j) or f(H_j)
    f_path: Fraction  # mean of f over the depth-j path family
    f_path_min: Fraction
    f_path_max: Fraction
    bound: Fraction | None  # f(D_{j-1}) + 2^j (f_j - f_{j-1})
    holds: bool


@dataclass(frozen=True)
class ChainReport:
    rows: tuple[ChainRow, ...]

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.rows)


def check_recursion_chain(f: SetFunction, inst, k: int) -> ChainReport:
    """Evaluate f(X_j) <= f(X_{j-1}) + 2^j (f_j - f_{j-1}) for j = 1..k.

    ``X_j`` is ``D_j`` (diamond) or ``H_j`` (HST) and ``f_j`` the mean of ``f``
    over the depth-``j`` path family.  With the mean, the right-hand side is
    exactly the sum of the per-path submodular steps, so the inequality holds
    for any submodular ``f``; for a symmetric ``f`` the mean is the common
    path value.  A diamond's root may be missing from the ground set (rooted
    cost functions) and is then dropped from every set.
    """
    if isinstance(inst, DiamondInstance):
        paths_of, ignore = (lambda j: enumerate_sr_paths(inst, j)), {inst.root}
    elif isinstance(inst, HstInstance):
        paths_of, ignore = (lambda j: rooted_paths_hst(inst, j)), set()
    else:
        raise PreconditionError(f"unsupported instance type {type(inst).__name__}")
    if not 0 <= k <= inst.depth:
        raise PreconditionError(f"chain depth {k} outside [0, {inst.depth}]")

    rows = []
    prev_level = prev_path = None
    for j in range(k + 1):
        level_val = f[f.mask_of(inst.vertices_up_to(j), ignore)]
        pvals = [f[f.mask_of(p, ignore)] for p in paths_of(j)]
        mean = sum(pvals, Fraction(0)) / len(pvals)
        if j == 0:
            bound, holds = None, level_val == mean
        else:
            bound = prev_level + 2**j * (mean - prev_path)
            holds = level_val <= bound
        rows.append(ChainRow(j, level_val, mean, min(pvals), max(pvals), bound, holds))
        prev_level, prev_path = level_val, mean
    return ChainReport(tuple(rows))
