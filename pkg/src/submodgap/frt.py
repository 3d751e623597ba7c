"""FRT tree embeddings and the submodular proxy built from them.

Distances are normalised by the smallest nonzero distance (the *unit*), so
level-0 clusters are singletons.  The root sits at level ``ceil(log2 diam)``
and holds every point.  Below it a level-``i`` cluster is cut with radius
``beta * 2^(i-2)`` (``beta`` in [1, 2)), hence has diameter below ``2^i``;
the edge from a level-``i`` node to its parent has length ``2^(i+1)``.  For
two points whose lowest common ancestor sits at level ``l`` this gives
``X_ij <= 2^l <= T_ij = 2^(l+2) - 4`` in normalised units.  Since every
child edge at level ``l`` is at least ``2^l``, joining sibling subtrees by
metric edges never costs more than the tree edges it replaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import InvariantViolation, PreconditionError, SizeLimitError
from .instances import Metric, WeightedGraph
from .setfn import SetFunction

MAX_PROXY_GROUND = 16


@dataclass(frozen=True, eq=False)
class FrtTree:
    tree: WeightedGraph
    level_of_vertex: tuple[int, ...]
    parent: tuple[int, ...]  # -1 at the root (vertex 0)
    leaf_of_point: tuple[int, ...]
    unit: Fraction  # metric length of one normalised unit
    beta: Fraction
    order: tuple[int, ...]  # centre permutation

    @property
    def top_level(self) -> int:
        return self.level_of_vertex[0]

    def edge_length(self, v: int) -> Fraction:
        """Length of the edge from ``v`` to its parent."""
        return 2 ** (self.level_of_vertex[v] + 1) * self.unit

    def lca(self, i: int, j: int) -> int:
        a, b = self.leaf_of_point[i], self.leaf_of_point[j]
        while a != b:
            a, b = self.parent[a], self.parent[b]
        return a

    def lca_level(self, i: int, j: int) -> int:
        return self.level_of_vertex[self.lca(i, j)]

    def distance(self, i: int, j: int) -> Fraction:
        if i == j:
            return Fraction(0)
        return (2 ** (self.lca_level(i, j) + 2) - 4) * self.unit

    def point_masks(self) -> list[int]:
        """Bitmask (over metric points) of the leaves below each vertex."""
        masks = [0] * self.tree.vertex_count
        for p, leaf in enumerate(self.leaf_of_point):
            v = leaf
            while v != -1:
                masks[v] |= 1 << p
                v = self.parent[v]
        return masks


def _beta_from_uniform(r64: int) -> Fraction:
    """Draw from the density 1/(x ln 2) on [1, 2) by inverse CDF: x = 2^u."""
    u = r64 / 2.0**64
    beta = Fraction(2.0**u)
    return min(max(beta, Fraction(1)), Fraction(2) - Fraction(1, 2**52))


def sample_frt_tree(m: Metric, seed: int) -> FrtTree:
    n = m.size
    if n < 2:
        raise PreconditionError("need at least two points")
    off = m.ints[~np.eye(n, dtype=bool)]
    if np.any(off <= 0):
        raise PreconditionError("degenerate metric: distinct points at distance 0")
    min_int = int(off.min())
    unit = Fraction(min_int, m.denom)
    norm = [[Fraction(int(x), min_int) for x in row] for row in m.ints]
    diam = max(max(row) for row in norm)
    top = 1
    while Fraction(2) ** top < diam:
        top += 1

    rng = np.random.default_rng(seed)
    order = tuple(int(x) for x in rng.permutation(n))
    beta = _beta_from_uniform(int(rng.integers(0, 2**64, dtype=np.uint64)))

    levels = [top]
    parent = [-1]
    clusters = [(0, list(range(n)))]  # (vertex id, points) at the current level
    leaf_of_point = [-1] * n
    for i in range(top - 1, -1, -1):
        radius = beta * Fraction(2) ** (i - 2)
        nxt = []
        for vid, pts in clusters:
            remaining = list(pts)
            for centre in order:
                if not remaining:
                    break
                part = [x for x in remaining if norm[centre][x] <= radius]
                if not part:
                    continue
                remaining = [x for x in remaining if norm[centre][x] > radius]
                child = len(levels)
                levels.append(i)
                parent.append(vid)
                nxt.append((child, part))
        clusters = nxt
    for vid, pts in clusters:
        if len(pts) != 1:
            raise InvariantViolation("level-0 cluster is not a singleton")
        leaf_of_point[pts[0]] = vid

    edges = tuple((parent[v], v, 2 ** (levels[v] + 1) * unit) for v in range(1, len(levels)))
    return FrtTree(
        WeightedGraph(len(levels), edges), tuple(levels), tuple(parent), tuple(leaf_of_point),
        unit, beta, order,
    )


def check_frt_tree(t: FrtTree, m: Metric) -> None:
    """Raise unless ``t`` dominates ``m`` and satisfies the 2-HST sandwich."""
    for i, j in combinations(range(m.size), 2):
        x = m.d(i, j)
        scale = 2 ** t.lca_level(i, j) * t.unit
        tij = t.distance(i, j)
        if not x <= scale <= tij:
            raise InvariantViolation(f"sandwich fails for ({i}, {j}): {x}, {scale}, {tij}")


def tree_steiner_cost(t: FrtTree, L: Iterable[int], root: int | None = None) -> Fraction:
    """Length of the minimal subtree of ``t`` spanning the leaves of ``L`` (and ``root``)."""
    target = 0
    L = list(L)
    if root is not None and L:
        L.append(root)
    for p in L:
        target |= 1 << p
    if target == 0:
        return Fraction(0)
    total = Fraction(0)
    for v, pm in enumerate(t.point_masks()):
        if v and pm & target and target & ~pm:
            total += t.edge_length(v)
    return total


def _check_root(ground: Sequence[int], root: int | None) -> None:
    if root is not None and root in ground:
        raise PreconditionError("the root must not belong to the ground set")


def tree_cost_table(t: FrtTree, ground: Sequence[int], root: int | None = None) -> SetFunction:
    """Tabulate ``c_T`` over ``ground`` (vectorised version of :func:`tree_steiner_cost`).

    With a ``root`` point, ``c_T(L)`` spans ``L`` plus the root, which keeps the
    function submodular at the empty set as well.
    """
    ground = tuple(ground)
    _check_root(ground, root)
    ints = _tree_cost_ints(t, ground, root)
    return SetFunction(len(ground), tuple(Fraction(int(x)) * t.unit for x in ints), ground)


def _tree_cost_ints(t: FrtTree, ground: Sequence[int], root: int | None = None) -> np.ndarray:
    """c_T in normalised units (integers) for every mask over ``ground``."""
    k = len(ground)
    masks = np.arange(2**k, dtype=np.int64)
    total = np.zeros(2**k, dtype=np.int64)
    full = 2**k - 1
    for v, pm in enumerate(t.point_masks()):
        if v == 0:
            continue
        gm = sum(1 << q for q, p in enumerate(ground) if pm >> p & 1)
        inside, outside = (masks & gm) != 0, (masks & (full ^ gm)) != 0
        if root is None:
            crossing = inside & outside
        elif pm >> root & 1:
            crossing = outside
        else:
            crossing = inside
        total += crossing * (2 ** (t.level_of_vertex[v] + 1))
    return total


@dataclass(frozen=True, eq=False)
class ProxyFunction:
    samples: tuple[FrtTree, ...]
    tabulation: SetFunction
    seed: int
    root: int | None = None


def proxy_function(
    m: Metric, ground: Sequence[int], num_samples: int, seed: int, root: int | None = None
) -> ProxyFunction:
    """Empirical mean of ``c_T`` over ``num_samples`` trees (sample ``s`` uses seed + s)."""
    ground = tuple(ground)
    _check_root(ground, root)
    if len(ground) > MAX_PROXY_GROUND:
        raise SizeLimitError(f"proxy ground set limited to {MAX_PROXY_GROUND} points")
    if num_samples < 1:
        raise PreconditionError("num_samples must be positive")
    samples = tuple(sample_frt_tree(m, seed + s) for s in range(num_samples))
    acc = np.zeros(2 ** len(ground), dtype=object)
    acc[:] = 0
    for t in samples:
        acc = acc + _tree_cost_ints(t, ground, root).astype(object)
    unit = samples[0].unit
    values = tuple(Fraction(int(x), num_samples) * unit for x in acc)
    return ProxyFunction(samples, SetFunction(len(ground), values, ground), seed, root)


def extract_spanning_subgraph(t: FrtTree, L: Iterable[int], m: Metric | None = None) -> list[tuple[int, int]]:
    """Metric edges connecting ``L``, built top-down from the tree.

    At the lowest common ancestor of the current group, the group splits into
    child subtrees; consecutive subtrees are joined by one metric edge between
    their smallest points (cost below ``2^level`` each), then each subtree is
    handled recursively.
    """
    L = sorted(set(L))
    if len(L) < 2:
        return []
    path_cache = {}

    def ancestors(p):
        if p not in path_cache:
            chain, v = [], t.leaf_of_point[p]
            while v != -1:
                chain.append(v)
                v = t.parent[v]
            path_cache[p] = chain[::-1]  # root first
        return path_cache[p]

    edges: list[tuple[int, int]] = []
    stack = [L]
    while stack:
        group = stack.pop()
        if len(group) < 2:
            continue
        chains = [ancestors(p) for p in group]
        depth = 0
        while all(len(c) > depth + 1 and c[depth + 1] == chains[0][depth + 1] for c in chains):
            depth += 1
        parts: dict[int, list[int]] = {}
        for p, c in zip(group, chains):
            parts.setdefault(c[depth + 1], []).append(p)
        subs = sorted(parts.values())
        for a, b in zip(subs, subs[1:]):
            edges.append((a[0], b[0]))
        stack.extend(subs)
    return edges


def metric_cost(m: Metric, edges: Iterable[tuple[int, int]]) -> Fraction:
    return sum((m.d(a, b) for a, b in edges), Fraction(0))


def distortion_rows(m: Metric, samples: Sequence[FrtTree]) -> list[tuple[int, int, Fraction, Fraction, Fraction]]:
    """Per pair: (i, j, X_ij, mean T_ij, max T_ij)."""
    rows = []
    for i, j in combinations(range(m.size), 2):
        ts = [t.distance(i, j) for t in samples]
        rows.append((i, j, m.d(i, j), sum(ts, Fraction(0)) / len(ts), max(ts)))
    return rows
