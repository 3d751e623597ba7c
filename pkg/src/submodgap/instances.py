"""Instance families: diamond graphs, binary HSTs and the matching universe.

Also hosts the two basic geometric containers, :class:`WeightedGraph` and
:class:`Metric`, which every other module consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import InvariantViolation, PreconditionError, SizeLimitError
from .rational import scaled_ints

MAX_DIAMOND_DEPTH = 8
MAX_HST_DEPTH = 8
MAX_UNIVERSE = 5
_FLOAT_EXACT = 2**53

Edge = tuple[int, int, Fraction]


@dataclass(frozen=True)
class WeightedGraph:
    vertex_count: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        for u, v, w in self.edges:
            if u == v:
                raise PreconditionError(f"self-loop at vertex {u}")
            if w <= 0:
                raise PreconditionError(f"edge ({u}, {v}) has non-positive length {w}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise PreconditionError(f"edge ({u}, {v}) out of range")

    def adjacency(self) -> list[dict[int, Fraction]]:
        adj: list[dict[int, Fraction]] = [{} for _ in range(self.vertex_count)]
        for u, v, w in self.edges:
            # parallel edges collapse to the shortest one
            if v not in adj[u] or w < adj[u][v]:
                adj[u][v] = w
                adj[v][u] = w
        return adj

    def total_length(self) -> Fraction:
        return sum((w for _, _, w in self.edges), Fraction(0))


@dataclass(frozen=True, eq=False)
class Metric:
    """Finite metric stored as ``ints / denom`` for exact, vectorisable access."""

    ints: np.ndarray
    denom: int

    @property
    def size(self) -> int:
        return self.ints.shape[0]

    @property
    def dist(self) -> list[list[Fraction]]:
        return [[Fraction(int(x), self.denom) for x in row] for row in self.ints]

    def d(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.ints[i, j]), self.denom)

    @classmethod
    def from_matrix(cls, matrix) -> "Metric":
        n = len(matrix)
        flat = [Fraction(x) for row in matrix for x in row]
        if len(flat) != n * n:
            raise PreconditionError("distance matrix must be square")
        ints, denom = scaled_ints(flat)
        return cls(ints.reshape(n, n), denom)

    def submetric(self, points) -> "Metric":
        idx = np.asarray(list(points), dtype=np.int64)
        return Metric(self.ints[np.ix_(idx, idx)].copy(), self.denom)

    def __eq__(self, other):
        if not isinstance(other, Metric):
            return NotImplemented
        return self.dist == other.dist


def check_metric(m: Metric) -> None:
    """Raise :class:`InvariantViolation` unless ``m`` is a metric (exactly)."""
    a = m.ints
    if not np.array_equal(a, a.T):
        raise InvariantViolation("metric not symmetric")
    if np.any(np.diag(a) != 0):
        raise InvariantViolation("metric has nonzero diagonal")
    if np.any(a < 0):
        raise InvariantViolation("metric has negative entries")
    for k in range(m.size):
        if np.any(a[:, k : k + 1] + a[k : k + 1, :] < a):
            raise InvariantViolation(f"triangle inequality fails through point {k}")


def metric_closure(g: WeightedGraph) -> Metric:
    """Exact all-pairs shortest-path metric of a connected graph."""
    n = g.vertex_count
    if n == 0:
        raise PreconditionError("empty graph")
    # parallel edges collapse to the shortest (a sparse matrix would sum them)
    edges = [(u, v, w) for u, nbrs in enumerate(g.adjacency()) for v, w in nbrs.items() if u < v]
    ints, denom = scaled_ints([w for _, _, w in edges]) if edges else (np.zeros(0, np.int64), 1)
    if len(ints) and int(max(ints)) * n >= _FLOAT_EXACT:
        raise SizeLimitError("edge lengths too fine for exact shortest paths")
    rows = [u for u, _, _ in edges]
    cols = [v for _, v, _ in edges]
    mat = coo_matrix((np.asarray(ints, dtype=np.float64), (rows, cols)), shape=(n, n)).tocsr()
    ncomp, _ = connected_components(mat, directed=False)
    if ncomp != 1:
        raise PreconditionError("graph is disconnected")
    # integer weights below 2**53: float shortest paths are exact
    dist = shortest_path(mat, method="D", directed=False)
    return Metric(np.rint(dist).astype(np.int64), denom)


# ---------------------------------------------------------------- diamonds


@dataclass(frozen=True, eq=False)
class DiamondInstance:
    """Diamond graph ``D_k`` with its construction history.

    ``splits`` maps every oriented edge ``(a, b)`` of level ``j < k`` (``a`` on
    the S side) to the pair ``(left, right)`` of level-``j+1`` vertices that
    subdivide its two copies.
    """

    graph: WeightedGraph
    level_of_vertex: tuple[int, ...]
    side_of_vertex: tuple[str, ...]
    source: int
    root: int
    depth: int
    edges_by_level: tuple[tuple[tuple[int, int], ...], ...]
    splits: dict = field(repr=False)

    def vertices_up_to(self, j: int) -> frozenset[int]:
        return frozenset(v for v, lvl in enumerate(self.level_of_vertex) if lvl <= j)

    def level_graph(self, j: int) -> WeightedGraph:
        """``D_j`` as a graph on its own vertices (ids shared with ``D_k``)."""
        w = Fraction(1, 2**j)
        return WeightedGraph(self.graph.vertex_count, tuple((a, b, w) for a, b in self.edges_by_level[j]))


def build_diamond(k: int) -> DiamondInstance:
    if not 0 <= k <= MAX_DIAMOND_DEPTH:
        raise SizeLimitError(f"diamond depth must be in [0, {MAX_DIAMOND_DEPTH}], got {k}")
    S, R = 0, 1
    levels = [0, 0]
    sides = ["none", "none"]
    current = [(S, R)]
    by_level = [tuple(current)]
    splits: dict[tuple[int, int], tuple[int, int]] = {}
    for j in range(1, k + 1):
        nxt = []
        for a, b in current:
            left, right = len(levels), len(levels) + 1
            levels += [j, j]
            sides += ["left", "right"]
            splits[(a, b)] = (left, right)
            nxt += [(a, left), (left, b), (a, right), (right, b)]
        current = nxt
        by_level.append(tuple(current))
    w = Fraction(1, 2**k)
    graph = WeightedGraph(len(levels), tuple((a, b, w) for a, b in current))
    return DiamondInstance(graph, tuple(levels), tuple(sides), S, R, k, tuple(by_level), splits)


def diamond_vertex_count(k: int) -> int:
    return 2 * (4**k - 1) // 3 + 2


def _sr_paths_with_edges(inst: DiamondInstance, i: int):
    paths = [(frozenset((inst.source, inst.root)), ((inst.source, inst.root),))]
    for _ in range(i):
        nxt = []
        for verts, edges in paths:
            for pick in (0, 1):
                new_edges = []
                new_verts = set(verts)
                for a, b in edges:
                    x = inst.splits[(a, b)][pick]
                    new_verts.add(x)
                    new_edges += [(a, x), (x, b)]
                nxt.append((frozenset(new_verts), tuple(new_edges)))
        paths = nxt
    return paths


def enumerate_sr_paths(inst: DiamondInstance, i: int) -> list[frozenset[int]]:
    """The path family of depth ``i``: each path extended by all-left or all-right vertices."""
    if not 0 <= i <= inst.depth:
        raise PreconditionError(f"path depth {i} outside [0, {inst.depth}]")
    return [verts for verts, _ in _sr_paths_with_edges(inst, i)]


def _mirror(inst: DiamondInstance, e1, e2, perm: list[int]) -> None:
    """Swap the sub-diamonds hanging below corresponding edges ``e1`` and ``e2``."""
    if e1 not in inst.splits:
        return
    l1, r1 = inst.splits[e1]
    l2, r2 = inst.splits[e2]
    perm[l1], perm[l2] = l2, l1
    perm[r1], perm[r2] = r2, r1
    (a1, b1), (a2, b2) = e1, e2
    for x1, x2 in ((l1, l2), (r1, r2)):
        _mirror(inst, (a1, x1), (a2, x2), perm)
        _mirror(inst, (x1, b1), (x2, b2), perm)


def diamond_generators(inst: DiamondInstance) -> list[list[int]]:
    """One half-swap per split edge; together they generate Aut(D_k) fixing S, R."""
    n = inst.graph.vertex_count
    gens = []
    for j in range(inst.depth):
        for a, b in inst.edges_by_level[j]:
            left, right = inst.splits[(a, b)]
            perm = list(range(n))
            perm[left], perm[right] = right, left
            _mirror(inst, (a, left), (a, right), perm)
            _mirror(inst, (left, b), (right, b), perm)
            gens.append(perm)
    return gens


def generate_group(gens: list[list[int]], n: int, limit: int = 10**6) -> list[tuple[int, ...]] | None:
    """Closure of ``gens`` under composition; ``None`` if it exceeds ``limit``."""
    ident = tuple(range(n))
    seen = {ident}
    order = [ident]
    frontier = [ident]
    gens = [tuple(g) for g in gens]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(g[x] for x in p)
                if q not in seen:
                    seen.add(q)
                    order.append(q)
                    nxt.append(q)
                    if len(seen) > limit:
                        return None
        frontier = nxt
    return sorted(order)


def diamond_automorphisms(inst: DiamondInstance) -> list[list[int]]:
    """Full automorphism list for depth <= 2, generators beyond that."""
    gens = diamond_generators(inst)
    if inst.depth > 2:
        return gens
    return [list(p) for p in generate_group(gens, inst.graph.vertex_count)]


def automorphism_count(depth: int) -> int:
    count = 1
    for _ in range(depth):
        count = 2 * count**4
    return count


# ---------------------------------------------------------------- HSTs


@dataclass(frozen=True, eq=False)
class HstInstance:
    """Binary HST for the facility-location construction.

    Client-bearing vertices sit at depths ``0..d`` (heap numbering, root 0).
    Facilities are an extra layer of leaves at depth ``d+1``, two below each
    depth-``d`` vertex, attached by edges of length ``beta``.  Edges leaving a
    depth-``k`` vertex downwards have length ``alpha**k`` for ``k < d``.
    """

    tree: WeightedGraph
    depth: int
    alpha: Fraction
    beta: Fraction
    facility_cost: Fraction
    clients_of_vertex: tuple[int, ...]
    facilities: tuple[int, ...]
    depth_of_vertex: tuple[int, ...]
    parent: tuple[int, ...]

    @property
    def client_vertices(self) -> tuple[int, ...]:
        return tuple(range(2 ** (self.depth + 1) - 1))

    def children(self, v: int) -> tuple[int, ...]:
        c = (2 * v + 1, 2 * v + 2)
        return c if c[0] < self.tree.vertex_count else ()

    def edge_to_parent(self, v: int) -> Fraction:
        dp = self.depth_of_vertex[v] - 1
        return self.beta if dp == self.depth else self.alpha**dp

    def height(self, v: int) -> Fraction:
        """Distance from ``v`` down to any facility leaf below it."""
        k = self.depth_of_vertex[v]
        if k == self.depth + 1:
            return Fraction(0)
        return sum((self.alpha**i for i in range(k, self.depth)), Fraction(0)) + self.beta

    def vertices_up_to(self, j: int) -> frozenset[int]:
        return frozenset(range(2 ** (j + 1) - 1))


def build_hst(d: int, alpha) -> HstInstance:
    alpha = Fraction(alpha)
    if not 1 <= d <= MAX_HST_DEPTH:
        raise SizeLimitError(f"HST depth must be in [1, {MAX_HST_DEPTH}], got {d}")
    if not (0 < alpha < 1 and alpha.numerator == 1):
        raise PreconditionError(f"alpha must be 1/m with integer m >= 2, got {alpha}")
    beta = alpha**d + alpha ** (d + 1) / (1 - alpha)
    n = 2 ** (d + 2) - 1
    depth_of = [0] * n
    parent = [-1] * n
    edges = []
    for v in range(1, n):
        p = (v - 1) // 2
        parent[v] = p
        depth_of[v] = depth_of[p] + 1
        length = beta if depth_of[p] == d else alpha ** depth_of[p]
        edges.append((p, v, length))
    m = alpha.denominator
    clients = tuple(m**k if k <= d else 0 for k in depth_of)
    facilities = tuple(v for v in range(n) if depth_of[v] == d + 1)
    return HstInstance(
        WeightedGraph(n, tuple(edges)), d, alpha, beta, 2 / alpha, clients, facilities,
        tuple(depth_of), tuple(parent),
    )


def rooted_paths_hst(inst: HstInstance, i: int) -> list[frozenset[int]]:
    """All client-level paths with ``i`` edges starting at the root, left to right."""
    if not 0 <= i <= inst.depth:
        raise PreconditionError(f"path length {i} outside [0, {inst.depth}]")
    paths = []
    for end in range(2**i - 1, 2 ** (i + 1) - 1):
        verts, v = [], end
        while v >= 0:
            verts.append(v)
            v = inst.parent[v]
        paths.append(frozenset(verts))
    return paths


# ---------------------------------------------------------------- matching


@dataclass(frozen=True)
class BipartiteInstance:
    """``U`` of size ``u_size`` and one ``V`` vertex per nonempty subset of ``U``.

    ``v_vertices[i]`` is the neighbourhood of ``V`` vertex ``i``; index ``i``
    corresponds to bitmask ``i + 1``.
    """

    u_size: int
    v_vertices: tuple[frozenset[int], ...]
    requests: tuple[int, ...] = ()

    def with_requests(self, requests) -> "BipartiteInstance":
        requests = tuple(requests)
        for r in requests:
            if not 0 <= r < len(self.v_vertices):
                raise PreconditionError(f"request {r} is not a V vertex")
        return BipartiteInstance(self.u_size, self.v_vertices, requests)

    def v_index(self, subset) -> int:
        mask = sum(1 << u for u in subset)
        if not 0 < mask < 2**self.u_size:
            raise PreconditionError(f"{subset} is not a nonempty subset of U")
        return mask - 1


def build_matching_universe(u_size: int) -> BipartiteInstance:
    if not 1 <= u_size <= MAX_UNIVERSE:
        raise SizeLimitError(f"u_size must be in [1, {MAX_UNIVERSE}], got {u_size}")
    vs = tuple(frozenset(u for u in range(u_size) if mask >> u & 1) for mask in range(1, 2**u_size))
    return BipartiteInstance(u_size, vs)
