"""Exact solvers: Steiner tree, facility location on HSTs, bipartite matching."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import InvariantViolation, PreconditionError, SizeLimitError
from .instances import BipartiteInstance, DiamondInstance, HstInstance, Metric, metric_closure
from .setfn import SetFunction, tabulate

MAX_STEINER_TERMINALS = 14
MAX_STEINER_TABLE = 16
MAX_UFL_ENUMERATION_DEPTH = 3
MAX_MATCHING_TABLE = 20
_INF = np.int64(2**60)


# ---------------------------------------------------------------- Steiner


@dataclass(frozen=True)
class SteinerSolution:
    cost: Fraction
    tree_edges: tuple[tuple[int, int], ...]


def _submask_table(mask: int) -> np.ndarray:
    """Proper submasks of ``mask`` that contain its lowest bit."""
    low = mask & -mask
    rest = mask ^ low
    bits = [b for b in range(rest.bit_length()) if rest >> b & 1]
    idx = np.arange(2 ** len(bits), dtype=np.int64)
    subs = np.full_like(idx, low)
    for k, b in enumerate(bits):
        subs |= ((idx >> k) & 1) << b
    return subs[subs != mask]


class SteinerDP:
    """Dreyfus-Wagner table over a metric.

    ``cost[mask, v]`` is the cheapest tree spanning the terminals in ``mask``
    together with point ``v`` (any metric point may serve as a Steiner point).
    """

    def __init__(self, metric: Metric, terminals: Sequence[int]):
        self.metric = metric
        self.terminals = tuple(terminals)
        k, n = len(self.terminals), metric.size
        dist = metric.ints.astype(np.int64)
        size = 2**k
        self.cost = np.zeros((size, n), dtype=np.int64)
        self.via = np.zeros((size, n), dtype=np.int64)
        self.split = np.zeros((size, n), dtype=np.int64)
        cols = np.arange(n)
        for mask in range(1, size):
            if mask & (mask - 1) == 0:
                best = np.full(n, _INF, dtype=np.int64)
                best[self.terminals[mask.bit_length() - 1]] = 0
                bsplit = np.zeros(n, dtype=np.int64)
            else:
                subs = _submask_table(mask)
                cand = self.cost[subs] + self.cost[mask ^ subs]
                arg = np.argmin(cand, axis=0)
                best = cand[arg, cols]
                bsplit = subs[arg]
            tot = best[:, None] + dist
            u = np.argmin(tot, axis=0)
            self.cost[mask] = tot[u, cols]
            self.via[mask] = u
            self.split[mask] = bsplit

    def value(self, mask: int, v: int) -> Fraction:
        return Fraction(int(self.cost[mask, v]), self.metric.denom)

    def tree(self, mask: int, v: int) -> list[tuple[int, int]]:
        edges: list[tuple[int, int]] = []
        stack = [(mask, v)]
        while stack:
            m, x = stack.pop()
            u = int(self.via[m, x])
            if u != x:
                edges.append((min(u, x), max(u, x)))
            if m & (m - 1):
                sub = int(self.split[m, u])
                stack += [(sub, u), (m ^ sub, u)]
        return edges


def steiner_exact(metric: Metric, terminals: Iterable[int], root: int | None = None) -> SteinerSolution:
    """Optimal Steiner tree over ``terminals`` (plus ``root`` when given)."""
    terms = sorted(set(terminals) | ({root} if root is not None else set()))
    for t in terms:
        if not 0 <= t < metric.size:
            raise PreconditionError(f"terminal {t} is not a metric point")
    if len(terms) > MAX_STEINER_TERMINALS:
        raise SizeLimitError(f"{len(terms)} terminals exceed the limit of {MAX_STEINER_TERMINALS}")
    if len(terms) <= 1:
        return SteinerSolution(Fraction(0), ())
    anchor = root if root is not None else terms[0]
    others = [t for t in terms if t != anchor]
    dp = SteinerDP(metric, others)
    full = 2 ** len(others) - 1
    edges = dp.tree(full, anchor)
    cost = dp.value(full, anchor)
    if sum((metric.d(a, b) for a, b in edges), Fraction(0)) != cost:
        raise InvariantViolation("Steiner certificate does not match its cost")
    return SteinerSolution(cost, tuple(sorted(set(edges))))


def steiner_cost_table(metric: Metric, ground: Sequence[int], root: int | None = None) -> SetFunction:
    """Tabulate the Steiner cost over all subsets of ``ground`` with one DP run.

    Rooted: value(L) = cost of L plus ``root`` (0 on the empty set).
    Unrooted: value(L) = cost of L (0 on sets of size <= 1).
    """
    ground = tuple(ground)
    if len(ground) > MAX_STEINER_TABLE:
        raise SizeLimitError(f"ground set of size {len(ground)} exceeds {MAX_STEINER_TABLE}")
    if root is not None and root in ground:
        raise PreconditionError("root must not belong to the ground set")
    dp = SteinerDP(metric, ground)
    if root is not None:
        ints = dp.cost[:, root].copy()
    else:
        ints = dp.cost.min(axis=1)
    ints[0] = 0
    values = tuple(Fraction(int(x), metric.denom) for x in ints)
    return SetFunction(len(ground), values, ground)


def rooted_steiner_table(inst: DiamondInstance, metric: Metric | None = None) -> SetFunction:
    """Rooted cost c(L) = Steiner(L + R) over the ground set V minus R."""
    metric = metric or metric_closure(inst.graph)
    ground = [v for v in range(inst.graph.vertex_count) if v != inst.root]
    return steiner_cost_table(metric, ground, root=inst.root)


def minimum_spanning_tree_cost(vertices: Iterable[int], edges) -> Fraction:
    """Kruskal on exact lengths; raises if the vertices are not connected."""
    vertices = sorted(set(vertices))
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    total, used = Fraction(0), 0
    for u, v, w in sorted(edges, key=lambda e: (e[2], e[0], e[1])):
        if u not in parent or v not in parent:
            continue
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            total += w
            used += 1
    if used != len(vertices) - 1:
        raise PreconditionError("vertex set is not connected")
    return total


def spanning_tree_cost(inst: DiamondInstance, j: int) -> Fraction:
    """MST cost of the level-``j`` diamond ``D_j``."""
    if not 0 <= j <= inst.depth:
        raise PreconditionError(f"level {j} outside [0, {inst.depth}]")
    g = inst.level_graph(j)
    return minimum_spanning_tree_cost(inst.vertices_up_to(j), g.edges)


# ---------------------------------------------------------------- facility location


@dataclass(frozen=True)
class UflSolution:
    cost: Fraction
    open_facilities: tuple[int, ...]
    assignment: dict  # client vertex -> facility; every copy on a vertex shares it

    def assignment_copies(self, inst: HstInstance) -> dict[tuple[int, int], int]:
        return {
            (v, c): f for v, f in self.assignment.items() for c in range(inst.clients_of_vertex[v])
        }


def _check_clients(inst: HstInstance, client_vertices) -> frozenset[int]:
    clients = frozenset(client_vertices)
    bad = [v for v in clients if not (0 <= v < inst.tree.vertex_count and inst.clients_of_vertex[v] > 0)]
    if bad:
        raise PreconditionError(f"vertices {sorted(bad)} carry no clients")
    return clients


def _assign_nearest(inst: HstInstance, clients, opened) -> tuple[Fraction, dict]:
    """Route each client vertex to its nearest open facility (leftmost on ties)."""
    opened = sorted(opened)
    below: dict[int, int] = {}
    for f in opened:
        v = f
        while v >= 0 and v not in below:
            below[v] = f
            v = inst.parent[v]
    cost = inst.facility_cost * len(opened)
    assignment = {}
    for w in sorted(clients):
        up, u = Fraction(0), w
        while u not in below:
            up += inst.edge_to_parent(u)
            u = inst.parent[u]
        assignment[w] = below[u]
        cost += inst.clients_of_vertex[w] * (up + inst.height(u))
    return cost, assignment


def ufl_exact(inst: HstInstance, client_vertices: Iterable[int]) -> UflSolution:
    """Optimal facility location on the HST by a bottom-up tree DP.

    Every facility leaf below a node is equidistant from it, so a subtree
    is summarised by whether it opens a facility.  A subtree with no open
    facility sends all its clients through its root to a facility at known
    distance, which makes that branch linear in client weight.
    """
    clients = _check_clients(inst, client_vertices)
    if not clients:
        return UflSolution(Fraction(0), (), {})
    n = inst.tree.vertex_count
    weight = [0] * n  # selected clients in subtree
    spread = [Fraction(0)] * n  # sum of weight * distance to subtree root
    open_cost = [Fraction(0)] * n
    choice: list[tuple[int, ...]] = [()] * n
    for v in range(n - 1, -1, -1):
        kids = inst.children(v)
        own = inst.clients_of_vertex[v] if v in clients else 0
        weight[v] = own + sum(weight[c] for c in kids)
        spread[v] = sum((spread[c] + weight[c] * inst.edge_to_parent(c) for c in kids), Fraction(0))
        if not kids:
            open_cost[v] = inst.facility_cost
            continue
        h = inst.height(v)
        best = None
        for r in range(1, len(kids) + 1):
            for picked in combinations(kids, r):
                total = own * h
                for c in kids:
                    if c in picked:
                        total += open_cost[c]
                    else:
                        total += weight[c] * (inst.edge_to_parent(c) + h) + spread[c]
                if best is None or total < best:
                    best, choice[v] = total, picked
        open_cost[v] = best

    opened, stack = [], [0]
    while stack:
        v = stack.pop()
        if not inst.children(v):
            opened.append(v)
        stack.extend(choice[v])
    cost, assignment = _assign_nearest(inst, clients, opened)
    if cost != open_cost[0]:
        raise InvariantViolation(f"UFL certificate cost {cost} != DP value {open_cost[0]}")
    return UflSolution(cost, tuple(sorted(opened)), assignment)


def ufl_by_enumeration(inst: HstInstance, client_vertices: Iterable[int]) -> Fraction:
    """Minimum over all nonempty facility subsets with nearest-facility routing."""
    if inst.depth > MAX_UFL_ENUMERATION_DEPTH:
        raise SizeLimitError(f"enumeration limited to depth {MAX_UFL_ENUMERATION_DEPTH}")
    clients = _check_clients(inst, client_vertices)
    if not clients:
        return Fraction(0)
    metric = metric_closure(inst.tree)
    fac = inst.facilities
    mult = {w: inst.clients_of_vertex[w] for w in clients}
    best = None
    for r in range(1, len(fac) + 1):
        for opened in combinations(fac, r):
            total = inst.facility_cost * r
            for w, m in mult.items():
                total += m * min(metric.d(w, f) for f in opened)
            if best is None or total < best:
                best = total
    return best


def ufl_cost_table(inst: HstInstance, ground: Sequence[int] | None = None) -> SetFunction:
    ground = tuple(inst.client_vertices if ground is None else ground)
    cache = {}

    def oracle(subset):
        key = frozenset(subset)
        if key not in cache:
            cache[key] = ufl_exact(inst, key).cost
        return cache[key]

    return tabulate(oracle, ground)


# ---------------------------------------------------------------- matching


@dataclass(frozen=True)
class MatchingDecomposition:
    even: frozenset
    odd: frozenset
    free: frozenset
    matching: tuple[tuple[tuple[str, int], tuple[str, int]], ...]


def _request_adjacency(inst: BipartiteInstance, requests: Sequence[int]) -> list[list[int]]:
    adj = []
    for r in requests:
        if not 0 <= r < len(inst.v_vertices):
            raise PreconditionError(f"request {r} is not a V vertex")
        adj.append(sorted(inst.v_vertices[r]))
    return adj


def _kuhn(adj: list[list[int]], u_size: int) -> tuple[list[int], list[int]]:
    """Maximum matching by repeated augmenting-path search from each request."""
    mate_u = [-1] * u_size
    mate_r = [-1] * len(adj)

    def augment(r, seen):
        for u in adj[r]:
            if u in seen:
                continue
            seen.add(u)
            if mate_u[u] == -1 or augment(mate_u[u], seen):
                mate_u[u], mate_r[r] = r, u
                return True
        return False

    for r in range(len(adj)):
        augment(r, set())
    return mate_u, mate_r


def max_matching(inst: BipartiteInstance, requests: Sequence[int] = None) -> int:
    """Size of a maximum matching between ``U`` and the request copies."""
    requests = inst.requests if requests is None else tuple(requests)
    _, mate_r = _kuhn(_request_adjacency(inst, requests), inst.u_size)
    return sum(1 for u in mate_r if u != -1)


def even_odd_free(inst: BipartiteInstance, requests: Sequence[int] = None) -> MatchingDecomposition:
    """Alternating-path classification w.r.t. one fixed maximum matching.

    Vertices are labelled ``("u", i)`` and ``("r", c)`` where ``c`` indexes
    the request copy.
    """
    requests = inst.requests if requests is None else tuple(requests)
    adj = _request_adjacency(inst, requests)
    mate_u, mate_r = _kuhn(adj, inst.u_size)
    nbrs = {("u", u): [] for u in range(inst.u_size)}
    mate = {}
    for c, us in enumerate(adj):
        nbrs[("r", c)] = [("u", u) for u in us]
        for u in us:
            nbrs[("u", u)].append(("r", c))
        if mate_r[c] != -1:
            mate[("r", c)] = ("u", mate_r[c])
            mate[("u", mate_r[c])] = ("r", c)

    even = {x for x in nbrs if x not in mate}
    odd = set()
    queue = sorted(even)
    while queue:
        a = queue.pop()
        for b in nbrs[a]:
            if mate.get(a) == b or b in odd:
                continue
            if b not in mate:
                raise InvariantViolation(f"augmenting path reaches {b}: matching not maximum")
            odd.add(b)
            c = mate[b]
            if c not in even:
                even.add(c)
                queue.append(c)
    if even & odd:
        raise InvariantViolation("a vertex is both EVEN and ODD")
    free = set(nbrs) - even - odd
    pairs = tuple(sorted((("u", mate_r[c]), ("r", c)) for c in range(len(adj)) if mate_r[c] != -1))
    return MatchingDecomposition(frozenset(even), frozenset(odd), frozenset(free), pairs)


def always_matched(inst: BipartiteInstance, requests: Sequence[int], u: int) -> bool:
    """True iff ``U`` vertex ``u`` is covered by every maximum matching."""
    return ("u", u) not in even_odd_free(inst, requests).even


def matching_table(inst: BipartiteInstance, requests: Sequence[int] | None = None) -> SetFunction:
    """Tabulate ``m_U`` over the request copies; labels are ``(v_index, copy)``."""
    requests = inst.requests if requests is None else tuple(requests)
    seen: dict[int, int] = {}
    labels = []
    for r in requests:
        labels.append((r, seen.get(r, 0)))
        seen[r] = seen.get(r, 0) + 1
    adj = _request_adjacency(inst, requests)
    if len(adj) > MAX_MATCHING_TABLE:
        raise SizeLimitError(f"matching table limited to {MAX_MATCHING_TABLE} request copies")
    # Koenig: maximum matching = minimum vertex cover.  A cover takes some
    # X within U plus every request with a neighbour outside X.
    masks = np.arange(2 ** len(adj), dtype=np.int64)
    best = np.full(len(masks), len(adj) + inst.u_size, dtype=np.int64)
    for x in range(2**inst.u_size):
        outside = sum(1 << c for c, us in enumerate(adj) if any(not x >> u & 1 for u in us))
        covers = _popcount(masks & outside) + bin(x).count("1")
        np.minimum(best, covers, out=best)
    return SetFunction(len(adj), tuple(Fraction(int(v)) for v in best), tuple(labels))


def _popcount(a: np.ndarray) -> np.ndarray:
    count = np.zeros_like(a)
    while np.any(a):
        count += a & 1
        a = a >> 1
    return count
