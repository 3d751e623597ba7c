from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from submodgap.errors import InvariantViolation, PreconditionError, SizeLimitError
from submodgap.instances import (
    Metric,
    WeightedGraph,
    automorphism_count,
    build_diamond,
    build_hst,
    build_matching_universe,
    check_metric,
    diamond_automorphisms,
    diamond_generators,
    diamond_vertex_count,
    enumerate_sr_paths,
    generate_group,
    metric_closure,
    rooted_paths_hst,
)


def floyd_warshall(g: WeightedGraph):
    n = g.vertex_count
    inf = None
    d = [[Fraction(0) if i == j else inf for j in range(n)] for i in range(n)]
    for u, v, w in g.edges:
        if d[u][v] is None or w < d[u][v]:
            d[u][v] = d[v][u] = w
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] is not None and d[k][j] is not None:
                    alt = d[i][k] + d[k][j]
                    if d[i][j] is None or alt < d[i][j]:
                        d[i][j] = alt
    return d


# ---------------------------------------------------------------- diamonds


@pytest.mark.parametrize("k", range(7))
def test_diamond_counts_match_recurrence(k):
    # each refinement keeps the vertices and adds two per edge; edges quadruple
    v, e = 2, 1
    for _ in range(k):
        v, e = v + 2 * e, 4 * e
    inst = build_diamond(k)
    assert inst.graph.vertex_count == v == diamond_vertex_count(k)
    assert len(inst.graph.edges) == e == 4**k


@pytest.mark.parametrize("k", range(5))
def test_diamond_lengths_and_sr_distance(k):
    inst = build_diamond(k)
    assert {w for *_, w in inst.graph.edges} == {Fraction(1, 2**k)}
    m = metric_closure(inst.graph)
    assert m.d(inst.source, inst.root) == 1


def test_diamond_levels_nest():
    inst = build_diamond(3)
    for j in range(4):
        verts = inst.vertices_up_to(j)
        assert len(verts) == diamond_vertex_count(j)
        used = {x for a, b in inst.edges_by_level[j] for x in (a, b)}
        assert used == verts


def test_build_diamond_limits():
    with pytest.raises(SizeLimitError):
        build_diamond(9)
    with pytest.raises(SizeLimitError):
        build_diamond(-1)


def _all_shortest_sr_paths(inst, j):
    """Vertex sets of every S-R path of length 1 in D_j, by depth-first search."""
    g = inst.level_graph(j)
    adj = g.adjacency()
    out = set()

    def walk(v, seen, length):
        if length > 1:
            return
        if v == inst.root:
            if length == 1:
                out.add(frozenset(seen))
            return
        for u, w in adj[v].items():
            if u not in seen:
                walk(u, seen | {u}, length + w)

    walk(inst.source, {inst.source}, Fraction(0))
    return out


@pytest.mark.parametrize("i", range(4))
def test_sr_paths_partition_and_are_shortest(i):
    inst = build_diamond(3)
    paths = enumerate_sr_paths(inst, i)
    assert len(paths) == 2**i
    assert len(set(paths)) == 2**i
    shortest = _all_shortest_sr_paths(inst, i)
    assert set(paths) <= shortest
    level_i = [v for v, lvl in enumerate(inst.level_of_vertex) if lvl == i]
    for v in level_i if i else []:
        assert sum(v in p for p in paths) == 1
    assert frozenset().union(*paths) == inst.vertices_up_to(i)
    for p in paths:
        assert len(p) == 2**i + 1


def test_sr_paths_d1_example():
    paths = enumerate_sr_paths(build_diamond(1), 1)
    assert sorted(map(sorted, paths)) == [[0, 1, 2], [0, 1, 3]]


def _automorphisms_by_search(inst):
    """All adjacency-preserving bijections fixing S and R (backtracking)."""
    n = inst.graph.vertex_count
    adj = [set(a) for a in inst.graph.adjacency()]
    order = sorted(range(n), key=lambda v: inst.level_of_vertex[v])
    found = []

    def extend(perm, used, idx):
        if idx == n:
            found.append(tuple(perm))
            return
        v = order[idx]
        fixed = {inst.source: inst.source, inst.root: inst.root}
        cands = [fixed[v]] if v in fixed else range(n)
        for x in cands:
            if x in used or len(adj[x]) != len(adj[v]):
                continue
            if all((perm[u] in adj[x]) == (u in adj[v]) for u in order[:idx]):
                perm[v] = x
                extend(perm, used | {x}, idx + 1)
        perm[v] = -1

    extend([-1] * n, set(), 0)
    return sorted(found)


@pytest.mark.parametrize("k", [1, 2])
def test_automorphisms_match_brute_force(k):
    inst = build_diamond(k)
    assert sorted(map(tuple, diamond_automorphisms(inst))) == _automorphisms_by_search(inst)
    assert len(diamond_automorphisms(inst)) == automorphism_count(k)


def test_automorphism_counts():
    assert [automorphism_count(k) for k in range(3)] == [1, 2, 32]
    assert len(diamond_generators(build_diamond(3))) == (4**3 - 1) // 3


def test_generators_preserve_edges():
    inst = build_diamond(3)
    edges = {frozenset((a, b)) for a, b, _ in inst.graph.edges}
    for g in diamond_generators(inst):
        assert {frozenset((g[a], g[b])) for a, b in map(tuple, edges)} == edges
        assert g[inst.source] == inst.source and g[inst.root] == inst.root


def test_generate_group_limit():
    inst = build_diamond(3)
    assert generate_group(diamond_generators(inst), inst.graph.vertex_count, limit=100) is None


# ---------------------------------------------------------------- metrics


@st.composite
def connected_graphs(draw, max_n=7):
    n = draw(st.integers(2, max_n))
    weight = st.fractions(min_value=Fraction(1, 8), max_value=4, max_denominator=8)
    edges = [(i, draw(st.integers(0, i - 1)), draw(weight)) for i in range(1, n)]
    for _ in range(draw(st.integers(0, n))):
        a, b = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        if a != b:
            edges.append((a, b, draw(weight)))
    return WeightedGraph(n, tuple(edges))


@given(connected_graphs())
def test_metric_closure_matches_floyd_warshall(g):
    m = metric_closure(g)
    assert m.dist == floyd_warshall(g)
    check_metric(m)


def test_check_metric_rejects_triangle_violation():
    m = Metric.from_matrix([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    with pytest.raises(InvariantViolation):
        check_metric(m)


def test_disconnected_graph_rejected():
    with pytest.raises(PreconditionError):
        metric_closure(WeightedGraph(3, ((0, 1, Fraction(1)),)))


def test_submetric():
    m = metric_closure(build_diamond(1).graph)
    sub = m.submetric([0, 1])
    assert sub.dist == [[0, 1], [1, 0]]


# ---------------------------------------------------------------- HSTs


@pytest.mark.parametrize("d,alpha", [(1, Fraction(1, 2)), (2, Fraction(1, 2)), (3, Fraction(1, 3)), (4, Fraction(1, 2))])
def test_hst_invariants(d, alpha):
    inst = build_hst(d, alpha)
    assert inst.beta == alpha**d + alpha ** (d + 1) / (1 - alpha)
    assert inst.facility_cost == 2 / alpha
    m = metric_closure(inst.tree)
    for f in inst.facilities:
        assert m.d(0, f) == 1 / (1 - alpha)
    for v in inst.client_vertices:
        k = inst.depth_of_vertex[v]
        assert inst.clients_of_vertex[v] == (1 / alpha) ** k
        # every client of v pays exactly 1/(1 - alpha) to reach a leaf below v
        assert inst.clients_of_vertex[v] * inst.height(v) == 1 / (1 - alpha)
    for f in inst.facilities:
        assert inst.clients_of_vertex[f] == 0


def test_hst_root_leaf_example():
    inst = build_hst(2, Fraction(1, 2))
    assert metric_closure(inst.tree).d(0, inst.facilities[0]) == 2


def test_hst_alpha_must_be_unit_fraction():
    with pytest.raises(PreconditionError):
        build_hst(2, Fraction(2, 3))
    with pytest.raises(PreconditionError):
        build_hst(2, Fraction(1))


def test_rooted_paths_hst():
    inst = build_hst(3, Fraction(1, 2))
    assert rooted_paths_hst(inst, 0) == [frozenset({0})]
    for i in range(4):
        paths = rooted_paths_hst(inst, i)
        assert len(paths) == 2**i
        assert all(len(p) == i + 1 for p in paths)
        assert frozenset().union(*paths) == inst.vertices_up_to(i)


# ---------------------------------------------------------------- matching


@pytest.mark.parametrize("u", range(1, 6))
def test_matching_universe(u):
    inst = build_matching_universe(u)
    assert len(inst.v_vertices) == 2**u - 1
    assert len(set(inst.v_vertices)) == 2**u - 1
    assert all(vs and vs <= set(range(u)) for vs in inst.v_vertices)
    for i, vs in enumerate(inst.v_vertices):
        assert inst.v_index(vs) == i


def test_matching_universe_limits():
    with pytest.raises(SizeLimitError):
        build_matching_universe(6)
    with pytest.raises(PreconditionError):
        build_matching_universe(2).with_requests([3])
