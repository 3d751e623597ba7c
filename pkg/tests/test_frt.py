from fractions import Fraction
from itertools import combinations
from math import log2

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from submodgap.errors import PreconditionError, SizeLimitError
from submodgap.frt import (
    check_frt_tree,
    distortion_rows,
    extract_spanning_subgraph,
    metric_cost,
    proxy_function,
    sample_frt_tree,
    tree_cost_table,
    tree_steiner_cost,
)
from submodgap.instances import Metric, WeightedGraph, metric_closure
from submodgap.setfn import is_submodular
from submodgap.solvers import minimum_spanning_tree_cost, steiner_cost_table


def uniform_metric(n: int, seed: int) -> Metric:
    """Distances drawn uniformly from [1, 2] in steps of 1/64 (always a metric)."""
    rng = np.random.default_rng(seed)
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        rows[i][j] = rows[j][i] = 1 + Fraction(int(rng.integers(0, 65)), 64)
    return Metric.from_matrix(rows)


@st.composite
def graph_metrics(draw, min_n=2, max_n=8):
    """Shortest-path metric of a random connected graph with integer weights."""
    n = draw(st.integers(min_n, max_n))
    edges = [(draw(st.integers(0, v - 1)), v, draw(st.integers(1, 9))) for v in range(1, n)]
    for u, v in combinations(range(n), 2):
        if draw(st.booleans()):
            edges.append((u, v, draw(st.integers(1, 9))))
    return metric_closure(WeightedGraph(n, tuple((u, v, Fraction(w)) for u, v, w in edges)))


def tree_path_length(t, i, j):
    """Oracle: walk both leaves to the root and sum edge lengths above their meeting point."""
    def chain(p):
        out, v = [], t.leaf_of_point[p]
        while v != -1:
            out.append(v)
            v = t.parent[v]
        return out

    a, b = chain(i), chain(j)
    common = set(a) & set(b)
    return sum((t.edge_length(v) for v in a + b if v not in common), Fraction(0))


@settings(max_examples=80)
@given(graph_metrics(), st.integers(0, 10**6))
def test_tree_is_dominating_and_sandwiched(m, seed):
    t = sample_frt_tree(m, seed)
    check_frt_tree(t, m)
    for i, j in combinations(range(m.size), 2):
        assert t.distance(i, j) == tree_path_length(t, i, j) >= m.d(i, j)
    assert 1 <= t.beta < 2
    assert sorted(t.order) == list(range(m.size))
    # leaves are at level 0 and levels drop by one along every edge
    for v in range(1, t.tree.vertex_count):
        assert t.level_of_vertex[t.parent[v]] == t.level_of_vertex[v] + 1
    assert all(t.level_of_vertex[leaf] == 0 for leaf in t.leaf_of_point)


def test_sandwich_on_uniform_metric():
    m = uniform_metric(8, 3)
    for s in range(50):
        check_frt_tree(sample_frt_tree(m, s), m)


def test_seed_determinism():
    m = uniform_metric(6, 1)
    a, b = sample_frt_tree(m, 7), sample_frt_tree(m, 7)
    assert a.tree == b.tree and a.beta == b.beta and a.order == b.order
    p, q = proxy_function(m, range(5), 10, seed=4, root=5), proxy_function(m, range(5), 10, seed=4, root=5)
    assert p.tabulation == q.tabulation


@settings(max_examples=40)
@given(graph_metrics(min_n=3, max_n=7), st.integers(0, 1000))
def test_cost_table_matches_single_evaluations(m, seed):
    t = sample_frt_tree(m, seed)
    ground = list(range(m.size - 1))
    root = m.size - 1
    for r in (None, root):
        table = tree_cost_table(t, ground, r)
        for S in range(2 ** len(ground)):
            L = [ground[q] for q in range(len(ground)) if S >> q & 1]
            assert table[S] == tree_steiner_cost(t, L, r)


@settings(max_examples=40)
@given(graph_metrics(min_n=3, max_n=7), st.integers(0, 1000))
def test_tree_cost_submodularity(m, seed):
    t = sample_frt_tree(m, seed)
    ground = list(range(m.size - 1))
    assert is_submodular(tree_cost_table(t, ground, root=m.size - 1)).holds
    unrooted = tree_cost_table(t, list(range(m.size)))
    assert is_submodular(unrooted, nonempty=True).holds


def test_unrooted_cost_fails_only_at_the_empty_set():
    m = uniform_metric(4, 0)
    c = tree_cost_table(sample_frt_tree(m, 0), range(4))
    w = is_submodular(c)
    assert not w.holds and w.subset == 0  # singletons cost nothing, pairs do


@settings(max_examples=60)
@given(graph_metrics(), st.integers(0, 1000), st.data())
def test_extraction_costs_at_most_tree_cost(m, seed, data):
    t = sample_frt_tree(m, seed)
    L = data.draw(st.sets(st.integers(0, m.size - 1), min_size=1))
    edges = extract_spanning_subgraph(t, L, m)
    assert len(edges) == len(L) - 1
    # the edges connect L
    comp = {p: p for p in L}

    def find(x):
        while comp[x] != x:
            x = comp[x]
        return x

    for a, b in edges:
        comp[find(a)] = find(b)
    assert len({find(p) for p in L}) == 1
    assert metric_cost(m, edges) <= tree_steiner_cost(t, L)
    assert minimum_spanning_tree_cost(L, [(a, b, m.d(a, b)) for a, b in combinations(sorted(L), 2)]) <= metric_cost(m, edges)


def test_proxy_dominates_steiner_cost(d2_metric, d2):
    ground = [v for v in range(d2_metric.size) if v != d2.root]
    proxy = proxy_function(d2_metric, ground, 5, seed=0, root=d2.root).tabulation
    exact = steiner_cost_table(d2_metric, ground, root=d2.root)
    assert all(p >= c for p, c in zip(proxy.values, exact.values))
    assert is_submodular(proxy).holds


@pytest.mark.parametrize("n", [4, 8, 16])
def test_distortion_on_uniform_metrics(n):
    m = uniform_metric(n, n)
    samples = [sample_frt_tree(m, s) for s in range(100)]
    rows = distortion_rows(m, samples)
    worst = max(mean / x for _, _, x, mean, _ in rows)
    assert 1 <= worst <= 8 * log2(n)


def test_preconditions():
    with pytest.raises(PreconditionError):
        sample_frt_tree(Metric.from_matrix([[Fraction(0)]]), 0)
    with pytest.raises(PreconditionError):
        sample_frt_tree(Metric.from_matrix([[Fraction(0), Fraction(0)], [Fraction(0), Fraction(0)]]), 0)
    m = uniform_metric(5, 0)
    with pytest.raises(PreconditionError):
        proxy_function(m, range(5), 3, seed=0, root=2)
    with pytest.raises(PreconditionError):
        proxy_function(m, range(4), 0, seed=0)
    with pytest.raises(SizeLimitError):
        proxy_function(uniform_metric(18, 0), range(17), 1, seed=0)
