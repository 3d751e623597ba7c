"""
Tree embeddings give a submodular proxy
=======================================

Sample FRT trees of the D_2 metric, average their rooted Steiner costs and
compare with the exact metric Steiner cost.  The average of tree costs is
submodular and never below the true cost, so its ratio to the true cost is
an upper bound on the gap.
"""

from submodgap import envelope_ratio, is_submodular, verify_envelope
from submodgap.frt import (
    check_frt_tree,
    distortion_rows,
    extract_spanning_subgraph,
    metric_cost,
    proxy_function,
    tree_steiner_cost,
)
from submodgap.instances import build_diamond, metric_closure
from submodgap.solvers import steiner_cost_table

d2 = build_diamond(2)
m = metric_closure(d2.graph)
ground = [v for v in range(m.size) if v != d2.root]

proxy = proxy_function(m, ground, 200, seed=0, root=d2.root)
for t in proxy.samples:
    check_frt_tree(t, m)
print("200 trees dominate the metric and satisfy the level sandwich")

exact = steiner_cost_table(m, ground, root=d2.root)
ratio = envelope_ratio(exact, proxy.tabulation)
print("proxy submodular:", is_submodular(proxy.tabulation).holds)
print("proxy / exact cost at worst:", ratio, "| verified:", verify_envelope(exact, proxy.tabulation, ratio))

rows = distortion_rows(m, proxy.samples)
worst = max(rows, key=lambda r: r[3] / r[2])
print(f"worst pair {worst[:2]}: metric {worst[2]}, mean tree {worst[3]}, ratio {float(worst[3] / worst[2]):.2f}")

# a tree solution turns back into metric edges without getting more expensive
t = proxy.samples[0]
L = [0, 3, 7, 9]
edges = extract_spanning_subgraph(t, L, m)
print(f"terminals {L}: metric edges {edges} cost {metric_cost(m, edges)} <= tree cost {tree_steiner_cost(t, L)}")
