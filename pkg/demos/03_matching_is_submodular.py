"""
Online bipartite matching has no gap
====================================

Every nonempty subset of U is a V vertex; a request sequence picks V
vertices, possibly repeatedly.  The size of a maximum matching on the
requested copies is submodular, so the gap LP returns 1.
"""

from itertools import product

from submodgap import is_submodular, submodularity_gap
from submodgap.instances import build_matching_universe
from submodgap.solvers import always_matched, even_odd_free, matching_table

inst = build_matching_universe(3)
print("V vertices:", [sorted(v) for v in inst.v_vertices])

count = bad = 0
for mult in product(range(3), repeat=len(inst.v_vertices)):
    requests = [v for v, k in enumerate(mult) for _ in range(k)]
    if requests:
        count += 1
        bad += not is_submodular(matching_table(inst, requests)).holds
print(f"{count} request multisets, {bad} non-submodular tables")

requests = [0, 2, 2, 6]
res = submodularity_gap(matching_table(inst, requests))
print("gap LP on", requests, "->", res.lambda_star)

# EVEN vertices are missed by some maximum matching; once a U vertex is
# matched by every maximum matching it stays so as requests arrive
dec = even_odd_free(inst, requests)
print("EVEN:", sorted(dec.even))
print("ODD: ", sorted(dec.odd))
print("FREE:", sorted(dec.free))
for extra in range(len(inst.v_vertices)):
    before = [always_matched(inst, requests, u) for u in range(3)]
    after = [always_matched(inst, requests + [extra], u) for u in range(3)]
    assert all(a <= b for a, b in zip(before, after))
print("always-matched sets only grow under every single extra request")
