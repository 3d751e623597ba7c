"""
Facility location on a binary HST
=================================

Client weights grow by a factor 1/alpha per level while edges shrink by
alpha.  Opening a facility costs 2/alpha.  The exact tree DP gives the
level costs t_j; their growth forces any submodular upper envelope to
overcharge single root paths.
"""

from fractions import Fraction

from submodgap import submodularity_gap
from submodgap.bounds import ufl_gap_bound, ufl_sequences
from submodgap.instances import build_hst, rooted_paths_hst
from submodgap.setfn import is_submodular
from submodgap.solvers import ufl_cost_table, ufl_exact

alpha = Fraction(1, 2)
inst = build_hst(3, alpha)

seq = ufl_sequences(3, alpha)
for j in range(4):
    level = ufl_exact(inst, inst.vertices_up_to(j)).cost
    path = ufl_exact(inst, rooted_paths_hst(inst, j)[0]).cost
    print(f"j={j}: t_j = {level} (formula {seq.t[j]}), root path = {path}, lower bound f_j = {seq.f_lower[j]}")

# the cost over client vertices is not even submodular to begin with
for d in (1, 2):
    c = ufl_cost_table(build_hst(d, alpha))
    res = submodularity_gap(c)
    print(f"d={d}: submodular? {is_submodular(c).holds}; lambda* = {res.lambda_star}; "
          f"bound {ufl_gap_bound(d, alpha)}")

# the ratio approaches (d+2)/2 as alpha shrinks
for m in (2, 10, 1000, 10**6):
    print(f"alpha = 1/{m}: bound at d=4 is {float(ufl_gap_bound(4, Fraction(1, m))):.6f}")
