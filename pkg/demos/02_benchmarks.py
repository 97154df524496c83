"""
Benchmark generators
====================

The parametric four-cycle net and the emergency-department net.
"""

from opacity_lab import Benchmark1Params, Benchmark2Params, gen_benchmark1, gen_benchmark1_group, gen_benchmark2
from opacity_lab import render_marking

case = gen_benchmark1(Benchmark1Params(alpha=5, beta=5, lam=2))
net = case.system.net
print(case.id, len(net.places), "places", len(net.transitions), "transitions")
print("observable:", sorted(case.system.observable))
print("secret:", [render_marking(net, m) for m in case.secret])

# groups fix the grids; group 3 draws lambda observable transitions with a seed
for c in gen_benchmark1_group(3):
    print(c.group, c.id)

hosp = gen_benchmark2(Benchmark2Params(alpha=7, to_set="To1", secret_set="S1"))
print(hosp.id, "M0 =", render_marking(hosp.system.net, hosp.system.m0))
for m in hosp.secret:
    print("  ", render_marking(hosp.system.net, m))
