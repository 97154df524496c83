"""
Reachability graphs and unobservable reach
==========================================
"""

from opacity_lab import Benchmark1Params, build_rg, gen_benchmark1, render_marking, unobservable_reach

sys = gen_benchmark1(Benchmark1Params(alpha=4)).system

rg = build_rg(sys)
print("RG:", rg.status.value, rg.size, "markings in", round(rg.elapsed, 3), "s")

# a node cap turns an oversized build into the reported outcome "o.s."
small = build_rg(sys, node_cap=200)
print("capped RG:", small.size)

m = rg.graph.nodes[7]
print("R_u of", render_marking(sys.net, m))
for q in sorted(unobservable_reach(sys, m)):
    print("   ", render_marking(sys.net, q))
