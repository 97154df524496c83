"""
A3 violators and the extended basis reachability graph
======================================================
"""

from opacity_lab import Benchmark1Params, build_brg, build_ebrg, check_a3, gen_benchmark1, render_marking

case = gen_benchmark1(Benchmark1Params(alpha=6))
sys = case.system
brg = build_brg(sys).graph

# secret basis markings whose silent reach leaves the secret
for m in check_a3(sys, brg, case.secret):
    print("violator:", render_marking(sys.net, m))

ebrg, stats = build_ebrg(sys, case.secret)
print("|BRG| =", len(brg), " |EBRG| =", ebrg.size)
print("secret basis markings:", len(stats.s_tilde_b), " added nodes:", len(stats.q_min))
