"""
K-step and infinite-step opacity
================================

The same verdicts from RG, BRG, EBRG and the explicit oracle, with witnesses.
"""

from opacity_lab import (Benchmark1Params, build_brg, build_ebrg, build_rg, delayed_estimate, gen_benchmark1,
                         oracle_verify, render_marking, verify)

case = gen_benchmark1(Benchmark1Params(alpha=4))
sys = case.system
# without M0 the secret is not exposed by the empty observation
secret = case.secret[1:]

graphs = {
    "RG": build_rg(sys).graph,
    "BRG": build_brg(sys).graph,
    "EBRG": build_ebrg(sys, secret)[0].graph,
}
for k in (0, 1, 2, 3, None):
    row = {name: verify(sys, g, secret, k).opaque for name, g in graphs.items()}
    row["oracle"] = oracle_verify(sys, secret, k).opaque
    print("K =", "inf" if k is None else k, row)

vd = verify(sys, graphs["BRG"], secret, None)
if not vd.opaque:
    print("witness u =", vd.u, " v =", vd.v)
    d = delayed_estimate(sys, vd.u, vd.v)
    print("D(u, v) =", [render_marking(sys.net, m) for m in sorted(d)])

# A net where K matters: after the silent u the intruder cannot tell p0 from
# p1, but a later b proves the system was in p0 one step earlier.
from opacity_lab import parse_net

small = parse_net("""
places: p0 p1 p2 p3
transitions: u a b
arc: p0 -> u 1
arc: u -> p1 1
arc: p1 -> a 1
arc: a -> p2 1
arc: p0 -> b 1
arc: b -> p3 1
initial: 1 p0
observable: a b
secret: p0
""")
brg = build_brg(small).graph
for k in (0, 1):
    vd = verify(small, brg, small.secret, k)
    print(f"K={k}:", "opaque" if vd.opaque else f"exposed by u={vd.u} v={vd.v}")
