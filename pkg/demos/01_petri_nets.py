"""
Labeled Petri nets: parsing, firing and validation
==================================================

A small net in the text interchange format, fired by hand.
"""

from opacity_lab import enabled, fire, incidence, parse_net, render_marking, serialize_net, validate

text = """
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
"""
sys = parse_net(text)
net = sys.net

# Pre, Post and C = Post - Pre are numpy arrays (places x transitions)
print(incidence(net))

# u is silent, a and b are seen by the intruder
print("enabled at M0:", [t for t in net.transitions if enabled(net, sys.m0, t)])
m1 = fire(net, sys.m0, "u")
print("after u:", render_marking(net, m1))

# structural checks the verifiers rely on
for check in validate(sys).checks:
    print(f"{check.name:22s} {check.passed}")

# the format round-trips
assert parse_net(serialize_net(sys)).net.pre.tolist() == net.pre.tolist()
