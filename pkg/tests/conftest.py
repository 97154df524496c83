from __future__ import annotations

from functools import lru_cache

import pytest

from opacity_lab import Benchmark1Params, build_brg, build_rg, gen_benchmark1, parse_net


@lru_cache(maxsize=None)
def b1(alpha: int, beta: int = 5, lam: int = 2, seed: int = 0):
    return gen_benchmark1(Benchmark1Params(alpha, beta, lam, seed))


@lru_cache(maxsize=None)
def b1_graphs(alpha: int, beta: int = 5, lam: int = 2, seed: int = 0):
    sys = b1(alpha, beta, lam, seed).system
    return build_rg(sys).graph, build_brg(sys).graph


def mark(sys, text: str):
    from opacity_lab import parse_marking

    return parse_marking(sys.net, text)


# K=0 opaque, K=1 not: after the silent move u the intruder cannot tell
# p0 from p1, but seeing b proves the system was in p0.
DELAY_NET = """
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


@pytest.fixture
def delay_sys():
    return parse_net(DELAY_NET)
