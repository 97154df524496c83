"""Assumption-A3 checks and the extended basis reachability graph.

A secret basis marking ``m_b`` violates A3 when its unobservable reach leaves
the secret.  Such a marking hides non-secret behaviour behind a secret node, so
node-level opacity checks on the plain BRG would be unsound for it.  The EBRG
repairs this by adding, for every violator:

* the secret markings of its reach that are not basis markings, and
* ``Q_min``-style cover nodes: the unobservably-minimal non-secret markings
  first reached from the violator along secret-only paths,

each linked to the violator by an epsilon edge carrying the unobservable
vector, and then closing the added nodes under the basis successor rule.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable

from .basis import BasisStepper, build_brg
from .graph import BuildOutcome, GraphKind, Label, StateGraph, Status
from .net import LabeledSystem, Marking
from .reachability import (
    DEFAULT_NODE_CAP,
    DEFAULT_TIME_CAP,
    DEFAULT_TOKEN_CAP,
    Explorer,
    ReachCache,
    _CapExceeded,
    unobservable_reach_vectors,
)


class SecretError(ValueError):
    pass


def as_secret(secret: Iterable[Marking], sys: LabeledSystem | None = None) -> frozenset[Marking]:
    s = frozenset(tuple(int(x) for x in m) for m in secret)
    if not s:
        raise SecretError("the secret must contain at least one marking")
    if sys is not None:
        n = len(sys.net.places)
        if any(len(m) != n for m in s):
            raise SecretError("secret marking dimension does not match the net")
    return s


@dataclass(frozen=True)
class EbrgStats:
    s_tilde_b: frozenset[Marking]
    q_min: frozenset[Marking]
    a3_violators: frozenset[Marking]
    node_count: int
    edge_count: int
    build_time: float


def compute_s_tilde_b(sys: LabeledSystem, brg: StateGraph, secret) -> frozenset[Marking]:
    """Secret basis markings."""
    s = as_secret(secret, sys)
    return frozenset(m for m in brg.nodes if m in s)


def violates_a3(m: Marking, secret: frozenset[Marking], reach: ReachCache) -> bool:
    return m in secret and not reach(m) <= secret


def check_a3(sys: LabeledSystem, brg: StateGraph, secret, reach: ReachCache | None = None) -> frozenset[Marking]:
    s = as_secret(secret, sys)
    reach = reach or ReachCache(sys)
    return frozenset(m for m in brg.nodes if violates_a3(m, s, reach))


def non_secret_cover(sys: LabeledSystem, m: Marking, secret: frozenset[Marking],
                     reach: ReachCache) -> list[tuple[Marking, tuple[int, ...]]]:
    """Minimal non-secret markings of R_u(m) entered from ``m`` along secret-only paths.

    Every non-secret marking of R_u(m) is unobservably reachable from one of the
    returned markings.  Returned in lexicographic order with one witness vector each.
    """
    vectors = unobservable_reach_vectors(sys, m)
    net = sys.net
    frontier: dict[Marking, tuple[int, ...]] = {}
    seen = {m}
    stack = [m]
    while stack:
        cur = stack.pop()
        for k, j in enumerate(sys.unobs_indices):
            if all(cur[i] >= w for i, w in net._pre_items[j]):
                out = list(cur)
                for i, d in net._delta_items[j]:
                    out[i] += d
                nxt = tuple(out)
                if nxt in seen:
                    continue
                seen.add(nxt)
                if nxt in secret:
                    stack.append(nxt)
                else:
                    frontier[nxt] = vectors[nxt]
    cands = sorted(frontier)
    minimal = [q for q in cands if not any(o != q and q in reach(o) for o in cands)]
    return [(q, frontier[q]) for q in minimal]


def secret_in_reach(sys: LabeledSystem, m: Marking, secret: frozenset[Marking]) -> list[tuple[Marking, tuple[int, ...]]]:
    vectors = unobservable_reach_vectors(sys, m)
    return [(s, vectors[s]) for s in sorted(secret) if s in vectors and s != m]


def build_ebrg(sys: LabeledSystem, secret, node_cap: int = DEFAULT_NODE_CAP, time_cap: float = DEFAULT_TIME_CAP,
               token_cap: int = DEFAULT_TOKEN_CAP, stepper: BasisStepper | None = None,
               brg: BuildOutcome | None = None) -> tuple[BuildOutcome, EbrgStats | None]:
    """Build the BRG (unless given) and extend it around the A3 violators."""
    s = as_secret(secret, sys)
    t0 = time.perf_counter()
    stepper = stepper or BasisStepper(sys)
    if brg is None:
        brg = build_brg(sys, node_cap, time_cap, token_cap, stepper)
    if not brg.completed:
        return BuildOutcome(brg.status, None, time.perf_counter() - t0, brg.peak_nodes), None
    g = brg.graph
    reach = ReachCache(sys)
    s_tilde = compute_s_tilde_b(sys, g, s)
    violators = frozenset(m for m in s_tilde if violates_a3(m, s, reach))

    ex = Explorer(GraphKind.EBRG, node_cap, max(time_cap - (time.perf_counter() - t0), 1e-9), token_cap)
    ex.nodes = list(g.nodes)
    ex.index = dict(g.index)
    ex.edges = list(g.edges)

    def extension(m: Marking):
        if not violates_a3(m, s, reach):
            return
        adopt = dict(secret_in_reach(sys, m, s))
        adopt.update(non_secret_cover(sys, m, s, reach))
        for q in sorted(adopt):
            yield Label(None, adopt[q]), q

    def successors(m: Marking):
        yield from extension(m)
        yield from stepper.successors(m)

    basis_count = len(g.nodes)
    try:
        # violators are BRG nodes; their basis edges already exist
        for i, m in enumerate(g.nodes):
            if m in violators:
                for label, q in extension(m):
                    j, _ = ex.add(q)
                    ex.edges.append((i, label, j))
    except _CapExceeded as exc:
        ex.status = exc.status
    if ex.status is Status.COMPLETED:
        ex.run(successors)
    elapsed = time.perf_counter() - t0
    out = ex.outcome()
    out = BuildOutcome(out.status, out.graph, elapsed, out.peak_nodes)
    if not out.completed:
        return out, None
    stats = EbrgStats(
        s_tilde_b=s_tilde,
        q_min=frozenset(out.graph.nodes[basis_count:]),
        a3_violators=violators,
        node_count=len(out.graph.nodes),
        edge_count=len(out.graph.edges),
        build_time=elapsed,
    )
    return out, stats
