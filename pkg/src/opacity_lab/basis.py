"""Minimal explanations and basis reachability graphs.

All explanation vectors are tuples indexed like ``LabeledSystem.unobs_indices``.
The unobservable subnet is assumed acyclic; under that assumption a vector
``y >= 0`` with ``m + C_u y >= 0`` is always firable from ``m`` (fire the
transitions in topological order), which is what makes the backward search
below produce realizable vectors.
"""

from __future__ import annotations

from typing import Callable, Iterator

from .graph import BuildOutcome, GraphKind, Label, StateGraph
from .net import LabeledSystem, Marking, PetriNetError
from .reachability import (
    DEFAULT_NODE_CAP,
    DEFAULT_TIME_CAP,
    DEFAULT_TOKEN_CAP,
    Explorer,
    ReachCache,
    _CapExceeded,
)

Vector = tuple[int, ...]


class NotObservableError(PetriNetError):
    pass


def _obs_index(sys: LabeledSystem, t: str | int) -> int:
    j = sys.net.tindex(t)
    if sys.net.transitions[j] not in sys.observable:
        raise NotObservableError(f"{sys.net.transitions[j]} is unobservable")
    return j


def _pareto(vectors) -> list[Vector]:
    """Componentwise-minimal elements, sorted lexicographically."""
    vs = sorted(set(vectors), key=lambda v: (sum(v), v))
    keep: list[Vector] = []
    for v in vs:
        if not any(all(a <= b for a, b in zip(k, v)) for k in keep):
            keep.append(v)
    return sorted(keep)


def minimal_explanations(sys: LabeledSystem, m: Marking, t: str | int) -> list[Vector]:
    """All componentwise-minimal unobservable vectors that enable ``t`` from ``m``.

    Backward demand-driven search: pick the first place still in deficit and
    branch over its unobservable producers, until no deficit is left.
    """
    j = _obs_index(sys, t)
    producers = sys.unobs_producers
    cols = sys.unobs_columns
    n = len(sys.unobs_indices)
    start = list(m)
    for i, w in sys.net._pre_items[j]:
        start[i] -= w
    if min(start, default=0) >= 0:
        return [(0,) * n]

    found: list[Vector] = []
    seen: set[Vector] = set()
    stack = [(start, (0,) * n)]
    while stack:
        a, y = stack.pop()
        if any(all(f[k] <= y[k] for k in range(n)) for f in found):
            continue
        neg = next((i for i, v in enumerate(a) if v < 0), None)
        if neg is None:
            found.append(y)
            continue
        for k in producers[neg]:
            y2 = y[:k] + (y[k] + 1,) + y[k + 1:]
            if y2 in seen:
                continue
            seen.add(y2)
            a2 = a[:]
            for i, dv in cols[k]:
                a2[i] += dv
            stack.append((a2, y2))
    return _pareto(found)


def apply_unobservable(sys: LabeledSystem, m: Marking, y: Vector) -> Marking:
    """m + C_u y (no enabling check)."""
    cols = sys.unobs_columns
    out = list(m)
    for k, c in enumerate(y):
        if c:
            for i, dv in cols[k]:
                out[i] += dv * c
    return tuple(out)


def explanation_sequence(sys: LabeledSystem, m: Marking, y: Vector) -> list[str]:
    """A firing sequence from ``m`` whose count vector is ``y``; raises if none exists."""
    net = sys.net
    names = [net.transitions[j] for j in sys.unobs_indices]
    seq: list[str] = []
    cur = list(m)
    for k in sys.unobs_topological:
        j = sys.unobs_indices[k]
        for _ in range(y[k]):
            if not all(cur[i] >= w for i, w in net._pre_items[j]):
                raise PetriNetError(f"vector not realizable from {m}: {names[k]} disabled")
            for i, dv in net._delta_items[j]:
                cur[i] += dv
            seq.append(names[k])
    return seq


def brute_force_explanations(sys: LabeledSystem, m: Marking, t: str | int, limit: int = 10**5) -> list[Vector]:
    """Oracle: enumerate every unobservable firing-count vector realizable from ``m``."""
    j = _obs_index(sys, t)
    net = sys.net
    unobs = sys.unobs_indices
    pre_t = net._pre_items[j]
    seen = {(0,) * len(unobs): m}
    stack = [(0,) * len(unobs)]
    hits = []
    while stack:
        y = stack.pop()
        cur = seen[y]
        if all(cur[i] >= w for i, w in pre_t):
            hits.append(y)
        for k, u in enumerate(unobs):
            if all(cur[i] >= w for i, w in net._pre_items[u]):
                y2 = y[:k] + (y[k] + 1,) + y[k + 1:]
                if y2 not in seen:
                    out = list(cur)
                    for i, dv in net._delta_items[u]:
                        out[i] += dv
                    seen[y2] = tuple(out)
                    stack.append(y2)
                    if len(seen) > limit:
                        raise RuntimeError("brute-force explanation enumeration exceeded its limit")
    return _pareto(hits)


class BasisStepper:
    """Memoized basis successor rule: (m, t) -> [(y, m + C_u y + C(t))]."""

    def __init__(self, sys: LabeledSystem):
        self.sys = sys
        self._memo: dict[tuple[Marking, int], list[tuple[Vector, Marking]]] = {}

    def step(self, m: Marking, j: int) -> list[tuple[Vector, Marking]]:
        key = (m, j)
        hit = self._memo.get(key)
        if hit is None:
            net = self.sys.net
            hit = []
            for y in minimal_explanations(self.sys, m, j):
                out = list(apply_unobservable(self.sys, m, y))
                for i, dv in net._delta_items[j]:
                    out[i] += dv
                hit.append((y, tuple(out)))
            self._memo[key] = hit
        return hit

    def successors(self, m: Marking) -> Iterator[tuple[Label, Marking]]:
        net = self.sys.net
        for j in self.sys.obs_indices:
            t = net.transitions[j]
            for y, m2 in self.step(m, j):
                yield Label(t, y), m2


def brg_successors(sys: LabeledSystem, stepper: BasisStepper | None = None) -> Callable:
    return (stepper or BasisStepper(sys)).successors


def build_brg(sys: LabeledSystem, node_cap: int = DEFAULT_NODE_CAP, time_cap: float = DEFAULT_TIME_CAP,
              token_cap: int = DEFAULT_TOKEN_CAP, stepper: BasisStepper | None = None) -> BuildOutcome:
    ex = Explorer(GraphKind.BRG, node_cap, time_cap, token_cap)
    try:
        ex.add(sys.m0)
    except _CapExceeded as exc:
        ex.status = exc.status
        return ex.outcome()
    ex.run(brg_successors(sys, stepper))
    return ex.outcome()


def expand_basis(sys: LabeledSystem, brg: StateGraph, reach: ReachCache | None = None) -> frozenset[Marking]:
    if brg.kind is not GraphKind.BRG:
        raise ValueError("expand_basis expects a BRG")
    reach = reach or ReachCache(sys)
    out: set[Marking] = set()
    for m in brg.nodes:
        out |= reach(m)
    return frozenset(out)
