"""Reachability graph construction and unobservable reach."""

from __future__ import annotations

import time
from collections import deque
from typing import Callable, Iterable, Iterator

from .graph import BuildOutcome, GraphKind, Label, StateGraph, Status
from .net import LabeledSystem, Marking

DEFAULT_NODE_CAP = 5_000_000
DEFAULT_TIME_CAP = 600.0
DEFAULT_TOKEN_CAP = 2**31 - 1


class _CapExceeded(Exception):
    def __init__(self, status: Status):
        self.status = status


class Explorer:
    """FIFO frontier with a deduplicated node store and resource caps.

    Successor functions yield ``(label, marking)`` pairs in the order the edges
    should be recorded; discovery order fixes node numbering.
    """

    def __init__(self, kind: GraphKind, node_cap: int = DEFAULT_NODE_CAP,
                 time_cap: float = DEFAULT_TIME_CAP, token_cap: int = DEFAULT_TOKEN_CAP):
        if node_cap < 1 or time_cap <= 0:
            raise ValueError("caps must be positive")
        self.kind = kind
        self.node_cap = node_cap
        self.time_cap = time_cap
        self.token_cap = token_cap
        self.nodes: list[Marking] = []
        self.index: dict[Marking, int] = {}
        self.edges: list[tuple[int, Label, int]] = []
        self.queue: deque[int] = deque()
        self.t0 = time.perf_counter()
        self.status = Status.COMPLETED

    def add(self, m: Marking) -> tuple[int, bool]:
        i = self.index.get(m)
        if i is not None:
            return i, False
        if len(self.nodes) >= self.node_cap:
            raise _CapExceeded(Status.OUT_OF_SPACE)
        if max(m, default=0) > self.token_cap:
            raise _CapExceeded(Status.UNBOUNDED)
        assert min(m, default=0) >= 0, "firing produced a negative marking"
        i = len(self.nodes)
        self.nodes.append(m)
        self.index[m] = i
        self.queue.append(i)
        return i, True

    def run(self, successors: Callable[[Marking], Iterable[tuple[Label, Marking]]]) -> bool:
        """Drain the queue; returns False (and sets ``status``) when a cap is hit."""
        steps = 0
        try:
            while self.queue:
                i = self.queue.popleft()
                for label, m2 in successors(self.nodes[i]):
                    j, _ = self.add(m2)
                    self.edges.append((i, label, j))
                steps += 1
                if steps & 255 == 0 and time.perf_counter() - self.t0 > self.time_cap:
                    raise _CapExceeded(Status.TIMEOUT)
        except _CapExceeded as exc:
            self.status = exc.status
            return False
        return True

    def outcome(self) -> BuildOutcome:
        elapsed = time.perf_counter() - self.t0
        if self.status is not Status.COMPLETED:
            return BuildOutcome(self.status, None, elapsed, len(self.nodes))
        g = StateGraph(self.kind, tuple(self.nodes), tuple(self.edges), 0, dict(self.index))
        return BuildOutcome(Status.COMPLETED, g, elapsed, len(self.nodes))


def _unit(sys: LabeledSystem) -> dict[int, tuple[int, ...]]:
    n = len(sys.unobs_indices)
    return {j: tuple(1 if k == pos else 0 for k in range(n)) for pos, j in enumerate(sys.unobs_indices)}


def rg_successors(sys: LabeledSystem) -> Callable[[Marking], Iterator[tuple[Label, Marking]]]:
    net = sys.net
    zero = (0,) * len(sys.unobs_indices)
    units = _unit(sys)
    labels = [
        Label(None, units[j]) if j in units else Label(t, zero)
        for j, t in enumerate(net.transitions)
    ]
    pre_items = net._pre_items
    delta_items = net._delta_items

    def succ(m: Marking):
        for j, lab in enumerate(labels):
            if all(m[i] >= w for i, w in pre_items[j]):
                out = list(m)
                for i, d in delta_items[j]:
                    out[i] += d
                yield lab, tuple(out)

    return succ


def build_rg(sys: LabeledSystem, node_cap: int = DEFAULT_NODE_CAP, time_cap: float = DEFAULT_TIME_CAP,
             token_cap: int = DEFAULT_TOKEN_CAP) -> BuildOutcome:
    """Breadth-first reachability graph; ``o.s.`` is a status, not an exception."""
    ex = Explorer(GraphKind.RG, node_cap, time_cap, token_cap)
    try:
        ex.add(sys.m0)
    except _CapExceeded as exc:
        ex.status = exc.status
        return ex.outcome()
    ex.run(rg_successors(sys))
    return ex.outcome()


def unobservable_reach_vectors(sys: LabeledSystem, m: Marking) -> dict[Marking, tuple[int, ...]]:
    """R_u(m) mapped to the firing-count vector of the first (BFS) sequence reaching each marking."""
    net = sys.net
    pre_items = net._pre_items
    delta_items = net._delta_items
    unobs = sys.unobs_indices
    seen = {m: (0,) * len(unobs)}
    queue = deque([m])
    while queue:
        cur = queue.popleft()
        y = seen[cur]
        for pos, j in enumerate(unobs):
            if all(cur[i] >= w for i, w in pre_items[j]):
                out = list(cur)
                for i, d in delta_items[j]:
                    out[i] += d
                nxt = tuple(out)
                if nxt not in seen:
                    y2 = list(y)
                    y2[pos] += 1
                    seen[nxt] = tuple(y2)
                    queue.append(nxt)
    return seen


def unobservable_reach(sys: LabeledSystem, m: Marking) -> frozenset[Marking]:
    return frozenset(unobservable_reach_vectors(sys, m))


class ReachCache:
    """Memoized R_u for one system; per-run, never shared between runs."""

    def __init__(self, sys: LabeledSystem):
        self.sys = sys
        self._memo: dict[Marking, frozenset[Marking]] = {}

    def __call__(self, m: Marking) -> frozenset[Marking]:
        r = self._memo.get(m)
        if r is None:
            r = self._memo[m] = unobservable_reach(self.sys, m)
        return r
