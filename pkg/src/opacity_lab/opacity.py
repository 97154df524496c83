"""K-step and infinite-step opacity over RG, BRG and EBRG, and a brute-force oracle.

An observation ``w = u v`` exposes the secret when the delayed estimate
``D(u, v)`` (markings consistent with ``u`` that can still produce ``v``) is
non-empty and contained in the secret.  K-step opacity bounds ``|v| <= K``;
infinite-step opacity does not.

The graph verifiers work on node sets.  After ``u`` they split the observer
state into secret and non-secret nodes and run a subset construction on the
pair ``(A, B)`` of their futures; ``v`` exposes the secret exactly when ``A``
is still non-empty and ``B`` has died.  This is exact provided every
non-secret marking consistent with ``u`` lies in the unobservable reach of a
non-secret node of the observer state.  RG and EBRG satisfy that by
construction; on a BRG the missing cover markings of A3-violating secret
nodes are generated on the fly.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .basis import BasisStepper
from .ebrg import as_secret, non_secret_cover
from .graph import GraphKind, StateGraph
from .net import LabeledSystem, Marking, PetriNetError
from .reachability import ReachCache

INF = None  # the K value meaning "infinite-step"


class OutOfSpaceError(RuntimeError):
    pass


class VerificationTimeout(RuntimeError):
    pass


def _deadline(time_cap: float | None) -> float | None:
    return None if time_cap is None else time.perf_counter() + time_cap


def _check_clock(deadline: float | None) -> None:
    if deadline is not None and time.perf_counter() > deadline:
        raise VerificationTimeout("verification exceeded its time budget")


@dataclass(frozen=True)
class Verdict:
    opaque: bool
    k: int | None
    u: tuple[str, ...] | None = None
    v: tuple[str, ...] | None = None
    exposed: frozenset[Marking] = field(default=frozenset())

    def __post_init__(self):
        if self.opaque != (self.u is None):
            raise ValueError("a witness is present iff the verdict is not opaque")

    @property
    def k_label(self) -> str:
        return "inf" if self.k is None else str(self.k)


def _obs_index(sys: LabeledSystem, t: str) -> int:
    j = sys.net.tindex(t)
    if sys.net.transitions[j] not in sys.observable:
        raise PetriNetError(f"{t} is not observable")
    return j


class GraphView:
    """Node-level semantics of a built graph: epsilon closure and observable steps.

    Markings outside the graph (BRG cover markings) are stepped with the basis rule.
    """

    def __init__(self, sys: LabeledSystem, graph: StateGraph, stepper: BasisStepper | None = None):
        self.sys = sys
        self.graph = graph
        self.kind = graph.kind
        self.index = graph.index
        self.stepper = stepper or BasisStepper(sys)
        obs_pos = {sys.net.transitions[j]: k for k, j in enumerate(sys.obs_indices)}
        self.obs = sys.obs_indices
        n = len(graph.nodes)
        self.eps: list[tuple[int, ...]] = [()] * n
        self.succ: list[list[tuple[int, ...]]] = []
        for i in range(n):
            eps, by_t = [], [[] for _ in self.obs]
            for lab, d in graph.out[i]:
                if lab.t is None:
                    eps.append(d)
                else:
                    by_t[obs_pos[lab.t]].append(d)
            self.eps[i] = tuple(eps)
            self.succ.append([tuple(dict.fromkeys(x)) for x in by_t])
        self._virtual: dict[Marking, int] = {}
        self._vnodes: list[Marking] = []
        self._vsucc: dict[tuple[int, int], tuple[int, ...]] = {}

    # items are graph indices (>= 0) or virtual ids (< 0)
    def item(self, m: Marking) -> int:
        i = self.index.get(m)
        if i is not None:
            return i
        v = self._virtual.get(m)
        if v is None:
            if self.kind is GraphKind.RG:
                raise AssertionError("RG views never need virtual markings")
            self._vnodes.append(m)
            v = self._virtual[m] = -len(self._vnodes)
        return v

    def marking(self, x: int) -> Marking:
        return self.graph.nodes[x] if x >= 0 else self._vnodes[-x - 1]

    def closure(self, items: Iterable[int]) -> frozenset[int]:
        seen = set(items)
        stack = [x for x in seen if x >= 0 and self.eps[x]]
        while stack:
            x = stack.pop()
            for d in self.eps[x]:
                if d not in seen:
                    seen.add(d)
                    if self.eps[d]:
                        stack.append(d)
        return frozenset(seen)

    def _step1(self, x: int, k: int) -> tuple[int, ...]:
        if x >= 0:
            return self.succ[x][k]
        key = (x, k)
        hit = self._vsucc.get(key)
        if hit is None:
            j = self.obs[k]
            hit = tuple(dict.fromkeys(self.item(m2) for _, m2 in self.stepper.step(self.marking(x), j)))
            self._vsucc[key] = hit
        return hit

    def step(self, items: frozenset[int], k: int) -> frozenset[int]:
        """Items reachable by observable number ``k`` (position in ``sys.obs_indices``), closed."""
        out: set[int] = set()
        for x in items:
            out.update(self._step1(x, k))
        return self.closure(out) if out else frozenset()

    def initial(self) -> frozenset[int]:
        return self.closure([self.graph.initial])


def _expand(view: GraphView, items: Iterable[int], reach: ReachCache) -> frozenset[Marking]:
    if view.kind is GraphKind.RG:
        return frozenset(view.marking(x) for x in items)
    out: set[Marking] = set()
    for x in items:
        out |= reach(view.marking(x))
    return frozenset(out)


def current_estimate(sys: LabeledSystem, graph: StateGraph, w: Sequence[str],
                     view: GraphView | None = None, reach: ReachCache | None = None) -> frozenset[Marking]:
    """Markings consistent with the observation ``w``."""
    view = view or GraphView(sys, graph)
    ks = [sys.obs_indices.index(_obs_index(sys, t)) for t in w]
    items = view.initial()
    for k in ks:
        items = view.step(items, k)
        if not items:
            return frozenset()
    return _expand(view, items, reach or ReachCache(sys))


def _observer(view: GraphView, deadline: float | None = None):
    """All reachable observer states with a shortest observation for each."""
    start = view.initial()
    parent: dict[frozenset[int], tuple] = {start: None}
    queue = deque([start])
    n = 0
    while queue:
        n += 1
        if n & 127 == 1:
            _check_clock(deadline)
        y = queue.popleft()
        yield y, parent
        for k in range(len(view.obs)):
            y2 = view.step(y, k)
            if y2 and y2 not in parent:
                parent[y2] = (y, k)
                queue.append(y2)


def _trace(parent: dict, state) -> list[int]:
    out = []
    while parent[state] is not None:
        state, k = parent[state]
        out.append(k)
    return out[::-1]


class _Splitter:
    """Splits an observer state into secret nodes and non-secret representatives."""

    def __init__(self, view: GraphView, secret: frozenset[Marking], reach: ReachCache):
        self.view = view
        self.secret = secret
        self.reach = reach
        self._cover: dict[int, tuple[int, ...]] = {}

    def is_secret(self, x: int) -> bool:
        return self.view.marking(x) in self.secret

    def cover(self, x: int) -> tuple[int, ...]:
        hit = self._cover.get(x)
        if hit is None:
            m = self.view.marking(x)
            if self.reach(m) <= self.secret:
                hit = ()
            else:
                hit = tuple(self.view.item(q) for q, _ in non_secret_cover(self.view.sys, m, self.secret, self.reach))
            self._cover[x] = hit
        return hit

    def split(self, y: frozenset[int]) -> tuple[frozenset[int], frozenset[int]]:
        a = frozenset(x for x in y if self.is_secret(x))
        b = set(x for x in y if x not in a)
        if self.view.kind is not GraphKind.RG:
            for x in a:
                b.update(c for c in self.cover(x) if c not in y)
        return a, frozenset(b)


def _verify(view: GraphView, secret: frozenset[Marking], k_max: int | None, reach: ReachCache,
            deadline: float | None = None) -> Verdict:
    splitter = _Splitter(view, secret, reach)
    names = [view.sys.net.transitions[j] for j in view.obs]
    # multi-source BFS so the first visit of a pair is at its minimal depth
    parent: dict = {}
    queue: deque = deque()
    obs_parent: dict = {}
    for y, obs_parent in _observer(view, deadline):
        a0, b0 = splitter.split(y)
        if a0 and not b0:
            # exposed by the current estimate alone; no shorter witness exists
            u = tuple(names[k] for k in _trace(obs_parent, y))
            return Verdict(False, k_max, u, (), _exposed(view, a0, []))
        if a0 and (a0, b0) not in parent:
            parent[(a0, b0)] = ("seed", y)
            queue.append(((a0, b0), 0))
    n = 0
    while queue:
        n += 1
        if n & 127 == 1:
            _check_clock(deadline)
        (a, b), depth = queue.popleft()
        if not b:
            vk, seed = [], (a, b)
            while parent[seed][0] != "seed":
                seed, k = parent[seed]
                vk.append(k)
            vk.reverse()
            u = tuple(names[k] for k in _trace(obs_parent, parent[seed][1]))
            v = tuple(names[k] for k in vk)
            return Verdict(False, k_max, u, v, _exposed(view, seed[0], vk))
        if k_max is not None and depth >= k_max:
            continue
        for k in range(len(view.obs)):
            a2 = view.step(a, k)
            if not a2:
                continue
            st = (a2, view.step(b, k))
            if st not in parent:
                parent[st] = ((a, b), k)
                queue.append((st, depth + 1))
    return Verdict(True, k_max)


def _exposed(view: GraphView, a0: frozenset[int], vk: list[int]) -> frozenset[Marking]:
    """Secret split nodes of ``a0`` that can still produce ``v``.

    On an RG this is D(u, v) itself; on basis graphs these are the secret
    nodes through which every run consistent with ``u`` and ``v`` passes.
    """
    keep = []
    for x in a0:
        items = view.closure([x])
        for k in vk:
            items = view.step(items, k)
            if not items:
                break
        if items:
            keep.append(x)
    return frozenset(view.marking(x) for x in keep)


def verify_k_step(sys: LabeledSystem, graph: StateGraph, secret, k: int,
                  view: GraphView | None = None, reach: ReachCache | None = None,
                  time_cap: float | None = None) -> Verdict:
    """Raises ``VerificationTimeout`` if ``time_cap`` seconds pass first."""
    if k is None or k < 0:
        raise ValueError("K must be a non-negative integer")
    s = as_secret(secret, sys)
    return _verify(view or GraphView(sys, graph), s, k, reach or ReachCache(sys), _deadline(time_cap))


def verify_infinite_step(sys: LabeledSystem, graph: StateGraph, secret,
                         view: GraphView | None = None, reach: ReachCache | None = None,
                         time_cap: float | None = None) -> Verdict:
    s = as_secret(secret, sys)
    return _verify(view or GraphView(sys, graph), s, None, reach or ReachCache(sys), _deadline(time_cap))


def verify(sys: LabeledSystem, graph: StateGraph, secret, k: int | None, **kw) -> Verdict:
    if k is None:
        return verify_infinite_step(sys, graph, secret, **kw)
    return verify_k_step(sys, graph, secret, k, **kw)


# ---------------------------------------------------------------------------
# oracle: literal definitions over explicit markings and (split, current) pairs


class _Oracle:
    """Explicit-marking semantics.

    A pair ``(split, cur)`` says: some run consistent with ``u`` was at ``split``
    when ``v`` started and sat at ``cur`` right after the last symbol of ``v``
    (unobservable moves after ``cur`` are applied lazily by ``advance``).
    """

    def __init__(self, sys: LabeledSystem, node_cap: int):
        self.sys = sys
        net = sys.net
        self.obs = [t for t in net.transitions if t in sys.observable]
        pre = net.pre.tolist()
        post = net.post.tolist()
        n = range(len(net.places))
        # per-transition rows read straight from the matrices
        self._rows = {
            t: ([(i, pre[i][j]) for i in n if pre[i][j]],
                [(i, post[i][j] - pre[i][j]) for i in n if post[i][j] != pre[i][j]])
            for j, t in enumerate(net.transitions)
        }
        self.unobs = [self._rows[t] for t in net.transitions if t not in sys.observable]
        self.node_cap = node_cap
        self._ru: dict[Marking, frozenset[Marking]] = {}
        self._next: dict[tuple[Marking, str], frozenset[Marking]] = {}

    @staticmethod
    def _fire_row(m: Marking, row) -> Marking | None:
        need, delta = row
        for i, w in need:
            if m[i] < w:
                return None
        out = list(m)
        for i, d in delta:
            out[i] += d
        return tuple(out)

    def fire(self, m: Marking, t: str) -> Marking | None:
        return self._fire_row(m, self._rows[t])

    def close(self, start: Iterable[Marking]) -> frozenset[Marking]:
        seen = set(start)
        stack = list(seen)
        while stack:
            cur = stack.pop()
            for row in self.unobs:
                nxt = self._fire_row(cur, row)
                if nxt is not None and nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(seen) > self.node_cap:
            raise OutOfSpaceError("oracle exceeded its marking budget")
        return frozenset(seen)

    def ru(self, m: Marking) -> frozenset[Marking]:
        hit = self._ru.get(m)
        if hit is None:
            hit = self._ru[m] = self.close((m,))
            if len(self._ru) > self.node_cap:
                raise OutOfSpaceError("oracle exceeded its marking budget")
        return hit

    def next(self, m: Marking, t: str) -> frozenset[Marking]:
        """Markings right after ``t`` fires, following any unobservable moves from ``m``."""
        key = (m, t)
        hit = self._next.get(key)
        if hit is None:
            hit = frozenset(m2 for m1 in self.ru(m) if (m2 := self.fire(m1, t)) is not None)
            self._next[key] = hit
        return hit

    def advance(self, x: frozenset[Marking], t: str) -> frozenset[Marking]:
        """Observer step; ``x`` must be closed under unobservable firings."""
        return self.close(m2 for m in x if (m2 := self.fire(m, t)) is not None)

    def advance_set(self, curs: frozenset[Marking], t: str) -> frozenset[Marking]:
        return frozenset(c2 for cur in curs for c2 in self.next(cur, t))

    def advance_pairs(self, pairs: frozenset, t: str) -> frozenset:
        return frozenset((split, c2) for split, cur in pairs for c2 in self.next(cur, t))


def delayed_estimate(sys: LabeledSystem, u: Sequence[str], v: Sequence[str], node_cap: int = 10**6) -> frozenset[Marking]:
    """D(u, v) computed directly from the firing rule."""
    o = _Oracle(sys, node_cap)
    x = o.ru(sys.m0)
    for t in u:
        _obs_index(sys, t)
        x = o.advance(x, t)
    pairs = frozenset((m, m) for m in x)
    for t in v:
        _obs_index(sys, t)
        pairs = o.advance_pairs(pairs, t)
    return frozenset(s for s, _ in pairs)


def oracle_current_estimate(sys: LabeledSystem, w: Sequence[str], node_cap: int = 10**6) -> frozenset[Marking]:
    o = _Oracle(sys, node_cap)
    x = o.ru(sys.m0)
    for t in w:
        _obs_index(sys, t)
        x = o.advance(x, t)
    return x


def oracle_verify(sys: LabeledSystem, secret, k: int | None, node_cap: int = 10**6,
                  literal: bool = False) -> Verdict:
    """Ground truth by explicit enumeration of observer states and delayed-estimate pair sets.

    With ``literal=True`` every pair set is kept as is.  By default pairs are
    grouped by whether their split marking is secret, which preserves the
    exposure test (D non-empty and inside the secret) while collapsing pair
    sets that differ only in which secret (or non-secret) split survives.
    Raises ``OutOfSpaceError`` when more than ``node_cap`` markings are expanded.
    """
    s = as_secret(secret, sys)
    o = _Oracle(sys, node_cap)
    x0 = o.ru(sys.m0)
    observer = {x0: ()}
    queue = deque([x0])
    while queue:
        x = queue.popleft()
        for t in o.obs:
            x2 = o.advance(x, t)
            if x2 and x2 not in observer:
                observer[x2] = observer[x] + (t,)
                queue.append(x2)

    if literal:
        def seed(x):
            return frozenset((m, m) for m in x)

        def exposed(state):
            d = frozenset(split for split, _ in state)
            return d <= s, d

        def advance(state, t):
            return o.advance_pairs(state, t)
    else:
        def seed(x):
            return (frozenset(m for m in x if m in s), frozenset(m for m in x if m not in s))

        def exposed(state):
            return not state[1], None

        def advance(state, t):
            a2 = o.advance_set(state[0], t)
            return (a2, o.advance_set(state[1], t)) if a2 else None

    seen: set = set()
    frontier: deque = deque()
    for x, u in observer.items():
        st = seed(x)
        if st not in seen and (literal or st[0]):
            seen.add(st)
            frontier.append((st, u, ()))
    while frontier:
        st, u, v = frontier.popleft()
        hit, d = exposed(st)
        if hit:
            if d is None:
                d = delayed_estimate(sys, u, v, node_cap)
            return Verdict(False, k, u, v, d)
        if k is not None and len(v) >= k:
            continue
        for t in o.obs:
            st2 = advance(st, t)
            if st2 and st2 not in seen:
                seen.add(st2)
                frontier.append((st2, u, v + (t,)))
    return Verdict(True, k)
