"""Petri net data model, firing rule, structural validation and the net file format.

Markings are plain tuples of non-negative ints indexed like ``PetriNet.places``;
tuples hash fast and double as the canonical dedup key in every explorer.
"""

from __future__ import annotations

import graphlib
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Marking = tuple[int, ...]


class PetriNetError(ValueError):
    """Base class for malformed nets, systems and markings."""


class DisabledTransitionError(PetriNetError):
    pass


class NetParseError(PetriNetError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.reason = message
        super().__init__(message if line is None else f"line {line}: {message}")


class PetriNet:
    """Place/transition net with ``Pre``/``Post`` matrices of shape |P| x |T|."""

    def __init__(self, places: Sequence[str], transitions: Sequence[str], pre, post):
        self.places = tuple(places)
        self.transitions = tuple(transitions)
        if len(set(self.places)) != len(self.places):
            raise PetriNetError("duplicate place identifier")
        if len(set(self.transitions)) != len(self.transitions):
            raise PetriNetError("duplicate transition identifier")
        shape = (len(self.places), len(self.transitions))
        pre = np.array(pre, dtype=np.int64)
        post = np.array(post, dtype=np.int64)
        if pre.size == post.size == 0:
            pre = pre.reshape(shape)
            post = post.reshape(shape)
        if pre.shape != shape or post.shape != shape:
            raise PetriNetError(f"Pre/Post must have shape {shape}, got {pre.shape} and {post.shape}")
        if (pre < 0).any() or (post < 0).any():
            raise PetriNetError("negative arc weight")
        pre.setflags(write=False)
        post.setflags(write=False)
        self.pre = pre
        self.post = post
        self.place_index = {p: i for i, p in enumerate(self.places)}
        self.transition_index = {t: j for j, t in enumerate(self.transitions)}
        c = post - pre
        c.setflags(write=False)
        self._incidence = c
        # sparse per-transition views used by the hot firing loops
        self._pre_items = tuple(
            tuple((int(i), int(pre[i, j])) for i in np.flatnonzero(pre[:, j]))
            for j in range(shape[1])
        )
        self._delta_items = tuple(
            tuple((int(i), int(c[i, j])) for i in np.flatnonzero(c[:, j]))
            for j in range(shape[1])
        )

    def __eq__(self, other):
        if not isinstance(other, PetriNet):
            return NotImplemented
        return (
            self.places == other.places
            and self.transitions == other.transitions
            and np.array_equal(self.pre, other.pre)
            and np.array_equal(self.post, other.post)
        )

    def __hash__(self):
        return hash((self.places, self.transitions, self.pre.tobytes(), self.post.tobytes()))

    def __repr__(self):
        return f"PetriNet(|P|={len(self.places)}, |T|={len(self.transitions)})"

    def tindex(self, t: str | int) -> int:
        if isinstance(t, (int, np.integer)):
            if not 0 <= t < len(self.transitions):
                raise PetriNetError(f"unknown transition index {t}")
            return int(t)
        try:
            return self.transition_index[t]
        except KeyError:
            raise PetriNetError(f"unknown transition {t!r}") from None

    def restrict(self, transitions: Iterable[str]) -> PetriNet:
        keep = set(transitions)
        cols = [j for j, t in enumerate(self.transitions) if t in keep]
        return PetriNet(
            self.places,
            [self.transitions[j] for j in cols],
            self.pre[:, cols],
            self.post[:, cols],
        )


def incidence(net: PetriNet) -> np.ndarray:
    """C = Post - Pre."""
    return net._incidence


def enabled(net: PetriNet, m: Marking, t: str | int) -> bool:
    j = net.tindex(t)
    return all(m[i] >= w for i, w in net._pre_items[j])


def fire(net: PetriNet, m: Marking, t: str | int) -> Marking:
    j = net.tindex(t)
    if not all(m[i] >= w for i, w in net._pre_items[j]):
        raise DisabledTransitionError(f"{net.transitions[j]} is not enabled at {render_marking(net, m)}")
    out = list(m)
    for i, d in net._delta_items[j]:
        out[i] += d
    return tuple(out)


def fire_sequence(net: PetriNet, m: Marking, seq: Iterable[str | int]) -> Marking:
    for t in seq:
        m = fire(net, m, t)
    return m


def render_marking(net: PetriNet, m: Marking) -> str:
    """Render as ``3p00+p22+p33``; the zero marking renders as ``0``."""
    terms = []
    for p, k in zip(net.places, m):
        if k == 1:
            terms.append(p)
        elif k:
            terms.append(f"{k}{p}")
    return "+".join(terms) or "0"


_TERM = re.compile(r"^\s*(\d*)\s*\*?\s*([A-Za-z_][\w]*)\s*$")


def parse_marking(net: PetriNet, text: str) -> Marking:
    counts = [0] * len(net.places)
    text = text.strip()
    if text == "0":
        return tuple(counts)
    for term in text.split("+"):
        mt = _TERM.match(term)
        if not mt:
            raise PetriNetError(f"bad marking term {term!r}")
        k = int(mt.group(1)) if mt.group(1) else 1
        p = mt.group(2)
        if p not in net.place_index:
            raise PetriNetError(f"unknown place {p!r} in marking")
        counts[net.place_index[p]] += k
    return tuple(counts)


@dataclass(frozen=True)
class LabeledSystem:
    """A net, its initial marking and the observable/unobservable split.

    ``secret`` is carried along only because the net file format can hold one.
    """

    net: PetriNet
    m0: Marking
    observable: frozenset[str]
    secret: tuple[Marking, ...] = field(default=())

    def __post_init__(self):
        m0 = tuple(int(x) for x in self.m0)
        if len(m0) != len(self.net.places) or any(x < 0 for x in m0):
            raise PetriNetError("initial marking must be a non-negative vector over the places")
        object.__setattr__(self, "m0", m0)
        obs = frozenset(self.observable)
        unknown = obs - set(self.net.transitions)
        if unknown:
            raise PetriNetError(f"observable transitions not in net: {sorted(unknown)}")
        object.__setattr__(self, "observable", obs)
        sec = tuple(tuple(int(x) for x in s) for s in self.secret)
        for s in sec:
            if len(s) != len(self.net.places) or any(x < 0 for x in s):
                raise PetriNetError("secret marking has wrong dimension or negative entries")
        object.__setattr__(self, "secret", sec)

    @property
    def unobservable(self) -> frozenset[str]:
        return frozenset(self.net.transitions) - self.observable

    @cached_property
    def obs_indices(self) -> tuple[int, ...]:
        """Observable transition indices in declaration order."""
        return tuple(j for j, t in enumerate(self.net.transitions) if t in self.observable)

    @cached_property
    def unobs_indices(self) -> tuple[int, ...]:
        """Unobservable transition indices in declaration order (coordinates of explanation vectors)."""
        return tuple(j for j, t in enumerate(self.net.transitions) if t not in self.observable)

    @cached_property
    def unobs_topological(self) -> tuple[int, ...]:
        """Positions into ``unobs_indices`` ordered so producers precede consumers."""
        graph = _flow_graph(self.net, [self.net.transitions[j] for j in self.unobs_indices])
        order = graphlib.TopologicalSorter(graph).static_order()
        pos = {self.net.transitions[j]: k for k, j in enumerate(self.unobs_indices)}
        return tuple(pos[n[1]] for n in order if n[0] == "t")

    @cached_property
    def unobs_columns(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Sparse incidence columns of the unobservable transitions."""
        return tuple(self.net._delta_items[j] for j in self.unobs_indices)

    @cached_property
    def unobs_producers(self) -> tuple[tuple[int, ...], ...]:
        """For each place, positions of the unobservable transitions that add tokens to it."""
        prod: list[list[int]] = [[] for _ in self.net.places]
        for k, col in enumerate(self.unobs_columns):
            for i, d in col:
                if d > 0:
                    prod[i].append(k)
        return tuple(tuple(p) for p in prod)

    def with_observable(self, observable: Iterable[str]) -> LabeledSystem:
        return LabeledSystem(self.net, self.m0, frozenset(observable), self.secret)

    def with_secret(self, secret: Iterable[Marking]) -> LabeledSystem:
        return LabeledSystem(self.net, self.m0, self.observable, tuple(secret))


def unobservable_subnet(sys: LabeledSystem) -> PetriNet:
    return sys.net.restrict(sys.unobservable)


def _flow_graph(net: PetriNet, transitions: Iterable[str]) -> dict:
    """Predecessor map of the flow relation restricted to ``transitions``.

    Nodes are ``("p", name)`` / ``("t", name)`` so place and transition ids never collide.
    """
    graph: dict = {("p", p): set() for p in net.places}
    for t in transitions:
        j = net.transition_index[t]
        node = ("t", t)
        graph[node] = {("p", net.places[i]) for i in np.flatnonzero(net.pre[:, j])}
        for i in np.flatnonzero(net.post[:, j]):
            graph[("p", net.places[i])].add(node)
    return graph


def has_cycle(net: PetriNet, transitions: Iterable[str] | None = None) -> bool:
    """True iff the place/transition flow relation over ``transitions`` has a directed cycle."""
    graph = _flow_graph(net, net.transitions if transitions is None else transitions)
    try:
        graphlib.TopologicalSorter(graph).prepare()
    except graphlib.CycleError:
        return True
    return False


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool | None  # None: not decided statically
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def validate(sys: LabeledSystem) -> ValidationReport:
    unobs = sys.unobservable
    sub_cyclic = has_cycle(sys.net, unobs)
    net_cyclic = has_cycle(sys.net)
    return ValidationReport((
        Check("unobservable_acyclic", not sub_cyclic,
              "unobservable subnet has a directed cycle" if sub_cyclic else "no cycle among unobservable transitions"),
        Check("has_unobservable", len(unobs) >= 1, f"{len(unobs)} unobservable transitions"),
        Check("net_cyclic", net_cyclic,
              "net contains a directed cycle" if net_cyclic else "net is acyclic"),
        Check("bounded_live", None, "checked empirically during exploration"),
    ))


# ---------------------------------------------------------------------------
# net file format


def serialize_net(sys: LabeledSystem) -> str:
    net = sys.net
    lines = [
        "places: " + " ".join(net.places),
        "transitions: " + " ".join(net.transitions),
    ]
    for j, t in enumerate(net.transitions):
        for i in np.flatnonzero(net.pre[:, j]):
            lines.append(f"arc: {net.places[i]} -> {t} {int(net.pre[i, j])}")
        for i in np.flatnonzero(net.post[:, j]):
            lines.append(f"arc: {t} -> {net.places[i]} {int(net.post[i, j])}")
    for p, k in zip(net.places, sys.m0):
        if k:
            lines.append(f"initial: {k} {p}")
    lines.append("observable: " + " ".join(t for t in net.transitions if t in sys.observable))
    if sys.secret:
        lines.append("secret: " + " | ".join(render_marking(net, s) for s in sys.secret))
    return "\n".join(lines) + "\n"


def _ids(rest: str, what: str, lineno: int) -> list[str]:
    ids = rest.split()
    if len(set(ids)) != len(ids):
        dup = next(x for x in ids if ids.count(x) > 1)
        raise NetParseError(f"duplicate {what} id {dup!r}", lineno)
    return ids


def parse_net(text: str) -> LabeledSystem:
    places: list[str] | None = None
    transitions: list[str] | None = None
    arcs: list[tuple[int, str, str, int]] = []
    initial: list[tuple[int, str, int]] = []
    observable: list[str] | None = None
    observable_line = 0
    secret_spec: tuple[int, str] | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise NetParseError(f"expected 'key: value', got {line!r}", lineno)
        key = key.strip()
        if key == "places":
            if places is not None:
                raise NetParseError("places declared twice", lineno)
            places = _ids(rest, "place", lineno)
        elif key == "transitions":
            if transitions is not None:
                raise NetParseError("transitions declared twice", lineno)
            transitions = _ids(rest, "transition", lineno)
        elif key == "arc":
            mt = re.fullmatch(r"\s*(\S+)\s*->\s*(\S+)\s+(-?\d+)\s*", rest)
            if not mt:
                raise NetParseError(f"malformed arc {rest.strip()!r}", lineno)
            w = int(mt.group(3))
            if w < 0:
                raise NetParseError("negative arc weight", lineno)
            arcs.append((lineno, mt.group(1), mt.group(2), w))
        elif key == "initial":
            parts = rest.split()
            if len(parts) != 2 or not re.fullmatch(r"-?\d+", parts[0]):
                raise NetParseError(f"malformed initial line {rest.strip()!r}", lineno)
            k = int(parts[0])
            if k < 0:
                raise NetParseError("negative token count", lineno)
            initial.append((lineno, parts[1], k))
        elif key == "observable":
            if observable is not None:
                raise NetParseError("observable declared twice", lineno)
            observable = _ids(rest, "observable transition", lineno)
            observable_line = lineno
        elif key == "secret":
            secret_spec = (lineno, rest)
        else:
            raise NetParseError(f"unknown section {key!r}", lineno)

    if places is None:
        raise NetParseError("places missing")
    if transitions is None:
        raise NetParseError("transitions missing")
    if observable is None:
        raise NetParseError("partition missing")
    clash = set(places) & set(transitions)
    if clash:
        raise NetParseError(f"identifier used for both a place and a transition: {sorted(clash)}")

    pidx = {p: i for i, p in enumerate(places)}
    tidx = {t: j for j, t in enumerate(transitions)}
    pre = np.zeros((len(places), len(transitions)), dtype=np.int64)
    post = np.zeros_like(pre)
    for lineno, src, dst, w in arcs:
        if src in pidx and dst in tidx:
            pre[pidx[src], tidx[dst]] += w
        elif src in tidx and dst in pidx:
            post[pidx[dst], tidx[src]] += w
        else:
            bad = src if src not in pidx and src not in tidx else dst
            raise NetParseError(f"unknown place or transition {bad!r} in arc", lineno)
    m0 = [0] * len(places)
    for lineno, p, k in initial:
        if p not in pidx:
            raise NetParseError(f"unknown place {p!r} in initial marking", lineno)
        m0[pidx[p]] += k
    for t in observable:
        if t not in tidx:
            raise NetParseError(f"partition names unknown transition {t!r}", observable_line)

    net = PetriNet(places, transitions, pre, post)
    secret: list[Marking] = []
    if secret_spec is not None:
        lineno, rest = secret_spec
        for term in rest.split("|"):
            try:
                secret.append(parse_marking(net, term))
            except PetriNetError as exc:
                raise NetParseError(str(exc), lineno) from None
    return LabeledSystem(net, tuple(m0), frozenset(observable), tuple(secret))


def read_net(path) -> LabeledSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_net(fh.read())


def write_net(sys: LabeledSystem, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_net(sys))
