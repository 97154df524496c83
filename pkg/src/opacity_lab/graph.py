"""State graphs shared by RG, BRG and EBRG, plus the text and DOT exports."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

from .net import LabeledSystem, Marking, render_marking


class GraphKind(str, enum.Enum):
    RG = "RG"
    BRG = "BRG"
    EBRG = "EBRG"


class Status(str, enum.Enum):
    COMPLETED = "completed"
    OUT_OF_SPACE = "out_of_space"
    TIMEOUT = "timeout"
    UNBOUNDED = "unbounded"


class Label(NamedTuple):
    """Edge label: observable transition (``None`` for epsilon) and the unobservable vector.

    ``y`` is indexed like ``LabeledSystem.unobs_indices``.
    """

    t: str | None
    y: tuple[int, ...]

    @property
    def is_epsilon(self) -> bool:
        return self.t is None


def render_label(sys: LabeledSystem, label: Label) -> str:
    names = [sys.net.transitions[j] for j in sys.unobs_indices]
    head = label.t if label.t is not None else "eps"
    if not any(label.y):
        return head
    body = ",".join(f"{names[k]}:{c}" for k, c in enumerate(label.y) if c)
    return f"{head}[y: {body}]"


@dataclass(frozen=True)
class StateGraph:
    kind: GraphKind
    nodes: tuple[Marking, ...]
    edges: tuple[tuple[int, Label, int], ...]
    initial: int = 0
    index: dict = field(default=None, compare=False, repr=False)
    out: tuple = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.index is None:
            object.__setattr__(self, "index", {m: i for i, m in enumerate(self.nodes)})
        if len(self.index) != len(self.nodes):
            raise ValueError("duplicate node markings")
        if self.out is None:
            out: list[list] = [[] for _ in self.nodes]
            for s, lab, d in self.edges:
                out[s].append((lab, d))
            object.__setattr__(self, "out", tuple(tuple(o) for o in out))

    def __len__(self):
        return len(self.nodes)

    def node_set(self) -> frozenset[Marking]:
        return frozenset(self.nodes)


@dataclass(frozen=True)
class BuildOutcome:
    status: Status
    graph: StateGraph | None
    elapsed: float
    peak_nodes: int

    @property
    def completed(self) -> bool:
        return self.status is Status.COMPLETED

    @property
    def size(self) -> int | str:
        """Node count, or the literal ``o.s.`` when the build ran out of space."""
        if self.status is Status.COMPLETED:
            return len(self.graph.nodes)
        if self.status is Status.OUT_OF_SPACE:
            return "o.s."
        return self.status.value


def export_edges(sys: LabeledSystem, g: StateGraph) -> str:
    lines = [f"# {g.kind.value} nodes={len(g.nodes)} edges={len(g.edges)} initial={g.initial}", "# nodes"]
    lines += [f"{i}  {render_marking(sys.net, m)}" for i, m in enumerate(g.nodes)]
    lines.append("# edges")
    lines += [f"{s}  {render_label(sys, lab)}  {d}" for s, lab, d in g.edges]
    return "\n".join(lines) + "\n"


def export_dot(sys: LabeledSystem, g: StateGraph, max_nodes: int = 200) -> str:
    if len(g.nodes) > max_nodes:
        raise ValueError(f"graph has {len(g.nodes)} nodes; DOT export is limited to {max_nodes}")
    lines = [f"digraph {g.kind.value} {{", "  node [shape=box];"]
    for i, m in enumerate(g.nodes):
        style = ", penwidth=2" if i == g.initial else ""
        lines.append(f'  n{i} [label="{render_marking(sys.net, m)}"{style}];')
    for s, lab, d in g.edges:
        dashed = ", style=dashed" if lab.is_epsilon else ""
        lines.append(f'  n{s} -> n{d} [label="{render_label(sys, lab)}"{dashed}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
