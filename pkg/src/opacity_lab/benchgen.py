"""Generators for the two benchmark families.

Benchmark 1 is a parametric net of four elementary cycles around ``p00``.
Benchmark 2 is the hospital emergency-department net, shipped as
``data/benchmark2.net`` with the capacity place ``p22`` left unmarked; the
generator fills in the initial marking, the observable set and the secret.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .net import LabeledSystem, Marking, PetriNet, fire_sequence, parse_marking, parse_net, validate


class BenchmarkError(ValueError):
    pass


@dataclass(frozen=True)
class TestCase:
    id: str
    group: str
    system: LabeledSystem
    secret: tuple[Marking, ...]
    params: dict = field(default_factory=dict, compare=False)

    __test__ = False  # not a pytest class


# ---------------------------------------------------------------------------
# Benchmark 1


@dataclass(frozen=True)
class Benchmark1Params:
    alpha: int
    beta: int = 5
    lam: int = 2
    seed: int = 0

    def check(self) -> None:
        if self.beta < 5:
            raise BenchmarkError("beta must be >= 5")
        if self.alpha < 2:
            raise BenchmarkError("alpha must be >= 2 for the secret to be reachable")
        if not 2 <= self.lam <= 4 * self.beta - 5:
            raise BenchmarkError(f"lambda must lie in [2, {4 * self.beta - 5}]")


def benchmark1_net(beta: int) -> PetriNet:
    """The four-cycle net; ``beta`` transitions and places per elementary cycle."""
    if beta < 3:
        raise BenchmarkError("beta must be >= 3 for the net to exist")
    b = beta
    places = ["p00"]
    places += [f"p1{i}" for i in range(1, b)]
    places += [f"p2{i}" for i in range(1, b)]
    places += [f"p3{i}" for i in range(1, b)]
    places += [f"p4{i}" for i in range(3, b)]
    transitions = [f"t1{i}" for i in range(1, b + 1)]
    transitions += [f"t2{i}" for i in range(1, b + 1)]
    transitions += [f"t3{i}" for i in range(2, b)]
    transitions += [f"t4{i}" for i in range(3, b + 1)]

    pi = {p: k for k, p in enumerate(places)}
    ti = {t: k for k, t in enumerate(transitions)}
    pre = np.zeros((len(places), len(transitions)), dtype=np.int64)
    post = np.zeros_like(pre)

    def arc(src: str, t: str, dst: str | None = None, w_in: int = 1, w_out: int = 1):
        pre[pi[src], ti[t]] += w_in
        if dst is not None:
            post[pi[dst], ti[t]] += w_out

    def pl(c: int, i: int) -> str:
        return "p00" if i == 0 or i == b else f"p{c}{i}"

    for i in range(1, b + 1):
        arc(pl(1, i - 1), f"t1{i}", pl(1, i))
    # t21 forks one pair of tokens into cycles 2 and 3, t2b joins them again
    arc("p00", "t21", "p21", w_in=2)
    post[pi["p31"], ti["t21"]] += 1
    for i in range(2, b):
        arc(f"p2{i - 1}", f"t2{i}", f"p2{i}")
        arc(f"p3{i - 1}", f"t3{i}", f"p3{i}")
    arc(f"p2{b - 1}", f"t2{b}", "p00", w_out=2)
    pre[pi[f"p3{b - 1}"], ti[f"t2{b}"]] += 1
    arc("p32", "t43", "p43")
    for i in range(4, b + 1):
        arc(f"p4{i - 1}", f"t4{i}", pl(4, i))
    return PetriNet(places, transitions, pre, post)


def benchmark1_secret(net: PetriNet, alpha: int) -> tuple[Marking, ...]:
    m0 = parse_marking(net, f"{alpha}p00")
    m1 = parse_marking(net, f"{alpha - 2}p00+p21+p31")
    m2 = parse_marking(net, f"{alpha - 2}p00+p22+p33")
    return (m0, m1, m2)


def gen_benchmark1(p: Benchmark1Params) -> TestCase:
    p.check()
    net = benchmark1_net(p.beta)
    observable = ["t11", "t21"]
    rest = [t for t in net.transitions if t not in observable]
    rng = random.Random(p.seed)
    extra = rng.sample(rest, p.lam - 2)
    observable += sorted(extra, key=net.transitions.index)
    m0 = parse_marking(net, f"{p.alpha}p00")
    secret = benchmark1_secret(net, p.alpha)
    sys = LabeledSystem(net, m0, frozenset(observable), secret)
    case_id = f"B1-a{p.alpha}-b{p.beta}-l{p.lam}"
    if p.lam > 2:
        case_id += f"-s{p.seed}"
    return TestCase(case_id, "", sys, secret, {"alpha": p.alpha, "beta": p.beta, "lambda": p.lam, "seed": p.seed})


GROUP3_LAMBDAS = (4, 6)


def gen_benchmark1_group(group: int, seed: int = 42, group3_lambdas=GROUP3_LAMBDAS) -> list[TestCase]:
    if group == 1:
        grid = [(a, 5, 2) for a in (5, 6, 7)]
    elif group == 2:
        grid = [(a, 6, 2) for a in (5, 6, 7)]
    elif group == 3:
        grid = [(a, 6, lam) for lam in group3_lambdas for a in (5, 6, 7)]
    else:
        raise BenchmarkError(f"Benchmark 1 has groups 1-3, not {group}")
    out = []
    for alpha, beta, lam in grid:
        case = gen_benchmark1(Benchmark1Params(alpha, beta, lam, seed))
        out.append(TestCase(case.id, f"G{group}", case.system, case.secret, case.params))
    return out


def replay_secret_sequence(case: TestCase) -> Marking:
    """Fire t21 t22 t32 t33 from M0 (reaches the third secret marking)."""
    return fire_sequence(case.system.net, case.system.m0, ["t21", "t22", "t32", "t33"])


# ---------------------------------------------------------------------------
# Benchmark 2

RESOURCES = {"p17": 7, "p18": 9, "p19": 4, "p20": 3, "p21": 2}

TO_SETS = {
    "To1": ("t4", "t5", "t11", "t12", "t14", "t15", "t16"),
    "To2": ("t1", "t4", "t5", "t11", "t12", "t14", "t15", "t16"),
    "To3": ("t1", "t4", "t5", "t9", "t11", "t12", "t14", "t15", "t16"),
    "To4": ("t1", "t4", "t5", "t9", "t11", "t12", "t14", "t15", "t16", "t21"),
}

_RES = "7p17+9p18+4p19+3p20+2p21"

# Secret rows per set, each written for the capacity in SECRET_ALPHA.
# ``M0`` is the full initial marking; ``{a}`` is the capacity alpha.
_S_BASE = (
    "M0",
    "{a1}p22+p4+6p17+9p18+4p19+3p20+2p21",
    "{a1}p22+p6+" + _RES,
    "{a2}p22+p1+p9+7p17+9p18+4p19+3p20+p21",
)
_S6_EXTRA = (
    "M0",
    "10p22+p4+6p17+9p18+4p19+3p20+2p21",
    "8p22+p9+p11+p13+6p17+9p18+3p19+3p20+p21",
    "6p22+p5+p9+p10+2p12+7p17+6p18+4p19+3p20+p21",
    "4p22+p4+p5+p9+p10+p11+p12+p13+5p17+7p18+3p19+3p20+p21",
)
_M5 = "3p6+2p9+6p12+7p17+3p18+4p19+3p20"
_M6 = "7p4+3p5+p13+6p18+3p19+3p20+2p21"

SECRET_ALPHA = {"S1": 7, "S2": 8, "S3": 9, "S4": 10, "S5": 11, "S6": 11, "S7": 11, "S8": 11}


def secret_table(name: str, alpha: int | None = None) -> tuple[str, ...]:
    """Secret rows as marking strings (``M0`` left symbolic)."""
    if name in ("S1", "S2", "S3", "S4", "S5"):
        a = SECRET_ALPHA[name] if alpha is None else alpha
        return tuple(s.format(a1=a - 1, a2=a - 2) for s in _S_BASE)
    if name == "S6":
        return _S6_EXTRA
    if name == "S7":
        return _S6_EXTRA + (_M5,)
    if name == "S8":
        return _S6_EXTRA + (_M5, _M6)
    raise BenchmarkError(f"unknown secret set {name!r}")


@dataclass(frozen=True)
class Benchmark2Params:
    alpha: int
    to_set: str = "To1"
    secret_set: str = "S1"
    resource_scale: int = 1

    def check(self) -> None:
        if self.to_set not in TO_SETS:
            raise BenchmarkError(f"unknown observable set {self.to_set!r}")
        if self.secret_set not in SECRET_ALPHA:
            raise BenchmarkError(f"unknown secret set {self.secret_set!r}")
        if self.alpha < 1 or self.resource_scale < 1:
            raise BenchmarkError("alpha and resource_scale must be positive")


def load_benchmark2_topology(path=None) -> PetriNet:
    if path is None:
        text = resources.files("opacity_lab").joinpath("data/benchmark2.net").read_text(encoding="utf-8")
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except FileNotFoundError:
            raise BenchmarkError(f"Benchmark 2 topology file not found: {path}") from None
    net = parse_net(text).net
    _check_benchmark2_topology(net)
    return net


def _check_benchmark2_topology(net: PetriNet) -> None:
    missing_p = [f"p{i}" for i in range(1, 23) if f"p{i}" not in net.place_index]
    missing_t = [f"t{i}" for i in range(1, 22) if f"t{i}" not in net.transition_index]
    if missing_p or missing_t:
        raise BenchmarkError(f"topology lacks {missing_p + missing_t}")
    for name, to in TO_SETS.items():
        sys = LabeledSystem(net, (0,) * len(net.places), frozenset(to))
        if validate(sys)["unobservable_acyclic"].passed is not True:
            raise BenchmarkError(f"unobservable subnet is cyclic under {name}")


def _scaled_resources(scale: int) -> dict[str, int]:
    return {p: math.ceil(k / scale) for p, k in RESOURCES.items()}


def benchmark2_m0(net: PetriNet, alpha: int, resource_scale: int = 1) -> Marking:
    m = [0] * len(net.places)
    m[net.place_index["p22"]] = alpha
    for p, k in _scaled_resources(resource_scale).items():
        m[net.place_index[p]] = k
    return tuple(m)


def gen_benchmark2(p: Benchmark2Params, topology: PetriNet | None = None, strict: bool = True) -> TestCase:
    """With ``strict=False`` secret rows that go negative at this alpha are dropped instead of raising."""
    p.check()
    net = topology if topology is not None else load_benchmark2_topology()
    m0 = benchmark2_m0(net, p.alpha, p.resource_scale)
    secret = []
    for row in secret_table(p.secret_set):
        if row == "M0":
            secret.append(m0)
            continue
        try:
            s = parse_marking(net, row)
        except ValueError as exc:
            raise BenchmarkError(f"{p.secret_set}: {exc}") from None
        s = list(s)
        # rows are written for the table's capacity; move the surplus to p22
        s[net.place_index["p22"]] += p.alpha - SECRET_ALPHA[p.secret_set]
        if p.resource_scale != 1:
            # keep the marking on the same resource invariants as the scaled M0
            for q, k in RESOURCES.items():
                s[net.place_index[q]] -= k - math.ceil(k / p.resource_scale)
        if min(s) < 0:
            if not strict:
                continue
            raise BenchmarkError(f"{p.secret_set} has no counterpart at alpha={p.alpha}")
        secret.append(tuple(s))
    secret = tuple(dict.fromkeys(secret))
    sys = LabeledSystem(net, m0, frozenset(TO_SETS[p.to_set]), secret)
    case_id = f"B2-a{p.alpha}-{p.to_set}-{p.secret_set}"
    if p.resource_scale != 1:
        case_id += f"-r{p.resource_scale}"
    params = {"alpha": p.alpha, "to_set": p.to_set, "lambda": len(TO_SETS[p.to_set]),
              "secret_set": p.secret_set, "resource_scale": p.resource_scale}
    return TestCase(case_id, "", sys, secret, params)


def benchmark2_grid(group: int) -> list[Benchmark2Params]:
    if group == 1:
        return [Benchmark2Params(a, "To1", f"S{a - 6}") for a in (7, 8, 9, 10, 11)]
    if group == 2:
        return [Benchmark2Params(11, to, "S5") for to in ("To2", "To3", "To4")]
    if group == 3:
        return [Benchmark2Params(11, "To1", s) for s in ("S6", "S7", "S8")]
    raise BenchmarkError(f"Benchmark 2 has groups 1-3, not {group}")


def gen_benchmark2_group(group: int, topology: PetriNet | None = None) -> list[TestCase]:
    net = topology if topology is not None else load_benchmark2_topology()
    out = []
    for p in benchmark2_grid(group):
        case = gen_benchmark2(p, net)
        out.append(TestCase(case.id, f"G{group}", case.system, case.secret, case.params))
    return out
