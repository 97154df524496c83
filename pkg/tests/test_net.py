import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opacity_lab import (
    DisabledTransitionError,
    LabeledSystem,
    NetParseError,
    PetriNet,
    PetriNetError,
    enabled,
    fire,
    fire_sequence,
    incidence,
    parse_marking,
    parse_net,
    render_marking,
    serialize_net,
    validate,
)
from opacity_lab.net import has_cycle, unobservable_subnet

from conftest import b1, mark


def test_enabled_examples():
    sys = b1(5).system
    assert not enabled(sys.net, sys.m0, "t22")
    assert enabled(sys.net, sys.m0, "t21")
    # exact boundary: m equal to the pre-set
    m = tuple(int(x) for x in sys.net.pre[:, sys.net.tindex("t21")])
    assert enabled(sys.net, m, "t21")
    assert not enabled(sys.net, mark(sys, "p00"), "t21")


def test_unknown_transition_is_an_error():
    sys = b1(5).system
    with pytest.raises(PetriNetError):
        enabled(sys.net, sys.m0, "t99")


def test_fire_examples():
    sys = b1(5).system
    m1 = fire(sys.net, sys.m0, "t21")
    assert render_marking(sys.net, m1) == "3p00+p21+p31"
    m = fire(sys.net, m1, "t22")
    assert render_marking(sys.net, m) == "3p00+p22+p31"
    end = fire_sequence(sys.net, sys.m0, ["t21", "t22", "t32", "t33"])
    assert render_marking(sys.net, end) == "3p00+p22+p33"


def test_fire_disabled_raises():
    sys = b1(5).system
    with pytest.raises(DisabledTransitionError):
        fire(sys.net, sys.m0, "t22")


def test_incidence_columns():
    net = PetriNet(["p1", "p2"], ["t"], [[1], [0]], [[0], [1]])
    assert incidence(net)[:, 0].tolist() == [-1, 1]
    sys = b1(5).system
    col = dict(zip(sys.net.places, incidence(sys.net)[:, sys.net.tindex("t21")].tolist()))
    assert col["p00"] == -2 and col["p21"] == 1 and col["p31"] == 1
    assert sum(abs(v) for v in col.values()) == 4
    same = PetriNet(["p"], ["t"], [[2]], [[2]])
    assert not incidence(same).any()


def test_net_rejects_bad_matrices():
    with pytest.raises(PetriNetError):
        PetriNet(["p"], ["t"], [[-1]], [[0]])
    with pytest.raises(PetriNetError):
        PetriNet(["p", "p"], ["t"], [[1], [0]], [[0], [1]])
    with pytest.raises(PetriNetError):
        PetriNet(["p"], ["t", "u"], [[1]], [[0]])


def test_render_and_parse_marking():
    sys = b1(5).system
    m = mark(sys, "3p00 + p22 + p33")
    assert render_marking(sys.net, m) == "3p00+p22+p33"
    assert render_marking(sys.net, (0,) * len(sys.net.places)) == "0"
    assert parse_marking(sys.net, "0") == (0,) * len(sys.net.places)
    with pytest.raises(PetriNetError):
        parse_marking(sys.net, "2p99")


def _random_walk(sys, steps, choices):
    m = sys.m0
    trail = [m]
    for c in choices[:steps]:
        en = [t for t in sys.net.transitions if enabled(sys.net, m, t)]
        t = en[c % len(en)]
        m = fire(sys.net, m, t)
        trail.append((t, m))
    return trail


@settings(max_examples=40, deadline=None)
@given(alpha=st.integers(2, 6), beta=st.integers(5, 7), choices=st.lists(st.integers(0, 50), min_size=1, max_size=40))
def test_firing_is_reversible_and_conserves_tokens(alpha, beta, choices):
    sys = b1(alpha, beta).system
    c = incidence(sys.net)
    m = sys.m0
    for ch in choices:
        en = [t for t in sys.net.transitions if enabled(sys.net, m, t)]
        assert en, "Benchmark 1 never deadlocks"
        t = en[ch % len(en)]
        m2 = fire(sys.net, m, t)
        assert min(m2) >= 0
        assert tuple(np.array(m2) - c[:, sys.net.tindex(t)]) == m
        assert sum(m2) == alpha
        m = m2


@pytest.mark.parametrize("beta", [5, 6])
def test_elementary_cycles_return_to_start(beta):
    sys = b1(4, beta).system
    b = beta
    cycle1 = [f"t1{i}" for i in range(1, b + 1)]
    # cycles 2 and 3 share t21 and t2b, so they close together
    cycles23 = ["t21"] + [f"t2{i}" for i in range(2, b)] + [f"t3{i}" for i in range(2, b)] + [f"t2{b}"]
    for seq in (cycle1, cycles23):
        assert fire_sequence(sys.net, sys.m0, seq) == sys.m0


def test_unobservable_subnet():
    sys = b1(5).system
    sub = unobservable_subnet(sys)
    assert len(sub.transitions) == 4 * 5 - 6
    assert sub.places == sys.net.places
    again = unobservable_subnet(LabeledSystem(sub, sys.m0, frozenset()))
    assert again == sub
    one = sys.with_observable(t for t in sys.net.transitions if t != "t22")
    assert unobservable_subnet(one).transitions == ("t22",)


def test_validate_benchmark1():
    for alpha, beta in [(2, 5), (5, 5), (3, 6)]:
        rep = validate(b1(alpha, beta).system)
        assert rep["unobservable_acyclic"].passed
        assert rep["has_unobservable"].passed
        assert rep["net_cyclic"].passed
        assert rep["bounded_live"].passed is None
        assert rep["bounded_live"].detail == "checked empirically during exploration"
        assert rep.ok


def test_validate_failures():
    sys = b1(5).system
    all_unobs = sys.with_observable([])
    assert validate(all_unobs)["unobservable_acyclic"].passed is False
    all_obs = sys.with_observable(sys.net.transitions)
    rep = validate(all_obs)
    assert rep["has_unobservable"].passed is False and not rep.ok
    line = parse_net("places: a b\ntransitions: t\narc: a -> t 1\narc: t -> b 1\nobservable:\n")
    assert validate(line)["net_cyclic"].passed is False


def _nx_cycle(net, transitions):
    import networkx as nx

    g = nx.DiGraph()
    for t in transitions:
        j = net.transition_index[t]
        for i in range(len(net.places)):
            if net.pre[i, j]:
                g.add_edge(("p", i), ("t", t))
            if net.post[i, j]:
                g.add_edge(("t", t), ("p", i))
    return not nx.is_directed_acyclic_graph(g)


@settings(max_examples=80, deadline=None)
@given(data=st.data())
def test_cycle_check_matches_networkx(data):
    n_p = data.draw(st.integers(1, 8))
    n_t = data.draw(st.integers(1, 8))
    pre = data.draw(st.lists(st.lists(st.integers(0, 1), min_size=n_t, max_size=n_t), min_size=n_p, max_size=n_p))
    post = data.draw(st.lists(st.lists(st.integers(0, 1), min_size=n_t, max_size=n_t), min_size=n_p, max_size=n_p))
    net = PetriNet([f"p{i}" for i in range(n_p)], [f"t{j}" for j in range(n_t)], pre, post)
    sub = data.draw(st.sets(st.sampled_from(net.transitions)))
    assert has_cycle(net, sub) == _nx_cycle(net, sub)
    assert has_cycle(net) == _nx_cycle(net, net.transitions)


def test_round_trip_benchmark1():
    for alpha, beta, lam in [(5, 5, 2), (3, 6, 4)]:
        sys = b1(alpha, beta, lam).system
        text = serialize_net(sys)
        again = parse_net(text)
        assert again == sys
        assert serialize_net(again) == text


def test_round_trip_shipped_topology():
    from importlib import resources

    text = resources.files("opacity_lab").joinpath("data/benchmark2.net").read_text(encoding="utf-8")
    sys = parse_net(text)
    assert parse_net(serialize_net(sys)) == sys


GOOD = """
# comment
places: a b
transitions: t u
arc: a -> t 1
arc: t -> b 2   # weight two
arc: b -> u 1
arc: u -> a 1
initial: 1 a
initial: 2 a
observable: t
secret: 3a | a+b
"""


def test_parse_accumulates_and_reads_secret():
    sys = parse_net(GOOD)
    assert sys.m0 == (3, 0)
    assert sys.observable == frozenset({"t"})
    assert sys.secret == ((3, 0), (1, 1))
    assert int(sys.net.post[1, 0]) == 2


@pytest.mark.parametrize("text, reason", [
    (GOOD.replace("observable: t\n", ""), "partition missing"),
    (GOOD.replace("arc: a -> t 1", "arc: a -> t -1"), "negative arc weight"),
    (GOOD.replace("places: a b", "places: a b a"), "duplicate place id"),
    (GOOD.replace("transitions: t u", "transitions: t u t"), "duplicate transition id"),
    (GOOD.replace("arc: b -> u 1", "arc: zz -> u 1"), "unknown place or transition"),
    (GOOD.replace("observable: t", "observable: t v"), "unknown transition"),
    (GOOD.replace("initial: 1 a", "initial: -1 a"), "negative token count"),
])
def test_parse_errors_are_distinct(text, reason):
    with pytest.raises(NetParseError) as err:
        parse_net(text)
    assert reason in str(err.value)
    assert err.value.line is not None or reason == "partition missing"


def test_parse_error_reports_line():
    with pytest.raises(NetParseError) as err:
        parse_net(GOOD.replace("arc: a -> t 1", "arc: a -> t -1"))
    assert err.value.line == 5


def test_labeled_system_rejects_bad_inputs():
    sys = b1(3).system
    with pytest.raises(PetriNetError):
        LabeledSystem(sys.net, (1,), sys.observable)
    with pytest.raises(PetriNetError):
        LabeledSystem(sys.net, sys.m0, frozenset({"nope"}))
