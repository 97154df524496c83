from __future__ import annotations

import itertools
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from opacity_lab import (
    OutOfSpaceError,
    PetriNetError,
    Verdict,
    VerificationTimeout,
    build_ebrg,
    check_a3,
    current_estimate,
    delayed_estimate,
    oracle_current_estimate,
    oracle_verify,
    parse_net,
    unobservable_reach,
    verify,
    verify_k_step,
)

from conftest import DELAY_NET, b1, b1_graphs, mark

KS = (0, 1, 2, 3, None)


@lru_cache(maxsize=None)
def graphs_for(alpha, lam, secret):
    sys = b1(alpha, 5, lam).system
    rg, brg = b1_graphs(alpha, 5, lam)
    ebrg = build_ebrg(sys, secret)[0].graph
    return sys, {"rg": rg, "brg": brg, "ebrg": ebrg}


def words(sys, n):
    obs = sorted(sys.observable)
    for length in range(n + 1):
        yield from itertools.product(obs, repeat=length)


# -- current estimates


@pytest.mark.parametrize("alpha,lam", [(3, 2), (2, 4)])
def test_current_estimate_matches_oracle_on_short_words(alpha, lam):
    sys = b1(alpha, 5, lam).system
    rg, brg = b1_graphs(alpha, 5, lam)
    for w in words(sys, 4):
        want = oracle_current_estimate(sys, w)
        assert current_estimate(sys, rg, w) == want, w
        assert current_estimate(sys, brg, w) == want, w


def test_current_estimate_examples():
    sys = b1(3).system
    rg, brg = b1_graphs(3)
    assert current_estimate(sys, brg, ()) == {sys.m0}
    after = current_estimate(sys, brg, ("t11",))
    assert mark(sys, "2p00+p11") in after
    assert sys.m0 in after  # the silent tail of cycle 1 returns home


def test_current_estimate_small_net(delay_sys):
    from opacity_lab import build_brg

    brg = build_brg(delay_sys).graph
    assert current_estimate(delay_sys, brg, ()) == {mark(delay_sys, "p0"), mark(delay_sys, "p1")}
    assert current_estimate(delay_sys, brg, ("a",)) == {mark(delay_sys, "p2")}
    assert current_estimate(delay_sys, brg, ("a", "b")) == frozenset()


def test_unknown_or_silent_symbol_rejected():
    sys = b1(3).system
    rg, _ = b1_graphs(3)
    with pytest.raises(PetriNetError):
        current_estimate(sys, rg, ("t12",))
    with pytest.raises(PetriNetError):
        oracle_current_estimate(sys, ("nope",))


# -- fixed verdicts


def test_generated_secret_exposed_at_start():
    case = b1(5)
    sys = case.system
    rg, brg = b1_graphs(5)
    for g in (rg, brg):
        vd = verify(sys, g, case.secret, 0)
        assert not vd.opaque
        assert (vd.u, vd.v) == ((), ())
        assert vd.exposed == {mark(sys, "5p00")}


def test_all_reachable_not_opaque_and_unreachable_opaque():
    sys = b1(3).system
    rg, brg = b1_graphs(3)
    assert not verify(sys, rg, rg.nodes, None).opaque
    assert not oracle_verify(sys, rg.nodes, None).opaque
    ghost = [mark(sys, "7p00")]
    assert ghost[0] not in rg.index
    for g in (rg, brg):
        assert verify(sys, g, ghost, None).opaque
    assert oracle_verify(sys, ghost, None).opaque


def test_delay_net_separates_k0_from_k1(delay_sys):
    secret = delay_sys.secret
    ebrg = build_ebrg(delay_sys, secret)[0].graph
    from opacity_lab import build_brg, build_rg

    graphs = [build_rg(delay_sys).graph, build_brg(delay_sys).graph, ebrg]
    for g in graphs:
        assert verify(delay_sys, g, secret, 0).opaque
        vd = verify(delay_sys, g, secret, 1)
        assert not vd.opaque
        assert (vd.u, vd.v) == ((), ("b",))
        assert vd.exposed == {mark(delay_sys, "p0")}
        assert not verify(delay_sys, g, secret, None).opaque
    assert oracle_verify(delay_sys, secret, 0).opaque
    vd = oracle_verify(delay_sys, secret, 1)
    assert (vd.u, vd.v, vd.exposed) == ((), ("b",), {mark(delay_sys, "p0")})


def test_oracle_k0_is_current_state_check():
    case = b1(3)
    sys = case.system
    rg, _ = b1_graphs(3)
    for secret in (case.secret, case.secret[1:], rg.nodes[5:15]):
        s = frozenset(secret)
        exposed = False
        for w in words(sys, 6):
            x = oracle_current_estimate(sys, w)
            if x and x <= s:
                exposed = True
                break
        assert oracle_verify(sys, secret, 0).opaque == (not exposed)


def test_dead_silent_transition_is_irrelevant(delay_sys):
    extra = DELAY_NET.replace("places: p0 p1 p2 p3", "places: p0 p1 p2 p3 q") \
        .replace("transitions: u a b", "transitions: u a b z") + "arc: q -> z 1\narc: z -> p1 1\n"
    bigger = parse_net(extra)
    secret = [mark(bigger, "p0")]
    for k in KS:
        assert oracle_verify(bigger, secret, k).opaque == oracle_verify(delay_sys, delay_sys.secret, k).opaque


# -- agreement and witness validity


def check_witness(sys, secret, vd):
    assert not vd.opaque
    d = delayed_estimate(sys, vd.u, vd.v)
    assert d and d <= frozenset(secret)
    assert vd.exposed <= frozenset(secret)
    if vd.k is not None:
        assert len(vd.v) <= vd.k


@pytest.mark.parametrize("variant", ["generated", "noM0"])
def test_cross_graph_agreement_alpha3(variant):
    case = b1(3)
    secret = case.secret if variant == "generated" else case.secret[1:]
    sys, gs = graphs_for(3, 2, tuple(secret))
    for k in KS:
        want = oracle_verify(sys, secret, k)
        for name, g in gs.items():
            got = verify(sys, g, secret, k)
            assert got.opaque == want.opaque, (name, k)
            if not got.opaque:
                check_witness(sys, secret, got)


@st.composite
def random_secret(draw):
    rg, _ = b1_graphs(3)
    idx = draw(st.sets(st.integers(0, len(rg.nodes) - 1), min_size=1, max_size=12))
    return tuple(rg.nodes[i] for i in sorted(idx))


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(random_secret(), st.sampled_from(KS))
def test_random_secrets_agree_with_oracle(secret, k):
    sys, gs = graphs_for(3, 2, secret)
    want = oracle_verify(sys, secret, k)
    for name, g in gs.items():
        got = verify(sys, g, secret, k)
        assert got.opaque == want.opaque, name
        if not got.opaque:
            check_witness(sys, secret, got)
    if not want.opaque:
        check_witness(sys, secret, want)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(random_secret())
def test_opacity_monotone_in_k(secret):
    sys, gs = graphs_for(3, 2, secret)
    vals = [verify(sys, gs["brg"], secret, k).opaque for k in KS]
    # larger K can only expose more
    assert vals == sorted(vals, reverse=True)


@settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(random_secret(), st.sampled_from(KS))
def test_literal_oracle_matches_quotient(secret, k):
    sys = b1(3).system
    assert oracle_verify(sys, secret, k, literal=True).opaque == oracle_verify(sys, secret, k).opaque


def test_a3_violation_needs_covers():
    # the secret basis marking reaches a non-secret marking silently
    case = b1(3)
    sys = case.system
    _, brg = b1_graphs(3)
    (violator,) = check_a3(sys, brg, case.secret)
    secret = [violator]
    assert not unobservable_reach(sys, violator) <= set(secret)
    _, gs = graphs_for(3, 2, tuple(secret))
    want = oracle_verify(sys, secret, None).opaque
    assert verify(sys, gs["brg"], secret, None).opaque == want
    assert verify(sys, gs["ebrg"], secret, None).opaque == want


# -- contracts


def test_verdict_invariant():
    with pytest.raises(ValueError):
        Verdict(True, 0, u=())
    with pytest.raises(ValueError):
        Verdict(False, 0)
    assert Verdict(True, None).k_label == "inf"
    assert Verdict(False, 2, (), ()).k_label == "2"


def test_negative_k_rejected():
    sys = b1(3).system
    _, brg = b1_graphs(3)
    with pytest.raises(ValueError):
        verify_k_step(sys, brg, b1(3).secret, -1)


def test_time_cap_raises():
    case = b1(5)
    sys = case.system
    rg, _ = b1_graphs(5)
    with pytest.raises(VerificationTimeout):
        verify(sys, rg, case.secret[1:], None, time_cap=1e-9)


def test_oracle_node_cap():
    case = b1(5)
    with pytest.raises(OutOfSpaceError):
        oracle_verify(case.system, case.secret, None, node_cap=50)
