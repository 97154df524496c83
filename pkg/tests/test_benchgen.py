import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opacity_lab import (
    Benchmark1Params,
    Benchmark2Params,
    BenchmarkError,
    build_rg,
    gen_benchmark1,
    gen_benchmark1_group,
    gen_benchmark2,
    gen_benchmark2_group,
    load_benchmark2_topology,
    render_marking,
    serialize_net,
    validate,
)
from opacity_lab.benchgen import RESOURCES, TO_SETS, replay_secret_sequence

from conftest import b1


@pytest.mark.parametrize("beta", [5, 6, 7])
def test_structural_counts(beta):
    sys = b1(3, beta).system
    assert len(sys.net.transitions) == 4 * beta - 4
    assert len(sys.net.places) == 4 * beta - 5


def test_secret_listing():
    case = b1(5)
    assert [render_marking(case.system.net, m) for m in case.secret] == ["5p00", "3p00+p21+p31", "3p00+p22+p33"]
    case = b1(7, 6)
    assert len(case.system.net.transitions) == 20 and len(case.system.net.places) == 19
    assert [render_marking(case.system.net, m) for m in case.secret] == ["7p00", "5p00+p21+p31", "5p00+p22+p33"]
    assert case.system.secret == case.secret


@pytest.mark.parametrize("alpha", [5, 6, 7])
@pytest.mark.parametrize("beta", [5, 6])
def test_replay_reaches_third_secret(alpha, beta):
    case = b1(alpha, beta)
    assert replay_secret_sequence(case) == case.secret[2]


@pytest.mark.parametrize("params", [
    Benchmark1Params(5, beta=4),
    Benchmark1Params(1),
    Benchmark1Params(5, lam=1),
    Benchmark1Params(5, lam=16),
])
def test_parameter_errors(params):
    with pytest.raises(BenchmarkError):
        gen_benchmark1(params)


def test_observable_selection():
    sys = b1(5).system
    assert sys.observable == {"t11", "t21"}
    a = gen_benchmark1(Benchmark1Params(5, 6, 6, seed=7))
    b = gen_benchmark1(Benchmark1Params(5, 6, 6, seed=7))
    assert serialize_net(a.system) == serialize_net(b.system)
    assert len(a.system.observable) == 6 and {"t11", "t21"} <= a.system.observable
    others = {frozenset(gen_benchmark1(Benchmark1Params(5, 6, 6, seed=s)).system.observable) for s in range(10)}
    assert len(others) > 1


@settings(max_examples=30, deadline=None)
@given(alpha=st.integers(2, 9), beta=st.integers(5, 9), data=st.data())
def test_generator_invariants(alpha, beta, data):
    lam = data.draw(st.integers(2, 4 * beta - 5))
    seed = data.draw(st.integers(0, 2**32))
    case = gen_benchmark1(Benchmark1Params(alpha, beta, lam, seed))
    sys = case.system
    assert len(sys.net.transitions) == 4 * beta - 4
    assert len(sys.net.places) == 4 * beta - 5
    assert sum(sys.m0) == alpha
    assert len(sys.observable) == lam
    rep = validate(sys)
    assert rep["unobservable_acyclic"].passed and rep["has_unobservable"].passed and rep["net_cyclic"].passed


def test_benchmark1_groups():
    groups = {g: gen_benchmark1_group(g) for g in (1, 2, 3)}
    assert [len(groups[g]) for g in (1, 2, 3)] == [3, 3, 6]
    assert all(len(c.system.net.transitions) == 16 for c in groups[1])
    assert all(len(c.system.net.transitions) == 20 and c.params["lambda"] == 2 for c in groups[2])
    assert {c.params["lambda"] for c in groups[3]} == {4, 6}
    assert all(c.params["lambda"] > 2 for c in groups[3])
    for c in groups[3]:
        rep = validate(c.system)
        assert rep["unobservable_acyclic"].passed and rep["has_unobservable"].passed and rep["net_cyclic"].passed
    ids = [c.id for g in groups.values() for c in g]
    assert len(set(ids)) == 12
    with pytest.raises(BenchmarkError):
        gen_benchmark1_group(4)


def test_benchmark2_topology_checks():
    net = load_benchmark2_topology()
    assert {f"p{i}" for i in range(1, 23)} <= set(net.places)
    assert {f"t{i}" for i in range(1, 22)} <= set(net.transitions)
    assert set(RESOURCES) | {"p22"} <= set(net.places)
    for to in TO_SETS.values():
        case_sys = gen_benchmark2(Benchmark2Params(7, "To1", "S1")).system.with_observable(to)
        assert validate(case_sys)["unobservable_acyclic"].passed


def test_missing_topology_file(tmp_path):
    with pytest.raises(BenchmarkError):
        load_benchmark2_topology(tmp_path / "nope.net")


def test_benchmark2_examples():
    case = gen_benchmark2(Benchmark2Params(7, "To1", "S1"))
    sys = case.system
    assert render_marking(sys.net, sys.m0) == "7p17+9p18+4p19+3p20+2p21+7p22"
    assert sys.observable == {"t4", "t5", "t11", "t12", "t14", "t15", "t16"}
    assert case.secret[0] == sys.m0
    assert len(gen_benchmark2(Benchmark2Params(11, "To4", "S5")).system.observable) == 10
    sizes = [len(gen_benchmark2(Benchmark2Params(11, "To1", s)).secret) for s in ("S6", "S7", "S8")]
    assert sizes == [5, 6, 7]
    with pytest.raises(BenchmarkError):
        gen_benchmark2(Benchmark2Params(7, "To9", "S1"))


def test_benchmark2_groups():
    groups = {g: gen_benchmark2_group(g) for g in (1, 2, 3)}
    assert sum(len(v) for v in groups.values()) == 11
    assert [c.params["alpha"] for c in groups[1]] == [7, 8, 9, 10, 11]
    g2 = groups[2]
    assert len({c.params["to_set"] for c in g2}) == 3
    assert len({(c.params["alpha"], c.params["secret_set"]) for c in g2}) == 1
    g3 = groups[3]
    assert len({c.params["secret_set"] for c in g3}) == 3
    assert len({(c.params["alpha"], c.params["to_set"]) for c in g3}) == 1


def test_benchmark2_markings_keep_token_invariants():
    net = load_benchmark2_topology()
    for g in (1, 2, 3):
        for case in gen_benchmark2_group(g, net):
            m0 = case.system.m0
            c = case.system.net.post - case.system.net.pre
            # reachable markings satisfy every conservation law y.C = 0 that m0 does
            _, _, vt = np.linalg.svd(c.T.astype(float))
            rank = np.linalg.matrix_rank(c)
            laws = vt[rank:]
            for m in case.secret:
                diff = np.array(m) - np.array(m0)
                assert np.allclose(laws @ diff, 0, atol=1e-9), (case.id, render_marking(net, m))


@pytest.mark.slow
def test_benchmark2_s1_markings_are_reachable():
    case = gen_benchmark2(Benchmark2Params(7, "To1", "S1"))
    rg = build_rg(case.system).graph
    assert all(m in rg.index for m in case.secret)


def test_benchmark2_alpha_shift_and_scale():
    case = gen_benchmark2(Benchmark2Params(5, "To1", "S3"))
    assert all(m[case.system.net.place_index["p22"]] <= 5 for m in case.secret)
    with pytest.raises(BenchmarkError):
        gen_benchmark2(Benchmark2Params(3, "To1", "S6"))
    scaled = gen_benchmark2(Benchmark2Params(7, "To1", "S1", resource_scale=2))
    assert scaled.id.endswith("-r2")
    assert scaled.system.m0[scaled.system.net.place_index["p18"]] == 5


def test_lenient_generation_drops_missing_rows():
    p = Benchmark2Params(7, "To1", "S8")
    with pytest.raises(BenchmarkError):
        gen_benchmark2(p)
    case = gen_benchmark2(p, strict=False)
    full = gen_benchmark2(Benchmark2Params(11, "To1", "S8"))
    assert 0 < len(case.secret) < len(full.secret)
    assert all(min(m) >= 0 for m in case.secret)
