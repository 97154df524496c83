"""Opacity verification of labeled Petri nets with basis reachability graphs."""

from types import ModuleType as _ModuleType

from .basis import (
    BasisStepper,
    NotObservableError,
    brute_force_explanations,
    build_brg,
    expand_basis,
    explanation_sequence,
    minimal_explanations,
)
from .benchgen import (
    Benchmark1Params,
    Benchmark2Params,
    BenchmarkError,
    TestCase,
    gen_benchmark1,
    gen_benchmark1_group,
    gen_benchmark2,
    gen_benchmark2_group,
    load_benchmark2_topology,
)
from .ebrg import EbrgStats, SecretError, build_ebrg, check_a3, compute_s_tilde_b
from .graph import BuildOutcome, GraphKind, Label, StateGraph, Status, export_dot, export_edges
from .net import (
    DisabledTransitionError,
    LabeledSystem,
    Marking,
    NetParseError,
    PetriNet,
    PetriNetError,
    enabled,
    fire,
    fire_sequence,
    incidence,
    parse_marking,
    parse_net,
    read_net,
    render_marking,
    serialize_net,
    validate,
    write_net,
)
from .opacity import (
    INF,
    OutOfSpaceError,
    Verdict,
    VerificationTimeout,
    current_estimate,
    delayed_estimate,
    oracle_current_estimate,
    oracle_verify,
    verify,
    verify_infinite_step,
    verify_k_step,
)
from .reachability import build_rg, unobservable_reach

__all__ = [n for n, v in globals().items() if not n.startswith("_") and not isinstance(v, _ModuleType)]
