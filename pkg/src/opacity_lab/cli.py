"""Command line: ``run`` benchmark groups, ``gen`` benchmark nets, ``verify`` a net file."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .basis import build_brg
from .benchgen import (
    TO_SETS,
    Benchmark1Params,
    Benchmark2Params,
    BenchmarkError,
    gen_benchmark1,
    gen_benchmark2,
)
from .ebrg import SecretError, build_ebrg
from .harness import RunConfig, failed, parse_k_list, run
from .net import PetriNetError, parse_marking, read_net, render_marking, serialize_net
from .opacity import VerificationTimeout, oracle_verify, verify
from .reachability import DEFAULT_NODE_CAP, DEFAULT_TIME_CAP, build_rg

EXIT_OK = 0
EXIT_CASE_ERROR = 1
EXIT_USAGE = 2
EXIT_INCOMPLETE = 3


def _groups(text: str) -> tuple[int, ...]:
    if text == "all":
        return (1, 2, 3)
    return tuple(int(g) for g in text.split(","))


def _k_list(text: str):
    try:
        return parse_k_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="opacity-lab", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run benchmark groups and write the tables")
    r.add_argument("--benchmark", type=int, choices=(1, 2), default=1)
    r.add_argument("--group", type=_groups, default=(1, 2, 3), help="1, 2, 3, a comma list, or 'all'")
    r.add_argument("--K", type=_k_list, default=(0, 1, 2, 3, None), help="e.g. 0,1,2,inf")
    r.add_argument("--seed", type=int, default=42)
    r.add_argument("--node-cap", type=int, default=None)
    r.add_argument("--time-cap", type=float, default=None, help="seconds per graph build")
    r.add_argument("--verify-time-cap", type=float, default=None, help="seconds per verdict")
    r.add_argument("--repeats", type=int, default=3, help="build repetitions for the median time")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--desk", action="store_true", help="smaller alpha and caps (Benchmark 2)")
    r.add_argument("--out", type=Path, default=Path("results"))

    g = sub.add_parser("gen", help="write a benchmark net in the interchange format")
    g.add_argument("--benchmark", type=int, choices=(1, 2), default=1)
    g.add_argument("--alpha", type=int, required=True)
    g.add_argument("--beta", type=int, default=5)
    g.add_argument("--lambda", dest="lam", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--to", dest="to_set", choices=sorted(TO_SETS), default="To1")
    g.add_argument("--secret-set", default="S1")
    g.add_argument("--out", type=Path, default=None, help="file to write (default: stdout)")

    v = sub.add_parser("verify", help="verify opacity of a net file")
    v.add_argument("--net", type=Path, required=True)
    v.add_argument("--graph", choices=("rg", "brg", "ebrg", "oracle"), default="brg")
    v.add_argument("--K", type=_k_list, default=(None,))
    v.add_argument("--secret", default=None, help="markings separated by '|' (overrides the file)")
    v.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    v.add_argument("--time-cap", type=float, default=DEFAULT_TIME_CAP)
    return ap


def _cmd_run(args) -> int:
    kw = dict(groups=args.group, ks=args.K, seed=args.seed, out=args.out,
              repeats=args.repeats, workers=args.workers)
    for name in ("node_cap", "time_cap", "verify_time_cap"):
        if getattr(args, name) is not None:
            kw[name] = getattr(args, name)
    cfg = RunConfig.desk_preset(args.benchmark, **kw) if args.desk else RunConfig(args.benchmark, **kw)
    results = run(cfg)
    for r in results:
        line = f"{r.case_id}: |RG|={r.rg_nodes} |BRG|={r.brg_nodes} |EBRG|={r.ebrg_nodes}"
        print(line + (f"  ERROR {r.error}" if r.error else ""))
    print(f"wrote {args.out}/")
    return EXIT_CASE_ERROR if failed(results) else EXIT_OK


def _cmd_gen(args) -> int:
    if args.benchmark == 1:
        case = gen_benchmark1(Benchmark1Params(args.alpha, args.beta, args.lam, args.seed))
    else:
        case = gen_benchmark2(Benchmark2Params(args.alpha, args.to_set, args.secret_set))
    text = serialize_net(case.system)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text, encoding="utf-8")
        print(f"{case.id} -> {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    system = read_net(args.net)
    if args.secret is not None:
        secret = tuple(parse_marking(system.net, s) for s in args.secret.split("|"))
    else:
        secret = system.secret
    if not secret:
        raise SecretError("no secret given (file has no secret line and --secret is absent)")
    if args.graph == "oracle":
        graph = None
    else:
        if args.graph == "rg":
            outcome = build_rg(system, args.node_cap, args.time_cap)
        elif args.graph == "brg":
            outcome = build_brg(system, args.node_cap, args.time_cap)
        else:
            outcome, _ = build_ebrg(system, secret, args.node_cap, args.time_cap)
        print(f"{args.graph}: {outcome.size} nodes")
        if not outcome.completed:
            return EXIT_INCOMPLETE
        graph = outcome.graph
    for k in args.K:
        label = "inf" if k is None else str(k)
        try:
            if graph is None:
                vd = oracle_verify(system, secret, k, node_cap=args.node_cap)
            else:
                vd = verify(system, graph, secret, k, time_cap=args.time_cap)
        except VerificationTimeout:
            print(f"K={label}: timeout")
            continue
        if vd.opaque:
            print(f"K={label}: opaque")
        else:
            exposed = ", ".join(render_marking(system.net, m) for m in sorted(vd.exposed))
            print(f"K={label}: NOT opaque  u=[{' '.join(vd.u)}] v=[{' '.join(vd.v)}]  D={{{exposed}}}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return {"run": _cmd_run, "gen": _cmd_gen, "verify": _cmd_verify}[args.command](args)
    except (PetriNetError, BenchmarkError, SecretError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
