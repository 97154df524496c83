"""Benchmark runs: build RG, BRG and EBRG per case, verify, and write tables.

Everything written to the CSV/JSONL files except ``timings.csv`` is a pure
function of the configuration, so two runs with the same seed produce
byte-identical files.  Wall-clock numbers live in ``timings.csv`` and in the
Markdown report only.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import statistics
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .basis import BasisStepper, build_brg
from .benchgen import (
    TestCase,
    benchmark2_grid,
    gen_benchmark1_group,
    gen_benchmark2,
    load_benchmark2_topology,
)
from .ebrg import build_ebrg
from .graph import BuildOutcome
from .opacity import GraphView, VerificationTimeout, verify
from .reachability import DEFAULT_NODE_CAP, DEFAULT_TIME_CAP, ReachCache, build_rg

log = logging.getLogger(__name__)

ENV_THREADS = "OPACITY_LAB_THREADS"

DESK_ALPHA_DROP = 4
DESK_NODE_CAP = 200_000
DESK_TIME_CAP = 120.0
DESK_VERIFY_CAP = 10.0


def parse_k_list(text: str) -> tuple[int | None, ...]:
    """``"0,1,2,inf"`` -> ``(0, 1, 2, None)``."""
    out: list[int | None] = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok in ("inf", "infinite", "oo"):
            out.append(None)
            continue
        k = int(tok)
        if k < 0:
            raise ValueError("K values must be non-negative")
        out.append(k)
    if not out:
        raise ValueError("the K list is empty")
    return tuple(dict.fromkeys(out))


def k_label(k: int | None) -> str:
    return "inf" if k is None else str(k)


def _k_from_label(s: str) -> int | None:
    return None if s == "inf" else int(s)


@dataclass(frozen=True)
class RunConfig:
    benchmark: int = 1
    groups: tuple[int, ...] = (1, 2, 3)
    cases: tuple[TestCase, ...] | None = None
    node_cap: int = DEFAULT_NODE_CAP
    time_cap: float = DEFAULT_TIME_CAP
    seed: int = 42
    ks: tuple[int | None, ...] = (0, 1, 2, 3, None)
    out: Path | None = None
    repeats: int = 3
    verify_time_cap: float | None = 60.0
    workers: int = 1
    desk: bool = False

    def check(self) -> None:
        if self.benchmark not in (1, 2):
            raise ValueError("benchmark must be 1 or 2")
        if self.node_cap < 1 or self.time_cap <= 0 or self.repeats < 1 or self.workers < 1:
            raise ValueError("caps, repeats and workers must be positive")
        if not self.ks:
            raise ValueError("the K list is empty")
        if any(k is not None and k < 0 for k in self.ks):
            raise ValueError("K values must be non-negative")
        if self.verify_time_cap is not None and self.verify_time_cap <= 0:
            raise ValueError("verify_time_cap must be positive")

    @classmethod
    def desk_preset(cls, benchmark: int, **kw) -> RunConfig:
        """Lower alpha (Benchmark 2) and the caps so a full run fits a desk budget."""
        base = dict(benchmark=benchmark, desk=True, node_cap=DESK_NODE_CAP,
                    time_cap=DESK_TIME_CAP, verify_time_cap=DESK_VERIFY_CAP)
        base.update(kw)
        return cls(**base)

    def resolve_cases(self) -> list[TestCase]:
        if self.cases is not None:
            return list(self.cases)
        out: list[TestCase] = []
        if self.benchmark == 1:
            for g in self.groups:
                out += gen_benchmark1_group(g, seed=self.seed)
            return out
        net = load_benchmark2_topology()
        for g in self.groups:
            for p in benchmark2_grid(g):
                if self.desk:
                    p = replace(p, alpha=p.alpha - DESK_ALPHA_DROP)
                case = gen_benchmark2(p, net, strict=not self.desk)
                out.append(replace(case, group=f"G{g}"))
        return out


def worker_count(requested: int) -> int:
    """Requested workers, capped by ``OPACITY_LAB_THREADS`` when set."""
    env = os.environ.get(ENV_THREADS)
    n = requested
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", ENV_THREADS, env)
    return max(1, n)


@dataclass(frozen=True)
class VerdictRecord:
    graph: str
    k: int | None
    status: str  # opaque | not_opaque | timeout | skipped | error
    u: tuple[str, ...] = ()
    v: tuple[str, ...] = ()
    exposed: int = 0

    @property
    def opaque(self) -> bool | None:
        return {"opaque": True, "not_opaque": False}.get(self.status)


@dataclass
class CaseResult:
    case_id: str
    group: str
    params: dict
    secret_size: int
    rg_nodes: int | str = ""
    brg_nodes: int | str = ""
    ebrg_nodes: int | str = ""
    rg_time_ms: int | None = None
    brg_time_ms: int | None = None
    ebrg_time_ms: int | None = None
    s_tilde_b: int | None = None
    q_min: int | None = None
    a3_violators: int | None = None
    ebrg_edges: int | None = None
    brg_growth: float | None = None
    ebrg_growth: float | None = None
    verdicts: list[VerdictRecord] = field(default_factory=list)
    error: str = ""

    def verdict(self, graph: str, k: int | None) -> VerdictRecord | None:
        return next((r for r in self.verdicts if r.graph == graph and r.k == k), None)

    def sizes_ordered(self) -> bool | None:
        """``|BRG| <= |EBRG| <= |RG|`` over whatever completed; None if nothing to compare."""
        b, e, r = self.brg_nodes, self.ebrg_nodes, self.rg_nodes
        if not isinstance(b, int) or not isinstance(e, int):
            return None
        return b <= e and (not isinstance(r, int) or e <= r)


# ---------------------------------------------------------------------------
# running


def _timed(build, repeats: int) -> tuple[BuildOutcome, int]:
    """Run ``build`` up to ``repeats`` times; median wall time in ms.  Failed builds are not repeated."""
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = build()
        times.append(time.perf_counter() - t0)
        if not (out[0] if isinstance(out, tuple) else out).completed:
            break
    return out, round(statistics.median(times) * 1000)


def _verdicts(case: TestCase, graphs: dict[str, object], cfg: RunConfig) -> list[VerdictRecord]:
    sys = case.system
    reach = ReachCache(sys)
    stepper = BasisStepper(sys)
    out: list[VerdictRecord] = []
    for name in ("rg", "brg", "ebrg"):
        g = graphs.get(name)
        if g is None:
            out += [VerdictRecord(name, k, "skipped") for k in cfg.ks]
            continue
        view = GraphView(sys, g, stepper)
        for k in cfg.ks:
            try:
                v = verify(sys, g, case.secret, k, view=view, reach=reach, time_cap=cfg.verify_time_cap)
            except VerificationTimeout:
                out.append(VerdictRecord(name, k, "timeout"))
                continue
            if v.opaque:
                out.append(VerdictRecord(name, k, "opaque"))
            else:
                out.append(VerdictRecord(name, k, "not_opaque", v.u, v.v, len(v.exposed)))
    return out


def run_case(case: TestCase, cfg: RunConfig) -> CaseResult:
    res = CaseResult(case.id, case.group, dict(case.params), len(case.secret))
    sys = case.system
    try:
        rg, res.rg_time_ms = _timed(lambda: build_rg(sys, cfg.node_cap, cfg.time_cap), cfg.repeats)
        res.rg_nodes = rg.size
        brg, res.brg_time_ms = _timed(lambda: build_brg(sys, cfg.node_cap, cfg.time_cap), cfg.repeats)
        res.brg_nodes = brg.size
        (ebrg, stats), res.ebrg_time_ms = _timed(
            lambda: build_ebrg(sys, case.secret, cfg.node_cap, cfg.time_cap), cfg.repeats)
        res.ebrg_nodes = ebrg.size
        if stats is not None:
            res.s_tilde_b = len(stats.s_tilde_b)
            res.q_min = len(stats.q_min)
            res.a3_violators = len(stats.a3_violators)
            res.ebrg_edges = stats.edge_count
        graphs = {"rg": rg.graph, "brg": brg.graph, "ebrg": ebrg.graph}
        res.verdicts = _verdicts(case, graphs, cfg)
        if res.sizes_ordered() is False:
            raise AssertionError(f"size ordering violated: {res.brg_nodes}, {res.ebrg_nodes}, {res.rg_nodes}")
    except Exception as exc:  # recorded per case; the run goes on
        log.error("case %s failed: %s", case.id, exc)
        log.debug("%s", traceback.format_exc())
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def _series_key(r: CaseResult) -> tuple:
    rest = {k: v for k, v in r.params.items() if k not in ("alpha", "secret_set")}
    return (r.group, tuple(sorted(rest.items())))


def _fill_growth(results: list[CaseResult]) -> None:
    """Ratio to the previous case of the same series (same group, alpha varying)."""
    last: dict[tuple, CaseResult] = {}
    for r in results:
        key = _series_key(r)
        prev = last.get(key)
        if prev is not None and prev.params.get("alpha") != r.params.get("alpha"):
            if isinstance(prev.brg_nodes, int) and isinstance(r.brg_nodes, int) and prev.brg_nodes:
                r.brg_growth = round(r.brg_nodes / prev.brg_nodes, 3)
            if isinstance(prev.ebrg_nodes, int) and isinstance(r.ebrg_nodes, int) and prev.ebrg_nodes:
                r.ebrg_growth = round(r.ebrg_nodes / prev.ebrg_nodes, 3)
        last[key] = r


def run(cfg: RunConfig) -> list[CaseResult]:
    """Run every case of ``cfg``; results come back in case order whatever the worker count."""
    cfg.check()
    cases = cfg.resolve_cases()
    workers = worker_count(cfg.workers)
    if workers > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_case, cases, [cfg] * len(cases)))
    else:
        results = []
        for case in cases:
            log.info("running %s", case.id)
            results.append(run_case(case, cfg))
    _fill_growth(results)
    if cfg.out is not None:
        report(results, cfg.out, cfg)
    return results


# ---------------------------------------------------------------------------
# reporting


SIZE_COLUMNS = ["case_id", "group", "alpha", "beta_or_to", "lambda", "params", "secret_size",
                "rg_nodes", "brg_nodes", "ebrg_nodes", "brg_growth", "ebrg_growth", "error"]
STATS_COLUMNS = ["case_id", "secret_size", "s_tilde_b", "q_min", "a3_violators", "nodes", "edges"]
TIMING_COLUMNS = ["case_id", "rg_time_ms", "brg_time_ms", "ebrg_time_ms"]
VERDICT_COLUMNS = ["case_id", "graph", "K", "status", "opaque", "u", "v", "exposed"]


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.3f}"
    return str(x)


def _params_text(p: dict) -> str:
    return ";".join(f"{k}={p[k]}" for k in sorted(p))


def _parse_params(text: str) -> dict:
    out: dict = {}
    for item in filter(None, text.split(";")):
        k, _, v = item.partition("=")
        out[k] = int(v) if v.lstrip("-").isdigit() else v
    return out


def _csv_text(columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def size_rows(results: list[CaseResult]) -> list[list]:
    rows = []
    for r in results:
        p = r.params
        rows.append([r.case_id, r.group, p.get("alpha"), p.get("beta", p.get("to_set")), p.get("lambda"),
                     _params_text(p), r.secret_size, r.rg_nodes, r.brg_nodes, r.ebrg_nodes,
                     r.brg_growth, r.ebrg_growth, r.error])
    return rows


def stats_rows(results: list[CaseResult]) -> list[list]:
    return [[r.case_id, r.secret_size, r.s_tilde_b, r.q_min, r.a3_violators, r.ebrg_nodes, r.ebrg_edges]
            for r in results]


def timing_rows(results: list[CaseResult]) -> list[list]:
    return [[r.case_id, r.rg_time_ms, r.brg_time_ms, r.ebrg_time_ms] for r in results]


def verdict_rows(results: list[CaseResult]) -> list[list]:
    rows = []
    for r in results:
        for v in r.verdicts:
            op = "" if v.opaque is None else str(v.opaque).lower()
            rows.append([r.case_id, v.graph, k_label(v.k), v.status, op, " ".join(v.u), " ".join(v.v),
                         v.exposed if v.status == "not_opaque" else ""])
    return rows


def _md_table(columns: list[str], rows: list[list]) -> str:
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    lines += ["| " + " | ".join(_cell(x) for x in row) + " |" for row in rows]
    return "\n".join(lines)


def markdown_report(results: list[CaseResult]) -> str:
    sizes = [[r.case_id, r.params.get("alpha"), r.params.get("beta", r.params.get("to_set")),
              r.params.get("lambda"), r.secret_size, r.rg_nodes, r.brg_nodes, r.ebrg_nodes,
              r.brg_growth, r.ebrg_growth] for r in results]
    stats = [[r.case_id, r.s_tilde_b, r.q_min, r.a3_violators, r.rg_time_ms, r.brg_time_ms, r.ebrg_time_ms]
             for r in results]
    ks = list(dict.fromkeys(v.k for r in results for v in r.verdicts))
    verdicts = []
    for r in results:
        for g in ("rg", "brg", "ebrg"):
            row = [r.case_id, g]
            for k in ks:
                v = r.verdict(g, k)
                row.append("" if v is None else {"opaque": "yes", "not_opaque": "no"}.get(v.status, v.status))
            verdicts.append(row)
    errors = [f"- {r.case_id}: {r.error}" for r in results if r.error]
    parts = [
        "# Benchmark report",
        "",
        "## Graph sizes",
        "",
        _md_table(["case", "alpha", "beta/To", "lambda", "|S|", "|RG|", "|BRG|", "|EBRG|",
                   "BRG growth", "EBRG growth"], sizes),
        "",
        "## EBRG statistics and build times (ms, median)",
        "",
        "|Q_min| counts every EBRG node that is not a BRG node (construction-relative).",
        "",
        _md_table(["case", "|S~_b|", "|Q_min|", "A3 violators", "RG ms", "BRG ms", "EBRG ms"], stats),
        "",
        "## Opacity verdicts (yes = opaque)",
        "",
        _md_table(["case", "graph"] + [f"K={k_label(k)}" for k in ks], verdicts),
    ]
    if errors:
        parts += ["", "## Errors", "", *errors]
    return "\n".join(parts) + "\n"


def report(results: list[CaseResult], out: Path | str, cfg: RunConfig | None = None) -> dict[str, Path]:
    """Write the CSV, JSONL and Markdown outputs; returns the written paths by name."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "sizes.csv": _csv_text(SIZE_COLUMNS, size_rows(results)),
        "ebrg_stats.csv": _csv_text(STATS_COLUMNS, stats_rows(results)),
        "verdicts.csv": _csv_text(VERDICT_COLUMNS, verdict_rows(results)),
        "timings.csv": _csv_text(TIMING_COLUMNS, timing_rows(results)),
        "report.md": markdown_report(results),
    }
    jsonl = []
    for r in results:
        for v in r.verdicts:
            jsonl.append(json.dumps({"case_id": r.case_id, "graph_kind": v.graph, "K": k_label(v.k),
                                     "opaque": v.opaque, "status": v.status,
                                     "witness": None if v.status != "not_opaque" else {"u": list(v.u), "v": list(v.v)}},
                                    sort_keys=True))
    files["verdicts.jsonl"] = "".join(line + "\n" for line in jsonl)
    if cfg is not None:
        manifest = {"benchmark": cfg.benchmark, "groups": list(cfg.groups), "seed": cfg.seed,
                    "K": [k_label(k) for k in cfg.ks], "node_cap": cfg.node_cap, "time_cap": cfg.time_cap,
                    "repeats": cfg.repeats, "verify_time_cap": cfg.verify_time_cap, "desk": cfg.desk,
                    "cases": [r.case_id for r in results]}
        files["manifest.json"] = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    paths = {}
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8", newline="")
        paths[name] = path
    return paths


def _int_or_token(s: str) -> int | str:
    return int(s) if s.lstrip("-").isdigit() else s


def _opt_int(s: str) -> int | None:
    return int(s) if s else None


def _opt_float(s: str) -> float | None:
    return float(s) if s else None


def load_results(out: Path | str) -> list[CaseResult]:
    """Parse the CSVs written by ``report`` back into CaseResults."""
    out = Path(out)

    def rows(name):
        path = out / name
        if not path.exists():
            return []
        with path.open(encoding="utf-8", newline="") as fh:
            return list(csv.DictReader(fh))

    results: dict[str, CaseResult] = {}
    for row in rows("sizes.csv"):
        results[row["case_id"]] = CaseResult(
            case_id=row["case_id"], group=row["group"], params=_parse_params(row["params"]),
            secret_size=int(row["secret_size"]), rg_nodes=_int_or_token(row["rg_nodes"]),
            brg_nodes=_int_or_token(row["brg_nodes"]), ebrg_nodes=_int_or_token(row["ebrg_nodes"]),
            brg_growth=_opt_float(row["brg_growth"]), ebrg_growth=_opt_float(row["ebrg_growth"]),
            error=row["error"])
    for row in rows("ebrg_stats.csv"):
        r = results[row["case_id"]]
        r.s_tilde_b, r.q_min = _opt_int(row["s_tilde_b"]), _opt_int(row["q_min"])
        r.a3_violators, r.ebrg_edges = _opt_int(row["a3_violators"]), _opt_int(row["edges"])
    for row in rows("timings.csv"):
        r = results[row["case_id"]]
        r.rg_time_ms, r.brg_time_ms = _opt_int(row["rg_time_ms"]), _opt_int(row["brg_time_ms"])
        r.ebrg_time_ms = _opt_int(row["ebrg_time_ms"])
    for row in rows("verdicts.csv"):
        results[row["case_id"]].verdicts.append(VerdictRecord(
            graph=row["graph"], k=_k_from_label(row["K"]), status=row["status"],
            u=tuple(row["u"].split()), v=tuple(row["v"].split()),
            exposed=int(row["exposed"]) if row["exposed"] else 0))
    return list(results.values())


def deterministic_files(out: Path | str) -> dict[str, bytes]:
    """The outputs that must be byte-identical across runs with the same seed."""
    out = Path(out)
    names = ["sizes.csv", "ebrg_stats.csv", "verdicts.csv", "verdicts.jsonl"]
    return {n: (out / n).read_bytes() for n in names if (out / n).exists()}


def failed(results: list[CaseResult]) -> bool:
    """True iff some case hit an internal error (``o.s.`` is an outcome, not an error)."""
    return any(r.error for r in results)


__all__ = [
    "CaseResult", "RunConfig", "VerdictRecord", "deterministic_files", "failed", "load_results",
    "markdown_report", "parse_k_list", "report", "run", "run_case", "worker_count",
]
