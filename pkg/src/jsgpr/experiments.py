"""Experiment harness: exact vs. rounding, delay-bound sweeps, load balancing.

A batch is split into independent jobs, one per (topology, seed). Jobs may
run in a process pool; their records are merged and sorted by
``(topology, seed, d_max, method, formulation)`` so the output does not
depend on the worker count or completion order.

Every record comes from a solution that has been re-verified with
:func:`jsgpr.metrics.check_feasibility`, and the verdict is stored next to
it (``feasible``, ``max_residual``).

Wall-clock columns are the one non-deterministic part of a record. They are
kept in the JSON-lines stream but left out of the CSV unless
``include_timing=True``, so two runs of the same configuration write
byte-identical CSV files. (A run that stops on a *time* limit is inherently
machine-dependent; node limits are not.)
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

from .instance import ProblemInstance, SamplingParams, make_instance
from .metrics import Solution, avg_delay, check_feasibility, deployment_cost, gateway_loads, routing_cost, total_cost
from .milp import MilpOptions, solve_exact
from .model import build_jsgpr_f2, build_jsgpr_lb
from .rounding import round_lp
from .topology import Topology, bundled_topologies, load_graphml

ZOO_DIR_ENV = "JSGPR_ZOO_DIR"
WORKERS_ENV = "JSGPR_WORKERS"
METHODS = ("exact", "rounding")


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def resolve_topology(ref: str | Path) -> Path:
    """Map a bundled name (case-insensitive) or a file path to a GraphML path.

    When ``$JSGPR_ZOO_DIR`` holds a file of the same name, it takes
    precedence over the bundled copy.
    """
    p = Path(ref)
    if p.suffix.lower() == ".graphml" and p.exists():
        return p
    bundled = {k.lower(): v for k, v in bundled_topologies().items()}
    key = str(ref).lower().replace("-", "").replace("_", "").replace(" ", "")
    if key in bundled:
        zoo = os.environ.get(ZOO_DIR_ENV)
        if zoo:
            for cand in Path(zoo).glob("*.graphml"):
                if cand.stem.lower().replace("-", "").replace("_", "") == key:
                    return cand
        return bundled[key]
    if p.exists():
        return p
    raise FileNotFoundError(f"no topology {ref!r} (not a file, not bundled)")


@dataclass
class ExperimentConfig:
    topologies: list[str] = field(default_factory=lambda: ["Sinet"])
    seeds: list[int] = field(default_factory=lambda: [0])
    d_max_values: list[float] = field(default_factory=lambda: [10.0])
    alpha: float = 1.0
    methods: tuple[str, ...] = METHODS
    exact_time_limit: float = 600.0
    exact_node_limit: int = 1_000_000
    # exact runs only on topologies with at most this many nodes
    exact_max_nodes: int = 25
    compact: bool = True
    workers: int = 1
    cost_range: tuple[float, float] = (500.0, 1000.0)
    q_j: float = 240.0
    c_uv: float = 1.0
    capacity_fallback_mbps: float | None = None

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if any(not d > 0 for d in self.d_max_values):
            raise ValueError("d_max values must be positive")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        self.topologies = [str(t) for t in self.topologies]
        self.seeds = [int(s) for s in self.seeds]
        self.d_max_values = [float(d) for d in self.d_max_values]
        self.methods = tuple(self.methods)
        self.cost_range = tuple(self.cost_range)

    def sampling(self, seed: int) -> SamplingParams:
        return SamplingParams(seed=seed, cost_range=self.cost_range, q_j_default=self.q_j, c_uv_default=self.c_uv)

    def milp_options(self) -> MilpOptions:
        return MilpOptions(node_limit=self.exact_node_limit, time_limit=self.exact_time_limit)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["d_max_values"] = [v if math.isfinite(v) else "inf" for v in self.d_max_values]
        return d


TIMING_COLUMNS = ("wall_time_s",)


@dataclass
class RunRecord:
    experiment: str
    topology: str
    nodes: int
    links: int
    seed: int
    method: str
    formulation: str
    d_max: float
    alpha: float | None
    status: str
    total_cost: float | None = None
    deployment_cost: float | None = None
    routing_cost: float | None = None
    objective: float | None = None
    lp_relaxation: float | None = None
    exact_cost: float | None = None
    normalized_cost: float | None = None
    gap: float | None = None
    cost_ratio: float | None = None
    gateways: int | None = None
    max_load: float | None = None
    mean_load: float | None = None
    min_load: float | None = None
    load_spread: float | None = None
    mean_delay: float | None = None
    max_delay: float | None = None
    max_residual: float | None = None
    feasible: bool | None = None
    bb_nodes: int | None = None
    rounding_iterations: int | None = None
    monotone: bool | None = None
    wall_time_s: float | None = None

    @property
    def accepted(self) -> bool:
        return self.status in ("Accepted", "Optimal")

    def sort_key(self):
        d = self.d_max if math.isfinite(self.d_max) else math.inf
        return (self.topology, self.seed, d, self.method, self.formulation)

    def to_dict(self) -> dict:
        d = asdict(self)
        if not math.isfinite(self.d_max):
            d["d_max"] = "inf"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        d = dict(d)
        d["d_max"] = float(d["d_max"])
        return cls(**d)


CSV_COLUMNS = tuple(f.name for f in fields(RunRecord))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return repr(round(v, 9))
    return str(v)


def records_to_csv(records: Sequence[RunRecord], *, include_timing: bool = False) -> str:
    cols = [c for c in CSV_COLUMNS if include_timing or c not in TIMING_COLUMNS]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        d = asdict(r)
        w.writerow([_fmt(d[c]) for c in cols])
    return buf.getvalue()


def write_csv(records: Sequence[RunRecord], path: str | Path, *, include_timing: bool = False) -> None:
    Path(path).write_text(records_to_csv(records, include_timing=include_timing))


def records_to_jsonl(records: Sequence[RunRecord], *, include_timing: bool = True) -> str:
    lines = []
    for r in records:
        d = r.to_dict()
        if not include_timing:
            for c in TIMING_COLUMNS:
                d.pop(c)
        lines.append(json.dumps(d, sort_keys=True) + "\n")
    return "".join(lines)


def write_jsonl(records: Sequence[RunRecord], path: str | Path, *, include_timing: bool = True) -> None:
    Path(path).write_text(records_to_jsonl(records, include_timing=include_timing))


def read_jsonl(path: str | Path) -> list[RunRecord]:
    # records written without timing come back with wall_time_s = None
    return [RunRecord.from_dict(json.loads(line)) for line in Path(path).read_text().splitlines() if line.strip()]


def manifest(cfg: ExperimentConfig, experiment: str, records: Sequence[RunRecord]) -> dict:
    from . import __version__

    return {
        "experiment": experiment,
        "package_version": __version__,
        "config": cfg.to_dict(),
        "topology_files": {t: str(resolve_topology(t)) for t in cfg.topologies},
        "runs": [{"topology": r.topology, "seed": r.seed, "method": r.method, "formulation": r.formulation, "d_max": _fmt(r.d_max), "status": r.status} for r in records],
        "record_count": len(records),
    }


def write_manifest(cfg: ExperimentConfig, experiment: str, records: Sequence[RunRecord], path: str | Path) -> None:
    Path(path).write_text(json.dumps(manifest(cfg, experiment, records), indent=1, sort_keys=True) + "\n")


# --- single runs -----------------------------------------------------------


def _load(ref: str, cfg: ExperimentConfig) -> Topology:
    kwargs = {}
    if cfg.capacity_fallback_mbps is not None:
        kwargs["fallback_capacity_mbps"] = cfg.capacity_fallback_mbps
    return load_graphml(resolve_topology(ref), **kwargs)


def _base(experiment, topo: Topology, name, seed, method, formulation, d_max, alpha) -> dict:
    return dict(
        experiment=experiment,
        topology=name,
        nodes=len(topo.nodes),
        links=len(topo.links),
        seed=seed,
        method=method,
        formulation=formulation,
        d_max=d_max,
        alpha=alpha,
    )


def _fill(rec: RunRecord, sol: Solution, inst: ProblemInstance) -> RunRecord:
    """Attach verified metrics of an accepted solution."""
    if sol.status != "Accepted":
        return rec
    res = check_feasibility(sol, inst, 1e-6, delay_tol=1e-9)
    loads = gateway_loads(sol, inst)
    open_loads = [loads[j] for j in sol.open_gateways]
    delays = list(avg_delay(sol, inst).values())
    rec.total_cost = total_cost(sol, inst)
    rec.deployment_cost = deployment_cost(sol, inst)
    rec.routing_cost = routing_cost(sol, inst)
    rec.objective = sol.objective
    rec.gateways = len(open_loads)
    rec.max_load = max(open_loads, default=0.0)
    rec.min_load = min(open_loads, default=0.0)
    rec.mean_load = sum(open_loads) / len(open_loads) if open_loads else 0.0
    rec.load_spread = rec.max_load - rec.min_load
    rec.mean_delay = sum(delays) / len(delays)
    rec.max_delay = max(delays)
    rec.max_residual = res.worst
    rec.feasible = res.passed
    return rec


def _exact_allowed(cfg: ExperimentConfig, topo: Topology) -> bool:
    return "exact" in cfg.methods and len(topo.nodes) <= cfg.exact_max_nodes


def run_rounding(built, base: dict, inst) -> tuple[RunRecord, Solution, float | None]:
    t0 = time.perf_counter()
    r = round_lp(built)
    rec = RunRecord(**base, status=r.status)
    rec.rounding_iterations = r.trace.iterations
    rec.lp_relaxation = r.trace.relaxation_objective
    _fill(rec, r.solution, inst)
    rec.wall_time_s = time.perf_counter() - t0
    return rec, r.solution, r.trace.relaxation_objective


def run_exact(built, base: dict, inst, opts: MilpOptions, incumbent: Solution | None = None) -> tuple[RunRecord, Solution]:
    t0 = time.perf_counter()
    ex = solve_exact(built, opts, incumbent=incumbent)
    # Optimal, Rejected (proven infeasible) or the limit that stopped the search
    status = "Rejected" if ex.status == "Infeasible" else ex.status
    rec = RunRecord(**base, status=status)
    rec.bb_nodes = ex.outcome.nodes
    rec.lp_relaxation = ex.outcome.root_objective if math.isfinite(ex.outcome.root_objective) else None
    if ex.outcome.x is not None:
        sol = replace(ex.solution, status="Accepted")
        _fill(rec, sol, inst)
    rec.wall_time_s = time.perf_counter() - t0
    return rec, ex.solution


# --- jobs ------------------------------------------------------------------


@dataclass(frozen=True)
class _Job:
    kind: str
    topology: str
    seed: int
    cfg: ExperimentConfig


def _job_a(job: _Job) -> list[RunRecord]:
    cfg = job.cfg
    topo = _load(job.topology, cfg)
    out = []
    for d_max in cfg.d_max_values:
        inst = make_instance(topo, cfg.sampling(job.seed), d_max)
        built = build_jsgpr_f2(inst, compact=cfg.compact)
        mk = lambda m: _base("A", topo, job.topology, job.seed, m, "F2", d_max, None)  # noqa: E731
        rounded = None
        if "rounding" in cfg.methods:
            rec_r, rounded, _ = run_rounding(built, mk("rounding"), inst)
            out.append(rec_r)
        if _exact_allowed(cfg, topo):
            rec_e, _ = run_exact(built, mk("exact"), inst, cfg.milp_options(), rounded)
            out.append(rec_e)
            if rec_e.status == "Optimal":
                exact = rec_e.total_cost
                rec_e.exact_cost = exact
                rec_e.normalized_cost = 1.0
                if "rounding" in cfg.methods and rec_r.total_cost is not None:
                    rec_r.exact_cost = exact
                    rec_r.normalized_cost = rec_r.total_cost / exact
                    rec_r.gap = rec_r.normalized_cost - 1.0
    return out


def _job_sweep(job: _Job) -> list[RunRecord]:
    cfg = job.cfg
    topo = _load(job.topology, cfg)
    out = []
    previous: dict[str, Solution | None] = {"exact": None}
    # ascending d_max, so each exact run can start from the tighter run's placement
    for d_max in sorted(cfg.d_max_values):
        inst = make_instance(topo, cfg.sampling(job.seed), d_max)
        built = build_jsgpr_f2(inst, compact=cfg.compact)
        mk = lambda m: _base("sweep", topo, job.topology, job.seed, m, "F2", d_max, None)  # noqa: E731
        rounded = None
        if "rounding" in cfg.methods:
            rec_r, rounded, _ = run_rounding(built, mk("rounding"), inst)
            out.append(rec_r)
        if _exact_allowed(cfg, topo):
            start = rounded if rounded is not None and rounded.status == "Accepted" else None
            prev = previous["exact"]
            if prev is not None and prev.status == "Accepted":
                if start is None or prev.objective <= start.objective:
                    start = prev
            rec_e, sol = run_exact(built, mk("exact"), inst, cfg.milp_options(), start)
            if rec_e.total_cost is not None:
                previous["exact"] = replace(sol, status="Accepted", objective=rec_e.total_cost)
            out.append(rec_e)
    return out


def _job_b(job: _Job) -> list[RunRecord]:
    cfg = job.cfg
    topo = _load(job.topology, cfg)
    out = []
    for d_max in cfg.d_max_values:
        inst = make_instance(topo, cfg.sampling(job.seed), d_max, alpha=cfg.alpha)
        f2 = build_jsgpr_f2(inst, compact=cfg.compact)
        lb = build_jsgpr_lb(inst, cfg.alpha, compact=cfg.compact)
        mk = lambda m, f: _base("B", topo, job.topology, job.seed, m, f, d_max, cfg.alpha if f == "LB" else None)  # noqa: E731
        pairs = []
        if "rounding" in cfg.methods:
            r2, s2, _ = run_rounding(f2, mk("rounding", "F2"), inst)
            rl, sl, _ = run_rounding(lb, mk("rounding", "LB"), inst)
            pairs.append((r2, rl))
        if _exact_allowed(cfg, topo):
            r0 = round_lp(f2).solution if "rounding" not in cfg.methods else s2
            e2, t2 = run_exact(f2, mk("exact", "F2"), inst, cfg.milp_options(), r0 if r0.status == "Accepted" else None)
            seed_lb = None
            if e2.total_cost is not None:
                # the JSGPR optimum is feasible for LB once l_max covers its largest load
                seed_lb = replace(t2, status="Accepted", l_max=e2.max_load)
            el, _ = run_exact(lb, mk("exact", "LB"), inst, cfg.milp_options(), seed_lb)
            pairs.append((e2, el))
        for a, b in pairs:
            if a.total_cost is not None and b.total_cost is not None and a.total_cost > 0:
                b.cost_ratio = b.total_cost / a.total_cost
            out.extend([a, b])
    return out


_KINDS = {"A": _job_a, "sweep": _job_sweep, "B": _job_b}


def _run_job(job: _Job) -> list[RunRecord]:
    return _KINDS[job.kind](job)


def _run_batch(kind: str, cfg: ExperimentConfig, workers: int | None = None) -> list[RunRecord]:
    jobs = [_Job(kind, t, s, cfg) for t in cfg.topologies for s in cfg.seeds]
    workers = cfg.workers if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        results = [_run_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs))
    records = [r for batch in results for r in batch]
    records.sort(key=RunRecord.sort_key)
    return records


def run_experiment_a(cfg: ExperimentConfig, *, workers: int | None = None) -> list[RunRecord]:
    """Exact and rounding runs per (topology, seed, d_max), with normalized cost and gap."""
    return _run_batch("A", cfg, workers)


def monotonicity(records: Iterable[RunRecord], tol: float = 1e-6) -> dict[tuple, bool]:
    """Per (topology, seed, method): is cost non-increasing as d_max grows?

    Rejected runs count as infinitely expensive, so a Rejected run after an
    accepted one at a tighter bound breaks monotonicity.
    """
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.topology, r.seed, r.method), []).append(r)
    verdict = {}
    for key, rs in groups.items():
        rs = sorted(rs, key=lambda r: r.d_max)
        # runs stopped by a limit prove nothing either way and are skipped
        rs = [r for r in rs if r.status in ("Accepted", "Optimal", "Rejected")]
        costs = [r.total_cost if r.status != "Rejected" and r.total_cost is not None else math.inf for r in rs]
        verdict[key] = all(b <= a + tol or (math.isinf(a) and math.isinf(b)) for a, b in zip(costs, costs[1:]))
    return verdict


def sweep_dmax(cfg: ExperimentConfig, *, workers: int | None = None) -> list[RunRecord]:
    """Cost as a function of d_max; each record carries its series' monotonicity verdict."""
    if len(cfg.d_max_values) < 2:
        raise ValueError("a sweep needs at least two d_max values")
    records = _run_batch("sweep", cfg, workers)
    verdict = monotonicity(records)
    for r in records:
        r.monotone = verdict[(r.topology, r.seed, r.method)]
    return records


def run_experiment_b(cfg: ExperimentConfig, *, workers: int | None = None) -> list[RunRecord]:
    """Paired JSGPR / JSGPR-LB runs; LB records carry the cost ratio."""
    return _run_batch("B", cfg, workers)
