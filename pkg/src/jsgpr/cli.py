"""``jsgpr`` command line.

Exit codes: 0 success, 1 rejected or infeasible, 2 usage or input error,
3 a solver limit stopped the run.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from .errors import JsgprError
from .experiments import (
    ExperimentConfig,
    default_workers,
    records_to_csv,
    records_to_jsonl,
    resolve_topology,
    run_experiment_a,
    run_experiment_b,
    sweep_dmax,
    write_manifest,
)
from .instance import SamplingParams, make_instance
from .metrics import metrics_report
from .milp import MilpOptions, solve_exact
from .model import build_jsgpr_f1, build_jsgpr_f2, build_jsgpr_lb
from .rounding import round_lp
from .topology import load_graphml, validate

EXIT_OK, EXIT_REJECTED, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3


def _float(text: str) -> float:
    if text.lower() in ("inf", "infinity", "none"):
        return math.inf
    return float(text)


def _topology_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fallback-capacity", type=float, default=None, metavar="MBPS", help="capacity for links without a usable bandwidth label")


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d-max", type=_float, default=10.0, metavar="MS", help="average delay bound in ms ('inf' drops the delay rows)")
    p.add_argument("--alpha", type=float, default=1.0, help="weight of the load term in the LB formulation")
    p.add_argument("--q-j", type=float, default=240.0, metavar="MBPS", help="gateway capacity")
    p.add_argument("--c-uv", type=float, default=1.0, help="unit bandwidth cost on every link")
    p.add_argument("--cost-range", type=float, nargs=2, default=(500.0, 1000.0), metavar=("LOW", "HIGH"))
    p.add_argument("--demands", type=_ids, default=None, metavar="IDS", help="comma-separated demand node ids (default: all)")
    p.add_argument("--candidates", type=_ids, default=None, metavar="IDS", help="comma-separated candidate node ids (default: all)")


def _ids(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--output", default=None, help="machine-readable output file ('-' for stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None, help="default: csv for a .csv output file, json otherwise")
    p.add_argument("--timing", action="store_true", help="include wall-clock times in machine output")


def _limit_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time-limit", type=float, default=600.0, metavar="S")
    p.add_argument("--node-limit", type=int, default=1_000_000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jsgpr", description="Satellite gateway placement and routing.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a topology and report findings")
    p.add_argument("topology")
    _topology_args(p)
    p.add_argument("-o", "--output", default=None)

    for name, help_text in (
        ("solve", "solve one instance (--method picks the solver)"),
        ("exact", "branch and bound to optimality"),
        ("round", "LP relaxation with rounding"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("topology")
        _topology_args(p)
        _instance_args(p)
        _output_args(p)
        _limit_args(p)
        p.add_argument("--formulation", choices=("F1", "F2", "LB"), default="F2")
        p.add_argument("--full", action="store_true", help="per-commodity model instead of the source-aggregated one")
        if name == "solve":
            p.add_argument("--method", choices=("exact", "round"), default="round")
        if name in ("solve", "exact"):
            p.add_argument("--cold", action="store_true", help="start branch and bound without a rounded incumbent")

    for name, help_text in (
        ("experiment-a", "exact vs. rounding across topologies and seeds"),
        ("experiment-b", "JSGPR vs. JSGPR-LB load profiles"),
        ("sweep-dmax", "total cost as the delay bound varies"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("topologies", nargs="+")
        _topology_args(p)
        p.add_argument("--seeds", type=int, nargs="+", default=None, help="explicit seed list")
        p.add_argument("--num-seeds", type=int, default=None, help="use seeds 0..N-1")
        default_d = ["2", "5", "10", "inf"] if name == "sweep-dmax" else ["10"]
        p.add_argument("--d-max", type=_float, nargs="+", default=[_float(v) for v in default_d], metavar="MS")
        p.add_argument("--alpha", type=float, default=1.0)
        p.add_argument("--methods", nargs="+", choices=("exact", "rounding"), default=None)
        p.add_argument("--exact-max-nodes", type=int, default=25, help="largest topology solved exactly")
        p.add_argument("--q-j", type=float, default=240.0)
        p.add_argument("--c-uv", type=float, default=1.0)
        p.add_argument("--cost-range", type=float, nargs=2, default=(500.0, 1000.0))
        p.add_argument("--workers", type=int, default=default_workers(), help="parallel jobs (default $JSGPR_WORKERS or 1)")
        _limit_args(p)
        _output_args(p)
    return parser


def _load(args):
    kwargs = {}
    if args.fallback_capacity is not None:
        kwargs["fallback_capacity_mbps"] = args.fallback_capacity
    return load_graphml(resolve_topology(args.topology), **kwargs)


def _emit(args, text: str) -> None:
    if args.output is None:
        return
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)


def _cmd_validate(args) -> int:
    topo = load_graphml(resolve_topology(args.topology), require_connected=False, **(
        {"fallback_capacity_mbps": args.fallback_capacity} if args.fallback_capacity is not None else {}))
    rep = validate(topo)
    print(f"{topo.name}: {len(topo.nodes)} nodes, {len(topo.links)} links")
    counts: dict[str, int] = {}
    for f in rep.findings:
        counts[f.kind] = counts.get(f.kind, 0) + 1
    for kind in sorted(counts):
        print(f"  {kind}: {counts[kind]}")
    if args.output:
        doc = {
            "name": topo.name,
            "nodes": len(topo.nodes),
            "links": len(topo.links),
            "connected": rep.connected,
            "findings": [{"kind": f.kind, "subject": list(f.subject), "detail": f.detail} for f in rep.findings],
        }
        _emit(args, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return EXIT_OK if rep.ok else EXIT_REJECTED


def _cmd_single(args, method: str) -> int:
    topo = _load(args)
    params = SamplingParams(seed=args.seed, cost_range=tuple(args.cost_range), q_j_default=args.q_j, c_uv_default=args.c_uv)
    inst = make_instance(topo, params, args.d_max, args.demands, args.candidates, alpha=args.alpha)
    if args.formulation == "F1":
        built = build_jsgpr_f1(inst, use_phi=True)
    elif args.formulation == "LB":
        built = build_jsgpr_lb(inst, args.alpha, compact=not args.full)
    else:
        built = build_jsgpr_f2(inst, compact=not args.full)
    t0 = time.perf_counter()
    extra: dict = {}
    if method == "round":
        res = round_lp(built)
        sol, status = res.solution, res.status
        extra["trace"] = res.trace.to_dict()
        if not args.timing:
            extra["trace"].pop("wall_time_s")
        code = EXIT_OK if res.accepted else EXIT_REJECTED
    else:
        start = None
        if not args.cold:
            # a rounded placement gives the search an incumbent from the first node
            warm = round_lp(built)
            start = warm.solution if warm.accepted else None
            extra["incumbent_from_rounding"] = start is not None
        res = solve_exact(built, MilpOptions(node_limit=args.node_limit, time_limit=args.time_limit), incumbent=start)
        sol = res.solution
        status = "Rejected" if res.status == "Infeasible" else res.status
        extra["bb_nodes"] = res.outcome.nodes
        extra["bound"] = res.outcome.bound
        code = {"Optimal": EXIT_OK, "Rejected": EXIT_REJECTED}.get(status, EXIT_LIMIT)
        if code == EXIT_LIMIT and res.outcome.x is not None:
            from dataclasses import replace

            sol = replace(sol, status="Accepted")
    wall = time.perf_counter() - t0

    print(f"{topo.name} seed={args.seed} d_max={args.d_max:g} ms formulation={args.formulation} method={method}")
    print(f"status: {status}")
    rep = None
    if sol.status == "Accepted":
        rep = metrics_report(sol, inst, wall if args.timing else math.nan)
        rep.status = status
        gws = sorted(sol.open_gateways, key=inst.candidate_set.index)
        print(f"total cost: {rep.total_cost:.6f} (deployment {rep.deployment_cost:.6f}, routing {rep.routing_cost:.6f} x phi {inst.phi:.6g})")
        print(f"gateways ({len(gws)}): {', '.join(gws)}")
        delays = list(rep.avg_delay_ms.values())
        print(f"mean delay: {sum(delays) / len(delays):.6f} ms, max delay: {max(delays):.6f} ms")
        print(f"max residual: {max(rep.residuals.values()):.3e}")
    if args.output:
        if args.format == "csv":
            if rep is None:
                text = "status\n" + status + "\n"
            else:
                text = rep.to_csv()
        else:
            doc = {"status": status, "topology": topo.name, "seed": args.seed, "method": method, "formulation": args.formulation,
                   "d_max": args.d_max if math.isfinite(args.d_max) else "inf", "solution": sol.to_dict(), **extra}
            if rep is not None:
                doc["metrics"] = rep.to_dict()
                if not args.timing:
                    doc["metrics"].pop("wall_time_s")
            if args.timing:
                doc["wall_time_s"] = wall
            text = json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n"
        _emit(args, text)
    return code


def _experiment_config(args, default_methods) -> ExperimentConfig:
    if args.seeds is not None:
        seeds = args.seeds
    elif args.num_seeds is not None:
        seeds = list(range(args.num_seeds))
    else:
        seeds = [0]
    return ExperimentConfig(
        topologies=args.topologies,
        seeds=seeds,
        d_max_values=args.d_max,
        alpha=args.alpha,
        methods=tuple(args.methods or default_methods),
        exact_time_limit=args.time_limit,
        exact_node_limit=args.node_limit,
        exact_max_nodes=args.exact_max_nodes,
        workers=args.workers,
        cost_range=tuple(args.cost_range),
        q_j=args.q_j,
        c_uv=args.c_uv,
        capacity_fallback_mbps=args.fallback_capacity,
    )


def _cmd_experiment(args, kind: str) -> int:
    runner = {"experiment-a": run_experiment_a, "experiment-b": run_experiment_b, "sweep-dmax": sweep_dmax}[kind]
    cfg = _experiment_config(args, ("exact", "rounding"))
    records = runner(cfg)
    by_status: dict[str, int] = {}
    for r in records:
        by_status[f"{r.method}/{r.formulation}/{r.status}"] = by_status.get(f"{r.method}/{r.formulation}/{r.status}", 0) + 1
    print(f"{kind}: {len(records)} records")
    for k in sorted(by_status):
        print(f"  {k}: {by_status[k]}")
    gaps = [r.gap for r in records if r.gap is not None]
    if gaps:
        print(f"  rounding gap: min {min(gaps):.4f}, max {max(gaps):.4f}")
    ratios = [r.cost_ratio for r in records if r.cost_ratio is not None and r.formulation == "LB"]
    if ratios:
        print(f"  LB cost ratio: min {min(ratios):.4f}, max {max(ratios):.4f}")
    if kind == "sweep-dmax":
        mono = sorted({(r.topology, r.seed, r.method, r.monotone) for r in records})
        bad = [m for m in mono if m[3] is False]
        print(f"  monotone series: {len(mono) - len(bad)}/{len(mono)}")
    if args.output:
        if args.format == "csv":
            _emit(args, records_to_csv(records, include_timing=args.timing))
        else:
            _emit(args, records_to_jsonl(records, include_timing=args.timing))
        if args.output != "-":
            write_manifest(cfg, kind, records, str(args.output) + ".manifest.json")
    limited = any(r.status in ("TimeLimit", "NodeLimit") for r in records)
    return EXIT_LIMIT if limited else EXIT_OK


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "output", None) is not None and getattr(args, "format", "") is None:
        args.format = "csv" if str(args.output).lower().endswith(".csv") else "json"
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command in ("solve", "exact", "round"):
            method = args.method if args.command == "solve" else args.command
            return _cmd_single(args, method)
        return _cmd_experiment(args, args.command)
    except (FileNotFoundError, JsgprError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:  # pragma: no cover
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
