"""LinearModel builders for the placement-and-routing formulations.

Three formulations are offered:

``F2``
    Per-commodity flows ``f[i, j, arc]`` on both directions of every link,
    one zero-cost, zero-delay *sink arc* ``j -> SAT`` per commodity that
    carries what gateway ``j`` hands to the satellite, binary ``y[j]``, and
    one average-delay row per demand node.
``F1``
    Same flows on terrestrial arcs but no sink arcs; delivery is expressed by
    explicit assignment fractions ``x[i, j]`` in ``[0, 1]``.
``LB``
    ``F2`` plus a common load ceiling ``l_max`` weighted by ``alpha * phi``.

The F2 and LB builders can also emit a *compact* variant (``compact=True``)
in which flows are aggregated per demand source, ``g[i, arc]``, and delivery
is a sink ``s[i, j]``. Any per-commodity solution aggregates to a compact
one with the same cost, delay and capacity usage, and any compact solution
splits back into per-commodity flows by path decomposition, so both variants
have the same optimum. The compact one is |J| times smaller and is what the
solvers use on real topologies.

Column layout is closed-form: ``y`` first (one per candidate, in candidate
order), then one block per commodity ``(i, j)`` in row-major order
(``2|E|`` arc columns in ``Topology.arcs`` order, then the sink), then
``l_max`` when present. The compact layout has one block per source with
``2|E|`` arc columns followed by ``|J|`` sinks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import EmptyCandidateSet, EmptyDemandSet, ZeroDemand
from .instance import ProblemInstance
from .lp.model import INF, LinearModel
from .metrics import Solution

Arc = tuple[str, str]
FORMULATIONS = ("F1", "F2", "LB")


@dataclass(frozen=True)
class VarMap:
    """Column indices of every decision variable.

    ``y``, ``sink_f``, ``x`` and ``f`` are exposed as dictionaries built on
    first access; the ``*_col`` methods compute the same indices without
    materialising them.
    """

    demand_set: tuple[str, ...]
    candidate_set: tuple[str, ...]
    arcs: tuple[tuple[str, str, int], ...]
    formulation: str
    compact: bool = False
    l_max: int | None = None

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    @cached_property
    def _i(self) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.demand_set)}

    @cached_property
    def _j(self) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.candidate_set)}

    @cached_property
    def _a(self) -> dict[Arc, int]:
        return {(u, v): k for k, (u, v, _) in enumerate(self.arcs)}

    @property
    def block(self) -> int:
        """Columns per block (commodity, or source when compact)."""
        if self.compact:
            return self.n_arcs + len(self.candidate_set)
        return self.n_arcs + (0 if self.formulation == "F1" else 1)

    def _commodity_base(self, i: str, j: str) -> int:
        nJ = len(self.candidate_set)
        return nJ + (self._i[i] * nJ + self._j[j]) * self.block

    def _source_base(self, i: str) -> int:
        return len(self.candidate_set) + self._i[i] * self.block

    # per-variable index functions
    def y_col(self, j: str) -> int:
        return self._j[j]

    def f_col(self, i: str, j: str, arc: Arc) -> int:
        if self.compact:
            raise KeyError("compact models carry no per-commodity flow columns")
        return self._commodity_base(i, j) + self._a[arc]

    def g_col(self, i: str, arc: Arc) -> int:
        if not self.compact:
            raise KeyError("per-source flow columns exist only in compact models")
        return self._source_base(i) + self._a[arc]

    def sink_col(self, i: str, j: str) -> int:
        if self.compact:
            return self._source_base(i) + self.n_arcs + self._j[j]
        if self.formulation == "F1":
            raise KeyError("Formulation I has no sink arcs")
        return self._commodity_base(i, j) + self.n_arcs

    def x_col(self, i: str, j: str) -> int:
        if self.formulation != "F1":
            raise KeyError("x is a derived quantity outside Formulation I")
        nI, nJ = len(self.demand_set), len(self.candidate_set)
        return nJ + nI * nJ * self.block + self._i[i] * nJ + self._j[j]

    # dictionary views
    @cached_property
    def y(self) -> dict[str, int]:
        return {j: k for k, j in enumerate(self.candidate_set)}

    @cached_property
    def f(self) -> dict[tuple[str, str, Arc], int]:
        if self.compact:
            return {}
        return {(i, j, (u, v)): self.f_col(i, j, (u, v)) for i in self.demand_set for j in self.candidate_set for u, v, _ in self.arcs}

    @cached_property
    def g(self) -> dict[tuple[str, Arc], int]:
        if not self.compact:
            return {}
        return {(i, (u, v)): self.g_col(i, (u, v)) for i in self.demand_set for u, v, _ in self.arcs}

    @cached_property
    def sink_f(self) -> dict[tuple[str, str], int]:
        if self.formulation == "F1" and not self.compact:
            return {}
        return {(i, j): self.sink_col(i, j) for i in self.demand_set for j in self.candidate_set}

    @cached_property
    def x(self) -> dict[tuple[str, str], int]:
        if self.formulation != "F1":
            return {}
        return {(i, j): self.x_col(i, j) for i in self.demand_set for j in self.candidate_set}

    @property
    def binaries(self) -> list[int]:
        return list(range(len(self.candidate_set)))


@dataclass(frozen=True)
class BuiltModel:
    model: LinearModel
    varmap: VarMap
    formulation: str
    instance: ProblemInstance
    row_families: dict[str, tuple[int, int]] = field(default_factory=dict)

    @property
    def binaries(self) -> list[int]:
        return self.varmap.binaries

    def family_count(self, name: str) -> int:
        lo, hi = self.row_families.get(name, (0, 0))
        return hi - lo


def census(inst: ProblemInstance, formulation: str = "F2", *, compact: bool = False, delay: bool = True) -> dict:
    """Closed-form column and row counts per family."""
    nI, nJ = len(inst.demand_set), len(inst.candidate_set)
    nE, nV = len(inst.topology.links), len(inst.topology.nodes)
    delay_rows = nI if delay and math.isfinite(inst.d_max) else 0
    if compact:
        cols = {"y": nJ, "flow": nI * 2 * nE, "sink": nI * nJ}
        rows = {
            "demand": nI,
            "feasibility": nI * nJ,
            "gateway_capacity": nJ,
            "link_capacity": nE,
            "conservation": nI * (nV - 1),
            "delay": delay_rows,
        }
    elif formulation == "F1":
        cols = {"y": nJ, "flow": nI * nJ * 2 * nE, "x": nI * nJ}
        rows = {
            "demand": nI,
            "feasibility": nI * nJ,
            "gateway_capacity": nJ,
            "link_capacity": nE,
            "source": nI * nJ,
            "conservation": nI * nJ * (nV - 1),
            "delay": delay_rows,
        }
    else:
        cols = {"y": nJ, "flow": nI * nJ * 2 * nE, "sink": nI * nJ}
        rows = {
            "demand": nI,
            "feasibility": nI * nJ,
            "gateway_capacity": nJ,
            "link_capacity": nE,
            "source": nI * nJ,
            "conservation": nI * nJ * (nV - 1),
            "delay": delay_rows,
        }
    if formulation == "LB":
        cols["l_max"] = 1
        rows["load"] = nJ
    return {"columns": cols, "rows": rows, "num_cols": sum(cols.values()), "num_rows": sum(rows.values())}


def _check(inst: ProblemInstance) -> None:
    if not inst.demand_set:
        raise EmptyDemandSet("demand set is empty")
    if not inst.candidate_set:
        raise EmptyCandidateSet("candidate set is empty")


class _Rows:
    """Accumulates rows and remembers which family each range belongs to."""

    def __init__(self, model: LinearModel):
        self.model = model
        self.families: dict[str, tuple[int, int]] = {}
        self._open: str | None = None

    def begin(self, name: str) -> None:
        self._open = name
        self.families[name] = (self.model.num_rows, self.model.num_rows)

    def add(self, cols, vals, rel, rhs, name) -> None:
        self.model.add_row_arrays(np.asarray(cols), np.asarray(vals, dtype=float), rel, rhs, name)
        lo, _ = self.families[self._open]
        self.families[self._open] = (lo, self.model.num_rows)


def _node_arcs(inst: ProblemInstance):
    """Per node: arc positions entering and leaving it."""
    ins: dict[str, list[int]] = {v: [] for v in inst.topology.node_ids}
    outs: dict[str, list[int]] = {v: [] for v in inst.topology.node_ids}
    for a, (u, v, _) in enumerate(inst.topology.arcs):
        outs[u].append(a)
        ins[v].append(a)
    return {v: np.array(ins[v], dtype=np.int64) for v in ins}, {v: np.array(outs[v], dtype=np.int64) for v in outs}


def _arc_vectors(inst: ProblemInstance, weight: float):
    topo = inst.topology
    link_of = np.array([k for _, _, k in topo.arcs], dtype=np.int64)
    cost = np.asarray(inst.unit_bw_cost, dtype=float)[link_of] * weight
    delay = np.array([topo.links[k].delay_ms for k in link_of.tolist()], dtype=float)
    return link_of, cost, delay


def _build_full(inst: ProblemInstance, formulation: str, *, weight: float, delay: bool) -> BuiltModel:
    _check(inst)
    topo = inst.topology
    I, J = inst.demand_set, inst.candidate_set
    nI, nJ = len(I), len(J)
    arcs = topo.arcs
    nA = len(arcs)
    f1 = formulation == "F1"
    vm = VarMap(I, J, arcs, formulation, compact=False)
    B = vm.block
    m = LinearModel(f"jsgpr-{formulation.lower()}")
    link_of, arc_cost, arc_delay = _arc_vectors(inst, weight)
    ins, outs = _node_arcs(inst)
    a = np.asarray(inst.demand, dtype=float)
    q = np.asarray(inst.gw_capacity, dtype=float)

    m.add_variables([f"y[{j}]" for j in J], 0.0, 1.0, inst.deploy_cost)
    arc_names = [f"{u}>{v}" for u, v, _ in arcs]
    block_obj = np.concatenate([arc_cost, [] if f1 else [0.0]])
    for i in I:
        for j in J:
            names = [f"f[{i},{j},{s}]" for s in arc_names]
            if not f1:
                names.append(f"f[{i},{j},{j}>SAT]")
            m.add_variables(names, 0.0, INF, block_obj)
    if f1:
        m.add_variables([f"x[{i},{j}]" for i in I for j in J], 0.0, 1.0, 0.0)

    def base(ii: int, jj: int) -> int:
        return nJ + (ii * nJ + jj) * B

    def delivery(ii: int, jj: int):
        """(column, coefficient) expressing the amount of (i, j) handed to the satellite."""
        if f1:
            return nJ + nI * nJ * B + ii * nJ + jj, a[ii]
        return base(ii, jj) + nA, 1.0

    rows = _Rows(m)
    rows.begin("demand")
    for ii, i in enumerate(I):
        cols, vals = zip(*(delivery(ii, jj) for jj in range(nJ)))
        if f1:
            rows.add(cols, np.ones(nJ), "=", 1.0, f"demand[{i}]")
        else:
            rows.add(cols, vals, "=", a[ii], f"demand[{i}]")

    rows.begin("feasibility")
    for ii, i in enumerate(I):
        for jj, j in enumerate(J):
            col, coef = delivery(ii, jj)
            # F2: delivered <= a_i y_j ; F1: x_ij <= y_j
            rhs_coef = 1.0 if f1 else a[ii]
            rows.add([col, jj], [1.0, -rhs_coef], "<=", 0.0, f"feas[{i},{j}]")

    rows.begin("gateway_capacity")
    for jj, j in enumerate(J):
        cols = [delivery(ii, jj)[0] for ii in range(nI)]
        vals = [delivery(ii, jj)[1] for ii in range(nI)]
        rows.add(cols + [jj], vals + [-q[jj]], "<=", 0.0, f"gwcap[{j}]")

    rows.begin("link_capacity")
    commodity_bases = nJ + np.arange(nI * nJ, dtype=np.int64) * B
    for k, link in enumerate(topo.links):
        pos = np.flatnonzero(link_of == k)
        cols = (commodity_bases[:, None] + pos[None, :]).ravel()
        rows.add(cols, np.ones(len(cols)), "<=", link.capacity_mbps, f"linkcap[{link.u}-{link.v}]")

    # source rows: out - in = delivered amount leaving i for remote gateways
    rows.begin("source")
    for ii, i in enumerate(I):
        for jj, j in enumerate(J):
            b0 = base(ii, jj)
            cols = [b0 + outs[i], b0 + ins[i]]
            vals = [np.ones(len(outs[i])), -np.ones(len(ins[i]))]
            if j != i:
                col, coef = delivery(ii, jj)
                cols.append(np.array([col]))
                vals.append(np.array([-coef]))
            rows.add(np.concatenate(cols), np.concatenate(vals), "=", 0.0, f"src[{i},{j}]")

    rows.begin("conservation")
    for ii, i in enumerate(I):
        for jj, j in enumerate(J):
            b0 = base(ii, jj)
            for u in topo.node_ids:
                if u == i:
                    continue
                cols = [b0 + ins[u], b0 + outs[u]]
                vals = [np.ones(len(ins[u])), -np.ones(len(outs[u]))]
                if u == j:
                    col, coef = delivery(ii, jj)
                    cols.append(np.array([col]))
                    vals.append(np.array([-coef]))
                rows.add(np.concatenate(cols), np.concatenate(vals), "=", 0.0, f"flow[{i},{j},{u}]")

    if delay and math.isfinite(inst.d_max):
        rows.begin("delay")
        for ii, i in enumerate(I):
            cols = (base(ii, 0) + np.arange(nJ)[:, None] * B + np.arange(nA)[None, :]).ravel()
            vals = np.tile(arc_delay / a[ii], nJ)
            keep = vals != 0.0
            rows.add(cols[keep], vals[keep], "<=", inst.d_max, f"delay[{i}]")

    return BuiltModel(m, vm, formulation, inst, rows.families)


def _build_compact(inst: ProblemInstance, formulation: str, *, weight: float, delay: bool) -> BuiltModel:
    _check(inst)
    topo = inst.topology
    I, J = inst.demand_set, inst.candidate_set
    nI, nJ = len(I), len(J)
    arcs = topo.arcs
    nA = len(arcs)
    vm = VarMap(I, J, arcs, formulation, compact=True)
    B = vm.block
    m = LinearModel(f"jsgpr-{formulation.lower()}-compact")
    link_of, arc_cost, arc_delay = _arc_vectors(inst, weight)
    ins, outs = _node_arcs(inst)
    a = np.asarray(inst.demand, dtype=float)
    q = np.asarray(inst.gw_capacity, dtype=float)
    jpos = {j: jj for jj, j in enumerate(J)}

    m.add_variables([f"y[{j}]" for j in J], 0.0, 1.0, inst.deploy_cost)
    block_obj = np.concatenate([arc_cost, np.zeros(nJ)])
    for i in I:
        names = [f"g[{i},{u}>{v}]" for u, v, _ in arcs] + [f"s[{i},{j}]" for j in J]
        m.add_variables(names, 0.0, INF, block_obj)

    def sink(ii: int, jj: int) -> int:
        return nJ + ii * B + nA + jj

    rows = _Rows(m)
    rows.begin("demand")
    for ii, i in enumerate(I):
        rows.add([sink(ii, jj) for jj in range(nJ)], np.ones(nJ), "=", a[ii], f"demand[{i}]")
    rows.begin("feasibility")
    for ii, i in enumerate(I):
        for jj, j in enumerate(J):
            rows.add([sink(ii, jj), jj], [1.0, -a[ii]], "<=", 0.0, f"feas[{i},{j}]")
    rows.begin("gateway_capacity")
    for jj, j in enumerate(J):
        rows.add([sink(ii, jj) for ii in range(nI)] + [jj], [1.0] * nI + [-q[jj]], "<=", 0.0, f"gwcap[{j}]")
    rows.begin("link_capacity")
    source_bases = nJ + np.arange(nI, dtype=np.int64) * B
    for k, link in enumerate(topo.links):
        pos = np.flatnonzero(link_of == k)
        cols = (source_bases[:, None] + pos[None, :]).ravel()
        rows.add(cols, np.ones(len(cols)), "<=", link.capacity_mbps, f"linkcap[{link.u}-{link.v}]")
    rows.begin("conservation")
    for ii, i in enumerate(I):
        b0 = nJ + ii * B
        for u in topo.node_ids:
            if u == i:
                continue
            cols = [b0 + ins[u], b0 + outs[u]]
            vals = [np.ones(len(ins[u])), -np.ones(len(outs[u]))]
            if u in jpos:
                cols.append(np.array([sink(ii, jpos[u])]))
                vals.append(np.array([-1.0]))
            rows.add(np.concatenate(cols), np.concatenate(vals), "=", 0.0, f"flow[{i},{u}]")
    if delay and math.isfinite(inst.d_max):
        rows.begin("delay")
        for ii, i in enumerate(I):
            cols = nJ + ii * B + np.arange(nA)
            vals = arc_delay / a[ii]
            keep = vals != 0.0
            rows.add(cols[keep], vals[keep], "<=", inst.d_max, f"delay[{i}]")
    return BuiltModel(m, vm, formulation, inst, rows.families)


def _add_load_ceiling(built: BuiltModel, alpha: float) -> BuiltModel:
    inst, vm, m = built.instance, built.varmap, built.model
    col = m.add_variable("l_max", 0.0, min(inst.gw_capacity), alpha * inst.phi)
    vm = VarMap(vm.demand_set, vm.candidate_set, vm.arcs, "LB", vm.compact, col)
    families = dict(built.row_families)
    start = m.num_rows
    for j in inst.candidate_set:
        cols = [vm.sink_col(i, j) for i in inst.demand_set] + [col]
        vals = [1.0] * len(inst.demand_set) + [-1.0]
        m.add_row_arrays(np.array(cols), np.array(vals), "<=", 0.0, f"load[{j}]")
    families["load"] = (start, m.num_rows)
    return BuiltModel(m, vm, "LB", inst, families)


def build_jsgpr_f2(inst: ProblemInstance, *, compact: bool = False, delay: bool = True) -> BuiltModel:
    """Formulation II with per-demand average-delay rows (omitted when ``d_max`` is infinite)."""
    if compact:
        return _build_compact(inst, "F2", weight=inst.phi, delay=delay)
    return _build_full(inst, "F2", weight=inst.phi, delay=delay)


def build_jsgpr_f1(inst: ProblemInstance, use_phi: bool = False, *, delay: bool = True) -> BuiltModel:
    """Formulation I with explicit assignment fractions.

    The routing term is unweighted unless ``use_phi`` is set. Delay rows are
    included by default so that F1 and F2 describe the same feasible set;
    pass ``delay=False`` for the bare facility location-routing model.
    """
    return _build_full(inst, "F1", weight=inst.phi if use_phi else 1.0, delay=delay)


def build_jsgpr_lb(inst: ProblemInstance, alpha: float | None = None, *, compact: bool = False, delay: bool = True) -> BuiltModel:
    """F2 plus a load ceiling ``l_max <= min q_j`` priced at ``alpha * phi``.

    The per-gateway ``q_j y_j`` rows are kept next to the new load rows: they
    are implied for integral ``y`` but keep the relaxation as tight as F2's.
    """
    alpha = inst.alpha if alpha is None else float(alpha)
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    return _add_load_ceiling(build_jsgpr_f2(inst, compact=compact, delay=delay), alpha)


def build(inst: ProblemInstance, formulation: str = "F2", *, compact: bool = False, alpha: float | None = None) -> BuiltModel:
    if formulation == "F2":
        return build_jsgpr_f2(inst, compact=compact)
    if formulation == "LB":
        return build_jsgpr_lb(inst, alpha, compact=compact)
    if formulation == "F1":
        return build_jsgpr_f1(inst, use_phi=True)
    raise ValueError(f"unknown formulation {formulation!r}")


def placement_bounds(built: BuiltModel, S) -> tuple[np.ndarray, np.ndarray]:
    """Column bounds with ``y`` clamped to the placement ``S``."""
    S = set(S)
    lo = np.asarray(built.model.lower, dtype=float).copy()
    hi = np.asarray(built.model.upper, dtype=float).copy()
    for j in built.varmap.candidate_set:
        c = built.varmap.y_col(j)
        lo[c] = hi[c] = 1.0 if j in S else 0.0
    return lo, hi


def fix_placement(built: BuiltModel, S) -> LinearModel:
    """Copy of the model with ``y_j = [j in S]``; what remains is a routing LP."""
    unknown = set(S) - set(built.varmap.candidate_set)
    if unknown:
        raise KeyError(f"not candidates: {sorted(unknown)}")
    m = built.model.copy()
    lo, hi = placement_bounds(built, S)
    for c in built.varmap.binaries:
        m.set_bounds(c, lo[c], hi[c])
    return m


def _decompose_source(i: str, arcs, g: np.ndarray, sinks: dict[str, float], tol: float):
    """Split one source's aggregated flow into per-gateway path flows.

    Returns ``{j: {arc_index: flow}}``. Cycles met on the way are cancelled
    into a leftover circulation, which is attached to the first gateway that
    receives traffic so conservation still holds exactly.
    """
    residual = g.copy()
    remaining = dict(sinks)
    out: dict[str, dict[int, float]] = {j: {} for j, v in sinks.items() if v > 0}
    leaving: dict[str, list[int]] = {}
    for a, (u, _, _) in enumerate(arcs):
        leaving.setdefault(u, []).append(a)

    def push(j, path, amount):
        d = out.setdefault(j, {})
        for a in path:
            d[a] = d.get(a, 0.0) + amount
            residual[a] -= amount

    guard = 0
    while any(v > tol for v in remaining.values()):
        guard += 1
        if guard > 10 * (len(arcs) + len(sinks)) + 100:
            break
        node, path, seen = i, [], {i: 0}
        target = None
        while True:
            if remaining.get(node, 0.0) > tol:
                target = node
                break
            nxt = [a for a in leaving.get(node, []) if residual[a] > tol]
            if not nxt:
                break
            a = max(nxt, key=lambda k: residual[k])
            head = arcs[a][1]
            path.append(a)
            if head in seen:
                # cancel the cycle; its flow becomes circulation
                cyc = path[seen[head]:]
                amount = min(residual[k] for k in cyc)
                for k in cyc:
                    residual[k] -= amount
                del path[seen[head]:]
                seen = {n: p for n, p in seen.items() if p <= seen[head]}
                node = head
                continue
            seen[head] = len(path)
            node = head
        if target is None:
            break  # numerical residue only
        amount = min([remaining[target]] + [residual[a] for a in path])
        if path and amount <= tol:
            break
        push(target, path, amount)
        remaining[target] -= amount
        if not path:
            out.setdefault(target, {})
    # whatever is left (circulation or rounding residue) rides with one gateway
    left = {a: v for a, v in enumerate(residual) if v > 0.0}
    if left:
        j0 = next((j for j, v in sinks.items() if v > 0), None)
        if j0 is not None:
            d = out.setdefault(j0, {})
            for a, v in left.items():
                d[a] = d.get(a, 0.0) + v
    return out


def extract_solution(built: BuiltModel, x, *, status: str = "Accepted", objective: float | None = None, zero_tol: float = 1e-12) -> Solution:
    """Turn a column vector into a :class:`Solution` with per-commodity flows."""
    x = np.asarray(x, dtype=float)
    vm, inst = built.varmap, built.instance
    arcs = vm.arcs
    nA = len(arcs)
    placement = {j: int(round(x[vm.y_col(j)])) for j in vm.candidate_set}
    flows: dict = {}
    delivered: dict = {}
    a = inst.demand_of
    if vm.compact:
        for i in vm.demand_set:
            b0 = vm._source_base(i)
            g = np.maximum(x[b0:b0 + nA], 0.0)
            g[g <= zero_tol] = 0.0
            sinks = {j: max(float(x[vm.sink_col(i, j)]), 0.0) for j in vm.candidate_set}
            sinks = {j: v for j, v in sinks.items() if v > zero_tol}
            for j, v in sinks.items():
                delivered[(i, j)] = v
            for j, per_arc in _decompose_source(i, arcs, g, sinks, tol=1e-12).items():
                for k, v in per_arc.items():
                    if v > zero_tol:
                        flows[(i, j, arcs[k][:2])] = v
    else:
        for i in vm.demand_set:
            for j in vm.candidate_set:
                b0 = vm._commodity_base(i, j)
                seg = x[b0:b0 + nA]
                for k in np.flatnonzero(seg > zero_tol).tolist():
                    flows[(i, j, arcs[k][:2])] = float(seg[k])
                if vm.formulation == "F1":
                    v = float(x[vm.x_col(i, j)]) * a[i]
                else:
                    v = float(x[b0 + nA])
                if v > zero_tol:
                    delivered[(i, j)] = v
    l_max = float(x[vm.l_max]) if vm.l_max is not None else None
    obj = built.model.objective_value(x) if objective is None else objective
    return Solution(placement, flows, delivered, obj, status, l_max, built.formulation)


def solution_vector(built: BuiltModel, sol: Solution) -> np.ndarray:
    """Inverse of :func:`extract_solution` for per-commodity layouts."""
    vm = built.varmap
    x = np.zeros(built.model.num_cols)
    for j, v in sol.placement.items():
        x[vm.y_col(j)] = v
    if vm.compact:
        for (i, j, arc), f in sol.flows.items():
            x[vm.g_col(i, arc)] += f
        for (i, j), v in sol.delivered.items():
            x[vm.sink_col(i, j)] += v
    else:
        for (i, j, arc), f in sol.flows.items():
            x[vm.f_col(i, j, arc)] = f
        for (i, j), v in sol.delivered.items():
            if vm.formulation == "F1":
                x[vm.x_col(i, j)] = v / built.instance.demand_of[i]
            else:
                x[vm.sink_col(i, j)] = v
    if vm.l_max is not None:
        x[vm.l_max] = sol.l_max if sol.l_max is not None else max(
            (sum(v for (_, jj), v in sol.delivered.items() if jj == j) for j in vm.candidate_set), default=0.0
        )
    return x


def x_from_flows(sol: Solution, varmap: VarMap | None, inst: ProblemInstance) -> dict[tuple[str, str], float]:
    """Assignment fractions ``x_ij = delivered(i, j) / a_i`` for every pair in I x J."""
    out = {}
    for i in inst.demand_set:
        a = inst.demand_of[i]
        if not a > 0:
            raise ZeroDemand(f"demand of {i!r} is not positive")
        for j in inst.candidate_set:
            out[(i, j)] = sol.delivered.get((i, j), 0.0) / a
    return out
