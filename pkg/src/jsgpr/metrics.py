"""Solution type, evaluation metrics and an independent feasibility checker.

Everything here is recomputed from raw flow values and instance data; no
solver objective is trusted.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field

from .errors import ZeroDemand
from .instance import ProblemInstance

Arc = tuple[str, str]


@dataclass
class Solution:
    """Placement plus per-commodity routing.

    ``flows`` maps ``(i, j, (u, v))`` to Mbps on the directed terrestrial
    arc ``u -> v`` for traffic of demand ``i`` delivered at gateway ``j``;
    ``delivered`` maps ``(i, j)`` to the amount handed from ``j`` to the
    satellite. Zero entries may be omitted.
    """

    placement: dict[str, int]
    flows: dict[tuple[str, str, Arc], float] = field(default_factory=dict)
    delivered: dict[tuple[str, str], float] = field(default_factory=dict)
    objective: float = math.nan
    status: str = "Accepted"
    l_max: float | None = None
    formulation: str = ""

    @classmethod
    def zero(cls, inst: ProblemInstance, status: str = "Rejected") -> "Solution":
        return cls({j: 0 for j in inst.candidate_set}, {}, {}, 0.0, status)

    @property
    def open_gateways(self) -> list[str]:
        return [j for j, v in self.placement.items() if v]

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "objective": self.objective,
            "formulation": self.formulation,
            "l_max": self.l_max,
            "placement": dict(self.placement),
            "delivered": [[i, j, v] for (i, j), v in self.delivered.items()],
            "flows": [[i, j, u, v, f] for (i, j, (u, v)), f in self.flows.items()],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Solution":
        return cls(
            placement={k: int(v) for k, v in doc["placement"].items()},
            flows={(i, j, (u, v)): float(f) for i, j, u, v, f in doc["flows"]},
            delivered={(i, j): float(v) for i, j, v in doc["delivered"]},
            objective=float(doc["objective"]),
            status=doc["status"],
            l_max=doc.get("l_max"),
            formulation=doc.get("formulation", ""),
        )


def _arc_data(inst: ProblemInstance) -> dict[Arc, tuple[float, float, int]]:
    """``(u, v) -> (delay_ms, unit cost, link index)``."""
    out = {}
    for k, link in enumerate(inst.topology.links):
        cost = inst.unit_bw_cost[k]
        out[(link.u, link.v)] = (link.delay_ms, cost, k)
        out[(link.v, link.u)] = (link.delay_ms, cost, k)
    return out


def deployment_cost(sol: Solution, inst: ProblemInstance) -> float:
    return math.fsum(inst.cost_of[j] for j, v in sol.placement.items() if v)


def routing_cost(sol: Solution, inst: ProblemInstance) -> float:
    arcs = _arc_data(inst)
    return math.fsum(f * arcs[arc][1] for (_, _, arc), f in sol.flows.items())


def total_cost(sol: Solution, inst: ProblemInstance, *, phi: float | None = None) -> float:
    """Deployment cost plus phi-weighted routing cost (phi defaults to the instance's)."""
    phi = inst.phi if phi is None else phi
    return deployment_cost(sol, inst) + phi * routing_cost(sol, inst)


def avg_delay(sol: Solution, inst: ProblemInstance) -> dict[str, float]:
    """Demand-weighted terrestrial propagation delay per demand node (ms)."""
    arcs = _arc_data(inst)
    acc: dict[str, float] = defaultdict(float)
    for (i, _, arc), f in sol.flows.items():
        acc[i] += f * arcs[arc][0]
    out = {}
    for i, a in zip(inst.demand_set, inst.demand):
        if not a > 0:
            raise ZeroDemand(f"demand of {i!r} is not positive")
        out[i] = acc.get(i, 0.0) / a
    return out


def gateway_loads(sol: Solution, inst: ProblemInstance | None = None) -> dict[str, float]:
    """Traffic handed to the satellite at each candidate (0 when closed)."""
    loads: dict[str, float] = {j: 0.0 for j in sol.placement}
    if inst is not None:
        loads = {j: 0.0 for j in inst.candidate_set}
    for (_, j), v in sol.delivered.items():
        loads[j] = loads.get(j, 0.0) + v
    return loads


@dataclass
class ResidualReport:
    """Largest violation per constraint family, in natural units."""

    demand: float = 0.0
    feasibility: float = 0.0
    gateway_capacity: float = 0.0
    link_capacity: float = 0.0
    conservation: float = 0.0
    delay: float = 0.0
    load: float = 0.0
    nonnegativity: float = 0.0
    integrality: float = 0.0
    tol: float = 1e-6
    delay_tol: float = 1e-6

    @property
    def families(self) -> dict[str, float]:
        d = asdict(self)
        d.pop("tol")
        d.pop("delay_tol")
        return d

    @property
    def worst(self) -> float:
        return max(self.families.values())

    @property
    def passed(self) -> bool:
        return not self.failures()

    def failures(self) -> dict[str, float]:
        return {k: v for k, v in self.families.items() if v > (self.delay_tol if k == "delay" else self.tol)}


def check_feasibility(
    sol: Solution,
    inst: ProblemInstance,
    tol: float = 1e-6,
    *,
    delay_tol: float | None = None,
    l_max: float | None = None,
) -> ResidualReport:
    """Verify demand, gateway, capacity, conservation and delay constraints.

    Conservation is checked per commodity at every node: at the demand node
    the net outflow plus local delivery equals the commodity's delivered
    amount, elsewhere inflow equals outflow plus local delivery. ``delay_tol``
    defaults to ``tol``; the delay residual is compared against it.
    ``l_max`` (or ``sol.l_max``) enables the load rows of the balanced model
    together with the ``l_max <= min q_j`` bound.
    """
    rep = ResidualReport(tol=tol, delay_tol=tol if delay_tol is None else delay_tol)
    topo = inst.topology
    arcs = _arc_data(inst)
    I, J = inst.demand_set, inst.candidate_set
    a = inst.demand_of
    Jset = set(J)

    for (i, j, arc), f in sol.flows.items():
        rep.nonnegativity = max(rep.nonnegativity, -f)
    for (i, j), v in sol.delivered.items():
        rep.nonnegativity = max(rep.nonnegativity, -v)
        if j not in Jset:
            rep.feasibility = max(rep.feasibility, abs(v))
    for j, v in sol.placement.items():
        rep.integrality = max(rep.integrality, min(abs(v), abs(v - 1)))

    delivered_by_i: dict[str, float] = defaultdict(float)
    for (i, j), v in sol.delivered.items():
        delivered_by_i[i] += v
    for i in I:
        rep.demand = max(rep.demand, abs(delivered_by_i.get(i, 0.0) - a[i]))

    for (i, j), v in sol.delivered.items():
        y = sol.placement.get(j, 0)
        rep.feasibility = max(rep.feasibility, v - y * a.get(i, 0.0))

    loads = gateway_loads(sol, inst)
    cap_limit = l_max if l_max is not None else sol.l_max
    for j, load in loads.items():
        rep.gateway_capacity = max(rep.gateway_capacity, load - inst.capacity_of.get(j, 0.0) * sol.placement.get(j, 0))
        if cap_limit is not None:
            rep.load = max(rep.load, load - cap_limit)
    if cap_limit is not None:
        rep.load = max(rep.load, cap_limit - min(inst.gw_capacity))

    link_load = defaultdict(float)
    for (_, _, arc), f in sol.flows.items():
        link_load[arcs[arc][2]] += f
    for k, load in link_load.items():
        rep.link_capacity = max(rep.link_capacity, load - topo.links[k].capacity_mbps)

    # net outflow per (commodity, node)
    net: dict[tuple[str, str, str], float] = defaultdict(float)
    for (i, j, (u, v)), f in sol.flows.items():
        net[(i, j, u)] += f
        net[(i, j, v)] -= f
    commodities = {(i, j) for (i, j, _) in sol.flows} | set(sol.delivered)
    for i, j in commodities:
        d = sol.delivered.get((i, j), 0.0)
        for u in topo.node_ids:
            expected = (d if u == i else 0.0) - (d if u == j else 0.0)
            rep.conservation = max(rep.conservation, abs(net.get((i, j, u), 0.0) - expected))

    if math.isfinite(inst.d_max):
        for i, val in avg_delay(sol, inst).items():
            rep.delay = max(rep.delay, val - inst.d_max)
    return rep


@dataclass
class MetricsReport:
    total_cost: float
    deployment_cost: float
    routing_cost: float
    avg_delay_ms: dict[str, float]
    load_mbps: dict[str, float]
    residuals: dict[str, float]
    wall_time_s: float = math.nan
    status: str = ""

    CSV_COLUMNS = (
        "status",
        "total_cost",
        "deployment_cost",
        "routing_cost",
        "gateways",
        "max_load_mbps",
        "mean_load_mbps",
        "mean_delay_ms",
        "max_delay_ms",
        "max_residual",
        "wall_time_s",
    )

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> dict:
        open_loads = [v for v in self.load_mbps.values() if v > 1e-9]
        delays = list(self.avg_delay_ms.values())
        return {
            "status": self.status,
            "total_cost": f"{self.total_cost:.9f}",
            "deployment_cost": f"{self.deployment_cost:.9f}",
            "routing_cost": f"{self.routing_cost:.9f}",
            "gateways": len(open_loads),
            "max_load_mbps": f"{max(open_loads, default=0.0):.9f}",
            "mean_load_mbps": f"{(sum(open_loads) / len(open_loads)) if open_loads else 0.0:.9f}",
            "mean_delay_ms": f"{(sum(delays) / len(delays)) if delays else 0.0:.9f}",
            "max_delay_ms": f"{max(delays, default=0.0):.9f}",
            "max_residual": f"{max(self.residuals.values(), default=0.0):.3e}",
            "wall_time_s": f"{self.wall_time_s:.3f}",
        }

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.CSV_COLUMNS, lineterminator="\n")
        if header:
            w.writeheader()
        w.writerow(self.csv_row())
        return buf.getvalue()


def metrics_report(sol: Solution, inst: ProblemInstance, wall_time_s: float = math.nan, tol: float = 1e-6) -> MetricsReport:
    res = check_feasibility(sol, inst, tol)
    return MetricsReport(
        total_cost=total_cost(sol, inst),
        deployment_cost=deployment_cost(sol, inst),
        routing_cost=routing_cost(sol, inst),
        avg_delay_ms=avg_delay(sol, inst),
        load_mbps=gateway_loads(sol, inst),
        residuals=res.families,
        wall_time_s=wall_time_s,
        status=sol.status,
    )
