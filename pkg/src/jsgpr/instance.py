"""Seeded problem instances built from a topology.

Random draws use numpy's PCG64 bit generator seeded through a
``SeedSequence``; costs and demands come from two independent child streams
(spawn keys 0 and 1) so changing one recipe never perturbs the other. Every
node of the topology gets a draw, in node order, whether or not it belongs to
the demand or candidate set, so an instance restricted to a subset sees the
same per-node values as the full one.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import EmptyCandidateSet, EmptyDemandSet, InstanceError, IsolatedDemandNode
from .topology import Topology

DEFAULT_D_MAX_MS = 10.0
_COST_STREAM = 0
_DEMAND_STREAM = 1


@dataclass(frozen=True)
class SamplingParams:
    seed: int = 0
    cost_range: tuple[float, float] = (500.0, 1000.0)
    demand_low_fraction: float = 2.0 / 3.0
    q_j_default: float = 240.0
    c_uv_default: float = 1.0

    def __post_init__(self):
        lo, hi = self.cost_range
        if not lo < hi:
            raise ValueError("cost_range.low must be below cost_range.high")
        if not 0 < self.demand_low_fraction <= 1:
            raise ValueError("demand_low_fraction must lie in (0, 1]")

    def rng(self, stream: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(stream,))))


def sample_costs(t: Topology, p: SamplingParams, candidates: Sequence[str] | None = None) -> dict[str, float]:
    """Gateway deployment costs drawn from U[low, high)."""
    lo, hi = p.cost_range
    draws = p.rng(_COST_STREAM).uniform(lo, hi, size=len(t.nodes))
    per_node = dict(zip(t.node_ids, draws.tolist()))
    ids = t.node_ids if candidates is None else candidates
    return {j: per_node[j] for j in ids}


def sample_demands(t: Topology, p: SamplingParams, demands: Sequence[str] | None = None) -> dict[str, float]:
    """Per-node traffic rates drawn from U[f*cmax, cmax).

    ``cmax`` is the largest capacity among the links incident to the node and
    ``f`` is ``p.demand_low_fraction`` (2/3 by default).
    """
    u = p.rng(_DEMAND_STREAM).random(size=len(t.nodes))
    per_node = dict(zip(t.node_ids, u.tolist()))
    ids = t.node_ids if demands is None else demands
    out = {}
    for i in ids:
        cmax = t.max_incident_capacity(i)
        if cmax <= 0:
            raise IsolatedDemandNode(i)
        lo = p.demand_low_fraction * cmax
        out[i] = lo + per_node[i] * (cmax - lo)
    return out


@dataclass(frozen=True)
class ProblemInstance:
    """All data of one placement-and-routing problem.

    Per-element values are tuples aligned with ``demand_set`` (``demand``),
    ``candidate_set`` (``deploy_cost``, ``gw_capacity``) and
    ``topology.links`` (``unit_bw_cost``).
    """

    topology: Topology
    demand_set: tuple[str, ...]
    candidate_set: tuple[str, ...]
    deploy_cost: tuple[float, ...]
    unit_bw_cost: tuple[float, ...]
    demand: tuple[float, ...]
    gw_capacity: tuple[float, ...]
    d_max: float = DEFAULT_D_MAX_MS
    phi: float = field(default=float("nan"))
    alpha: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        for name in ("demand_set", "candidate_set", "deploy_cost", "unit_bw_cost", "demand", "gw_capacity"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        known = set(self.topology.node_ids)
        if not self.demand_set:
            raise EmptyDemandSet("demand set is empty")
        if not self.candidate_set:
            raise EmptyCandidateSet("candidate set is empty")
        for label, ids in (("demand", self.demand_set), ("candidate", self.candidate_set)):
            missing = [v for v in ids if v not in known]
            if missing:
                raise InstanceError(f"{label} nodes not in topology: {missing}")
            if len(set(ids)) != len(ids):
                raise InstanceError(f"{label} set has duplicates")
        if len(self.demand) != len(self.demand_set):
            raise InstanceError("demand vector does not match the demand set")
        if len(self.deploy_cost) != len(self.candidate_set) or len(self.gw_capacity) != len(self.candidate_set):
            raise InstanceError("candidate vectors do not match the candidate set")
        if len(self.unit_bw_cost) != len(self.topology.links):
            raise InstanceError("one unit bandwidth cost per link is required")
        if any(not a > 0 for a in self.demand):
            raise InstanceError("every demand must be positive")
        if any(not q > 0 for q in self.gw_capacity):
            raise InstanceError("every gateway capacity must be positive")
        if not self.d_max > 0:
            raise InstanceError("d_max must be positive")
        if math.isnan(self.phi):
            object.__setattr__(self, "phi", 1.0 / math.fsum(self.demand))

    @cached_property
    def demand_of(self) -> dict[str, float]:
        return dict(zip(self.demand_set, self.demand))

    @cached_property
    def cost_of(self) -> dict[str, float]:
        return dict(zip(self.candidate_set, self.deploy_cost))

    @cached_property
    def capacity_of(self) -> dict[str, float]:
        return dict(zip(self.candidate_set, self.gw_capacity))

    @property
    def total_demand(self) -> float:
        return math.fsum(self.demand)

    def with_d_max(self, d_max: float) -> "ProblemInstance":
        return replace(self, d_max=d_max)

    def with_alpha(self, alpha: float) -> "ProblemInstance":
        return replace(self, alpha=alpha)

    def relabel(self, mapping: dict[str, str]) -> "ProblemInstance":
        mapping = {nid: mapping.get(nid, nid) for nid in self.topology.node_ids}
        return replace(
            self,
            topology=self.topology.relabel(mapping),
            demand_set=tuple(mapping[i] for i in self.demand_set),
            candidate_set=tuple(mapping[j] for j in self.candidate_set),
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "topology": self.topology.to_dict(),
            "demand_set": list(self.demand_set),
            "candidate_set": list(self.candidate_set),
            "deploy_cost": list(self.deploy_cost),
            "unit_bw_cost": list(self.unit_bw_cost),
            "demand": list(self.demand),
            "gw_capacity": list(self.gw_capacity),
            "d_max": self.d_max if math.isfinite(self.d_max) else "inf",
            "phi": self.phi,
            "alpha": self.alpha,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemInstance":
        return cls(
            topology=Topology.from_dict(doc["topology"]),
            demand_set=tuple(doc["demand_set"]),
            candidate_set=tuple(doc["candidate_set"]),
            deploy_cost=tuple(doc["deploy_cost"]),
            unit_bw_cost=tuple(doc["unit_bw_cost"]),
            demand=tuple(doc["demand"]),
            gw_capacity=tuple(doc["gw_capacity"]),
            d_max=float(doc["d_max"]),
            phi=float(doc["phi"]),
            alpha=float(doc.get("alpha", 1.0)),
            seed=doc.get("seed"),
        )

    @classmethod
    def from_json(cls, text: str) -> "ProblemInstance":
        return cls.from_dict(json.loads(text))


def make_instance(
    t: Topology,
    p: SamplingParams | None = None,
    d_max: float = DEFAULT_D_MAX_MS,
    I: Sequence[str] | None = None,
    J: Sequence[str] | None = None,
    *,
    alpha: float = 1.0,
) -> ProblemInstance:
    """Sample an instance; demand and candidate sets default to every node."""
    p = p or SamplingParams()
    I = tuple(t.node_ids if I is None else I)
    J = tuple(t.node_ids if J is None else J)
    if not I:
        raise EmptyDemandSet("demand set is empty")
    if not J:
        raise EmptyCandidateSet("candidate set is empty")
    unknown = sorted((set(I) | set(J)) - set(t.node_ids))
    if unknown:
        raise InstanceError(f"nodes not in topology: {unknown}")
    costs = sample_costs(t, p, J)
    demands = sample_demands(t, p, I)
    return ProblemInstance(
        topology=t,
        demand_set=I,
        candidate_set=J,
        deploy_cost=tuple(costs[j] for j in J),
        unit_bw_cost=tuple(p.c_uv_default for _ in t.links),
        demand=tuple(demands[i] for i in I),
        gw_capacity=tuple(p.q_j_default for _ in J),
        d_max=d_max,
        alpha=alpha,
        seed=p.seed,
    )
