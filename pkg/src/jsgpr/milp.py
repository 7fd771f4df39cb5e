"""Branch and bound over binary columns, and a subset-enumeration oracle.

The search is deterministic: it branches on the most fractional binary (ties
go to the lowest column index) and always expands the open node with the
smallest bound, ties broken by creation order. Node LPs are solved through
one :class:`jsgpr.lp.LpSession` with per-node bound overrides, so the model
itself is never modified and HiGHS can restart each node from the last basis.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import Infeasible, SubsetLimitExceeded
from .instance import ProblemInstance
from .lp import INT_TOL, LinearModel, LpSession, LpStatus
from .metrics import Solution
from .model import BuiltModel, build_jsgpr_f2, extract_solution

BRUTE_FORCE_MAX_CANDIDATES = 20


class MilpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    GAP_LIMIT = "GapLimit"
    NODE_LIMIT = "NodeLimit"
    TIME_LIMIT = "TimeLimit"

    def __str__(self):
        return self.value


@dataclass
class MilpOptions:
    node_limit: int = 1_000_000
    time_limit: float = 600.0
    # relative gap under which a node is pruned; anything above 1e-9 may end in GapLimit
    mip_gap: float = 1e-9
    int_tol: float = INT_TOL
    lp_method: str = "auto"
    # fix binaries whose reduced cost alone lifts the bound past the incumbent
    reduced_cost_fixing: bool = True


@dataclass
class MilpOutcome:
    status: MilpStatus
    x: np.ndarray | None
    objective: float
    bound: float
    nodes: int
    wall_time_s: float = 0.0
    bound_history: list[float] = field(default_factory=list)
    root_objective: float = math.nan
    rc_fixed: int = 0

    @property
    def has_incumbent(self) -> bool:
        return self.x is not None

    @property
    def gap(self) -> float:
        if self.x is None or not math.isfinite(self.bound):
            return math.inf
        return (self.objective - self.bound) / max(1.0, abs(self.objective))


def _most_fractional(x: np.ndarray, binaries: np.ndarray, tol: float) -> int | None:
    vals = x[binaries]
    dist = np.minimum(vals - np.floor(vals), np.ceil(vals) - vals)
    frac = dist > tol
    if not frac.any():
        return None
    score = np.where(frac, np.abs(vals - np.floor(vals) - 0.5), np.inf)
    # argmin returns the first hit, and ``binaries`` is sorted
    return int(binaries[int(np.argmin(score))])


def _rc_fixings(out, binaries: np.ndarray, lo: np.ndarray, hi: np.ndarray, cutoff: float, int_tol: float):
    """Binaries that can be fixed at their current bound for the whole subtree.

    With LP value ``z`` and reduced cost ``d`` of a column sitting at its
    lower bound, every point of the subtree with that column at 1 costs at
    least ``z + d`` (likewise ``z - d`` for a column at its upper bound).
    """
    if out.reduced_costs is None or not math.isfinite(cutoff) or not binaries.size:
        return binaries[:0], binaries[:0]
    rc = out.reduced_costs[binaries]
    xb = out.x[binaries]
    free = lo[binaries] < hi[binaries]
    reach = cutoff + 1e-7 * max(1.0, abs(cutoff))
    to_zero = free & (xb <= int_tol) & (out.objective + rc >= reach)
    to_one = free & (xb >= 1.0 - int_tol) & (out.objective - rc >= reach)
    return binaries[to_zero], binaries[to_one]


def solve_milp(
    model: LinearModel,
    binaries,
    opts: MilpOptions | None = None,
    *,
    incumbent: np.ndarray | None = None,
) -> MilpOutcome:
    """Minimise ``model`` with the columns in ``binaries`` restricted to {0, 1}.

    ``incumbent`` may supply a known feasible point (for instance a rounded
    solution); it only tightens pruning and is replaced as soon as a better
    integral node appears.
    """
    opts = opts or MilpOptions()
    t0 = time.perf_counter()
    binaries = np.array(sorted(set(int(b) for b in binaries)), dtype=np.int64)
    base_lo = np.asarray(model.lower, dtype=float)
    base_hi = np.asarray(model.upper, dtype=float)
    if binaries.size and (np.any(base_lo[binaries] < 0) or np.any(base_hi[binaries] > 1)):
        raise ValueError("binary columns must have bounds within [0, 1]")
    base_lo = base_lo.copy()
    base_hi = base_hi.copy()
    if binaries.size:
        base_lo[binaries] = np.ceil(base_lo[binaries] - opts.int_tol)
        base_hi[binaries] = np.floor(base_hi[binaries] + opts.int_tol)

    best_x: np.ndarray | None = None
    best_obj = math.inf
    if incumbent is not None:
        incumbent = np.asarray(incumbent, dtype=float)
        viol = model.residuals(incumbent).max(initial=0.0)
        integral = _most_fractional(incumbent, binaries, opts.int_tol) is None
        if viol <= 1e-6 and integral:
            best_x, best_obj = incumbent.copy(), model.objective_value(incumbent)

    session = LpSession(model, opts.lp_method)
    counter = itertools.count()
    # heap entries: (parent bound, order, fixed-to-zero cols, fixed-to-one cols)
    heap: list = [(-math.inf, next(counter), (), ())]
    nodes = 0
    history: list[float] = []
    root_obj = math.nan
    status = None
    rc_fixed = 0

    def prune_level() -> float:
        if not math.isfinite(best_obj):
            return math.inf
        return best_obj - opts.mip_gap * max(1.0, abs(best_obj))

    while heap:
        if nodes >= opts.node_limit:
            status = MilpStatus.NODE_LIMIT
            break
        if time.perf_counter() - t0 > opts.time_limit:
            status = MilpStatus.TIME_LIMIT
            break
        parent_bound, _, zeros, ones = heapq.heappop(heap)
        if parent_bound >= prune_level():
            continue
        nodes += 1
        lo, hi = base_lo.copy(), base_hi.copy()
        if zeros:
            hi[list(zeros)] = 0.0
        if ones:
            lo[list(ones)] = 1.0
        remaining = opts.time_limit - (time.perf_counter() - t0)
        out = session.solve(lo, hi, time_limit=max(remaining, 1.0))
        if nodes == 1 and out.optimal:
            root_obj = out.objective
        if out.status is LpStatus.ITERATION_LIMIT and time.perf_counter() - t0 > opts.time_limit:
            status = MilpStatus.TIME_LIMIT
            heapq.heappush(heap, (parent_bound, next(counter), zeros, ones))
            break
        if not out.optimal:
            history.append(min(heap[0][0], best_obj) if heap else best_obj)
            continue
        bound = max(out.objective, parent_bound)
        if bound < prune_level():
            col = _most_fractional(out.x, binaries, opts.int_tol)
            if col is None:
                x = out.x.copy()
                x[binaries] = np.round(x[binaries])
                best_x, best_obj = x, model.objective_value(x)
            else:
                if opts.reduced_cost_fixing:
                    fz, fo = _rc_fixings(out, binaries, lo, hi, prune_level(), opts.int_tol)
                    rc_fixed += fz.size + fo.size
                    if not zeros and not ones:
                        # at the root the fixings hold for the whole search
                        base_hi[fz] = 0.0
                        base_lo[fo] = 1.0
                    else:
                        zeros = zeros + tuple(fz.tolist())
                        ones = ones + tuple(fo.tolist())
                # both children inherit this node's bound; the down branch is queued first
                heapq.heappush(heap, (bound, next(counter), zeros + (col,), ones))
                heapq.heappush(heap, (bound, next(counter), zeros, ones + (col,)))
        open_bound = heap[0][0] if heap else math.inf
        history.append(min(open_bound, best_obj))

    elapsed = time.perf_counter() - t0
    open_bound = min((h[0] for h in heap), default=math.inf)
    if status is None:
        if best_x is None:
            return MilpOutcome(MilpStatus.INFEASIBLE, None, math.inf, math.inf, nodes, elapsed, history, root_obj, rc_fixed)
        bound = best_obj if not heap else min(open_bound, best_obj)
        # pruning at a gap coarser than the default counts as stopping early
        status = MilpStatus.OPTIMAL if opts.mip_gap <= 1e-9 else MilpStatus.GAP_LIMIT
        return MilpOutcome(status, best_x, best_obj, min(bound, best_obj), nodes, elapsed, history, root_obj, rc_fixed)
    bound = min(open_bound, best_obj)
    return MilpOutcome(status, best_x, best_obj, bound, nodes, elapsed, history, root_obj, rc_fixed)


@dataclass
class ExactResult:
    solution: Solution
    outcome: MilpOutcome

    @property
    def status(self) -> str:
        return str(self.outcome.status)


def solve_exact(built: BuiltModel, opts: MilpOptions | None = None, *, incumbent: Solution | None = None) -> ExactResult:
    """Branch and bound on a built JSGPR model, returning a :class:`Solution`."""
    from .model import solution_vector

    x0 = solution_vector(built, incumbent) if incumbent is not None and incumbent.status == "Accepted" else None
    out = solve_milp(built.model, built.binaries, opts, incumbent=x0)
    if out.x is None:
        status = "Rejected" if out.status is MilpStatus.INFEASIBLE else str(out.status)
        return ExactResult(Solution.zero(built.instance, status), out)
    status = "Accepted" if out.status in (MilpStatus.OPTIMAL, MilpStatus.GAP_LIMIT) else str(out.status)
    sol = extract_solution(built, out.x, status=status, objective=out.objective)
    return ExactResult(sol, out)


@dataclass
class BruteForceResult:
    status: str
    subset: tuple[str, ...] | None
    objective: float
    solution: Solution | None
    evaluated: int


def brute_force_placement(
    inst: ProblemInstance,
    *,
    built: BuiltModel | None = None,
    max_candidates: int = BRUTE_FORCE_MAX_CANDIDATES,
    lp_method: str = "auto",
) -> BruteForceResult:
    """Try every placement ``S`` of the candidate set and keep the cheapest.

    Each subset is routed with the flow LP of ``built`` (Formulation II by
    default) with ``y`` fixed. Subsets whose total gateway capacity cannot
    hold the total demand are skipped without an LP solve.
    """
    from .rounding import solve_mcf

    J = inst.candidate_set
    if len(J) > max_candidates:
        raise SubsetLimitExceeded(f"{len(J)} candidates exceed the enumeration limit of {max_candidates}")
    built = built or build_jsgpr_f2(inst)
    session = LpSession(built.model, lp_method)
    cap = inst.capacity_of
    need = inst.total_demand
    best: tuple[float, tuple[str, ...], Solution] | None = None
    evaluated = 0
    for r in range(1, len(J) + 1):
        for S in itertools.combinations(J, r):
            if sum(cap[j] for j in S) < need * (1 - 1e-12):
                continue
            evaluated += 1
            try:
                sol = solve_mcf(built, S, session=session)
            except Infeasible:
                continue
            if best is None or sol.objective < best[0] - 1e-12:
                best = (sol.objective, S, sol)
    if best is None:
        return BruteForceResult("Rejected", None, math.inf, None, evaluated)
    return BruteForceResult("Accepted", best[1], best[0], best[2], evaluated)
