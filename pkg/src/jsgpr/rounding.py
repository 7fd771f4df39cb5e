"""LP relaxation with deterministic upward rounding, then a routing re-solve.

The relaxation is solved repeatedly. Each pass collects the placement
variables that are still fractional, raises the lower bound of the largest
one to 1 and solves again. The loop stops once no ``y`` is fractional (or the
relaxation becomes infeasible, which rejects the instance). The final
placement is then routed with the multi-commodity flow LP of
:func:`solve_mcf`.

Nothing is ever fixed to zero, so a candidate left closed by one pass may
open in a later one. Every pass is solved from scratch unless
``warm_start=True`` asks for the previous basis to be reused.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import Infeasible
from .lp import INT_TOL, LpSession
from .metrics import Solution
from .model import BuiltModel, extract_solution, placement_bounds


@dataclass
class RoundingStep:
    fractional: int
    chosen: str | None
    chosen_value: float | None
    lp_objective: float


@dataclass
class RoundingTrace:
    steps: list[RoundingStep] = field(default_factory=list)
    status: str = "Accepted"
    placement: list[str] = field(default_factory=list)
    final_objective: float | None = None
    relaxation_objective: float | None = None
    wall_time_s: float = 0.0
    reason: str = ""

    @property
    def iterations(self) -> int:
        """Number of fixing passes (the first, unconstrained solve is not a fix)."""
        return sum(1 for s in self.steps if s.chosen is not None)

    @property
    def lp_objectives(self) -> list[float]:
        return [s.lp_objective for s in self.steps]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class RoundingResult:
    solution: Solution
    trace: RoundingTrace

    @property
    def status(self) -> str:
        return self.trace.status

    @property
    def accepted(self) -> bool:
        return self.trace.status == "Accepted"


def _fractional(y: np.ndarray, tol: float) -> np.ndarray:
    return np.flatnonzero(np.minimum(np.abs(y), np.abs(1.0 - y)) > tol)


def solve_mcf(built: BuiltModel, S, *, method: str = "auto", session: LpSession | None = None) -> Solution:
    """Route all demand with the placement fixed to ``S``.

    The returned objective is the model objective with those ``y`` values,
    i.e. the deployment cost of ``S`` plus the weighted routing cost.
    Raises :class:`~jsgpr.errors.Infeasible` when no routing exists.
    """
    unknown = set(S) - set(built.varmap.candidate_set)
    if unknown:
        raise KeyError(f"not candidates: {sorted(unknown)}")
    lo, hi = placement_bounds(built, S)
    session = session or LpSession(built.model, method)
    out = session.solve(lo, hi)
    if not out.optimal:
        raise Infeasible(f"routing LP for placement {sorted(S)} is {out.status}")
    return extract_solution(built, out.x, objective=out.objective)


def round_lp(built: BuiltModel, *, tol: float = INT_TOL, method: str = "auto", warm_start: bool = False) -> RoundingResult:
    """Run the rounding loop on ``built`` and route the resulting placement."""
    t0 = time.perf_counter()
    vm, model = built.varmap, built.model
    J = vm.candidate_set
    ycols = np.array([vm.y_col(j) for j in J], dtype=np.int64)
    lo = np.asarray(model.lower, dtype=float).copy()
    hi = np.asarray(model.upper, dtype=float).copy()
    trace = RoundingTrace()
    session = LpSession(model, method)

    def reject(reason: str) -> RoundingResult:
        trace.status = "Rejected"
        trace.reason = reason
        trace.wall_time_s = time.perf_counter() - t0
        return RoundingResult(Solution.zero(built.instance), trace)

    # at most |J| fixes, plus the initial solve
    for _ in range(len(J) + 1):
        if not warm_start:
            session = LpSession(model, method)
        out = session.solve(lo, hi)
        if not out.optimal:
            if not trace.steps:
                return reject(f"relaxation {out.status}")
            return reject(f"relaxation {out.status} after fixing {trace.steps[-1].chosen}")
        if trace.relaxation_objective is None:
            trace.relaxation_objective = out.objective
        y = out.x[ycols]
        frac = _fractional(y, tol)
        if frac.size == 0:
            trace.steps.append(RoundingStep(0, None, None, out.objective))
            break
        # largest fractional value; np.argmax keeps the lowest index on ties
        pick = int(frac[np.argmax(y[frac])])
        trace.steps.append(RoundingStep(int(frac.size), J[pick], float(y[pick]), out.objective))
        lo[ycols[pick]] = 1.0
    else:  # pragma: no cover - every pass fixes a new candidate
        return reject("fixing loop did not terminate")

    S = [j for j, v in zip(J, y) if v > 0.5]
    try:
        sol = solve_mcf(built, S, session=session)
    except Infeasible as exc:
        return reject(str(exc))
    trace.placement = S
    trace.final_objective = sol.objective
    trace.wall_time_s = time.perf_counter() - t0
    return RoundingResult(sol, trace)
