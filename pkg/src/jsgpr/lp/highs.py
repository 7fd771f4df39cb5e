"""HiGHS back ends.

:class:`HighsSession` keeps one ``highspy.Highs`` object alive for a model so
that successive solves which only change column bounds (branch and bound
nodes, rounding passes) restart dual simplex from the previous basis.
:func:`highs_solve` is a one-shot call on top of a fresh session, and
:func:`linprog_solve` goes through :func:`scipy.optimize.linprog` instead; it
is kept as an independent route for cross-checks.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .model import FEAS_TOL, OPT_TOL, LpOutcome, LpStatus

try:  # pragma: no cover - exercised implicitly
    import highspy
except ImportError:  # pragma: no cover
    highspy = None

_LINPROG_STATUS = {
    0: LpStatus.OPTIMAL,
    1: LpStatus.ITERATION_LIMIT,
    2: LpStatus.INFEASIBLE,
    3: LpStatus.UNBOUNDED,
    4: LpStatus.NUMERICAL_ERROR,
}


def _row_bounds(relations, b):
    inf = np.inf
    rlo = np.where(relations == "<=", -inf, b)
    rhi = np.where(relations == ">=", inf, b)
    return rlo, rhi


class HighsSession:
    """A persistent HiGHS instance for one constraint matrix.

    Only column bounds may change between :meth:`solve` calls; the objective,
    rows and right-hand sides are fixed at construction.
    """

    def __init__(self, c, A, relations, b, lower, upper):
        if highspy is None:  # pragma: no cover
            raise ImportError("highspy is required for HighsSession")
        A = sp.csc_matrix(A)
        self.n = A.shape[1]
        self.c = np.asarray(c, dtype=float)
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        rlo, rhi = _row_bounds(np.asarray(relations), np.asarray(b, dtype=float))
        inf = highspy.kHighsInf
        lp = highspy.HighsLp()
        lp.num_col_, lp.num_row_ = A.shape[1], A.shape[0]
        lp.col_cost_ = self.c
        lp.col_lower_ = np.where(np.isinf(self.lower), -inf, self.lower)
        lp.col_upper_ = np.where(np.isinf(self.upper), inf, self.upper)
        lp.row_lower_ = np.where(np.isinf(rlo), -inf, rlo)
        lp.row_upper_ = np.where(np.isinf(rhi), inf, rhi)
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = A.indptr.astype(np.int32)
        lp.a_matrix_.index_ = A.indices.astype(np.int32)
        lp.a_matrix_.value_ = A.data
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("solver", "simplex")
        h.setOptionValue("primal_feasibility_tolerance", FEAS_TOL)
        h.setOptionValue("dual_feasibility_tolerance", OPT_TOL)
        h.setOptionValue("random_seed", 0)
        h.setOptionValue("threads", 1)
        h.passModel(lp)
        self.h = h
        self._cur_lo = self.lower.copy()
        self._cur_hi = self.upper.copy()
        self.total_iterations = 0

    def _set_bounds(self, lower, upper) -> None:
        lower = self.lower if lower is None else np.asarray(lower, dtype=float)
        upper = self.upper if upper is None else np.asarray(upper, dtype=float)
        changed = np.flatnonzero((lower != self._cur_lo) | (upper != self._cur_hi))
        if changed.size:
            inf = highspy.kHighsInf
            lo = np.where(np.isinf(lower[changed]), -inf, lower[changed])
            hi = np.where(np.isinf(upper[changed]), inf, upper[changed])
            self.h.changeColsBounds(changed.size, changed.astype(np.int32), lo, hi)
            self._cur_lo[changed] = lower[changed]
            self._cur_hi[changed] = upper[changed]

    def _run(self, time_limit, max_iter):
        h = self.h
        h.setOptionValue("time_limit", float(time_limit) if time_limit is not None else highspy.kHighsInf)
        h.setOptionValue("simplex_iteration_limit", int(max_iter) if max_iter is not None else 2**31 - 1)
        h.run()
        return h.getModelStatus()

    def solve(self, lower=None, upper=None, *, time_limit=None, max_iter=None) -> LpOutcome:
        lower_arr = self.lower if lower is None else np.asarray(lower, dtype=float)
        upper_arr = self.upper if upper is None else np.asarray(upper, dtype=float)
        if np.any(lower_arr > upper_arr):
            return LpOutcome(LpStatus.INFEASIBLE, np.full(self.n, np.nan), np.nan, 0, "highs")
        self._set_bounds(lower_arr, upper_arr)
        MS = highspy.HighsModelStatus
        status = self._run(time_limit, max_iter)
        if status not in (MS.kOptimal, MS.kInfeasible, MS.kTimeLimit, MS.kIterationLimit):
            # ambiguous or numerically troubled: retry once from scratch without presolve
            self.h.clearSolver()
            self.h.setOptionValue("presolve", "off")
            status = self._run(time_limit, max_iter)
            self.h.setOptionValue("presolve", "choose")
        iters = int(self.h.getInfo().simplex_iteration_count)
        self.total_iterations += iters
        if status == MS.kOptimal:
            sol = self.h.getSolution()
            x = np.clip(np.asarray(sol.col_value, dtype=float), lower_arr, upper_arr)
            rc = np.asarray(sol.col_dual, dtype=float) if sol.dual_valid else None
            return LpOutcome(LpStatus.OPTIMAL, x, float(self.c @ x), iters, "highs", rc)
        nan = np.full(self.n, np.nan)
        if status == MS.kInfeasible:
            return LpOutcome(LpStatus.INFEASIBLE, nan, np.nan, iters, "highs")
        if status in (MS.kUnbounded, MS.kUnboundedOrInfeasible):
            return LpOutcome(LpStatus.UNBOUNDED if status == MS.kUnbounded else LpStatus.INFEASIBLE, nan, np.nan, iters, "highs")
        if status in (MS.kTimeLimit, MS.kIterationLimit):
            return LpOutcome(LpStatus.ITERATION_LIMIT, nan, np.nan, iters, "highs")
        return LpOutcome(LpStatus.NUMERICAL_ERROR, nan, np.nan, iters, "highs")


def highs_solve(c, A, relations, b, lower, upper, *, max_iter=None, time_limit=None) -> LpOutcome:
    """One-shot HiGHS dual simplex solve."""
    return HighsSession(c, A, relations, b, lower, upper).solve(time_limit=time_limit, max_iter=max_iter)


def linprog_solve(c, A, relations, b, lower, upper, *, max_iter=None, time_limit=None) -> LpOutcome:
    """HiGHS dual simplex via :func:`scipy.optimize.linprog`."""
    A = sp.csr_matrix(A)
    relations = np.asarray(relations)
    b = np.asarray(b, dtype=float)
    le, ge, eq = relations == "<=", relations == ">=", relations == "="
    if le.any() or ge.any():
        A_ub = sp.vstack([A[le], -A[ge]]).tocsr()
        b_ub = np.concatenate([b[le], -b[ge]])
    else:
        A_ub = b_ub = None
    A_eq, b_eq = (A[eq], b[eq]) if eq.any() else (None, None)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    options = {
        "primal_feasibility_tolerance": FEAS_TOL,
        "dual_feasibility_tolerance": OPT_TOL,
        "presolve": True,
    }
    if max_iter is not None:
        options["maxiter"] = int(max_iter)
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    n = len(c)
    if np.any(lower > upper):
        return LpOutcome(LpStatus.INFEASIBLE, np.full(n, np.nan), np.nan, 0, "linprog")
    bounds = np.column_stack([lower, upper])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs-ds", options=options)
    status = _LINPROG_STATUS.get(res.status, LpStatus.NUMERICAL_ERROR)
    if status is LpStatus.NUMERICAL_ERROR:
        options["presolve"] = False
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs-ds", options=options)
        status = _LINPROG_STATUS.get(res.status, LpStatus.NUMERICAL_ERROR)
    iterations = int(getattr(res, "nit", 0) or 0)
    if status is LpStatus.OPTIMAL:
        x = np.clip(np.asarray(res.x, dtype=float), lower, upper)
        return LpOutcome(status, x, float(np.dot(c, x)), iterations, "linprog")
    x = np.asarray(res.x, dtype=float) if res.x is not None else np.full(n, np.nan)
    return LpOutcome(status, x, np.nan, iterations, "linprog")
