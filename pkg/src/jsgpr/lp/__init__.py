"""Linear models and LP solvers.

``solve_lp`` dispatches to the in-house revised simplex for small models and
to HiGHS for large ones; ``method`` forces either. The automatic cut-over can
be moved with the ``JSGPR_SIMPLEX_MAX_SIZE`` environment variable (rows plus
columns).
"""
from __future__ import annotations

import os

import numpy as np

from .highs import HighsSession, highs_solve, linprog_solve
from .model import FEAS_TOL, INF, INT_TOL, OPT_TOL, LinearModel, LpOutcome, LpStatus
from .mps import read_mps, write_mps
from .simplex import revised_simplex

SIMPLEX_MAX_SIZE = int(os.environ.get("JSGPR_SIMPLEX_MAX_SIZE", "600"))


def choose_method(model: LinearModel) -> str:
    return "simplex" if model.num_rows + model.num_cols <= SIMPLEX_MAX_SIZE else "highs"


class LpSession:
    """Repeated solves of one model under changing column bounds.

    With the HiGHS back end the solver and its basis persist between calls,
    so each re-solve is a warm start; the in-house simplex and the
    ``linprog`` route always start cold.
    """

    def __init__(self, model: LinearModel, method: str = "auto"):
        self.model = model
        self.method = choose_method(model) if method == "auto" else method
        if self.method not in ("simplex", "highs", "linprog"):
            raise ValueError(f"unknown LP method {method!r}")
        self._arrays = model.arrays()
        self._highs = HighsSession(*self._arrays) if self.method == "highs" else None
        self.solves = 0

    def solve(self, lower=None, upper=None, *, max_iter=None, time_limit=None) -> LpOutcome:
        c, A, rel, b, lo, hi = self._arrays
        lo = lo if lower is None else np.asarray(lower, dtype=float)
        hi = hi if upper is None else np.asarray(upper, dtype=float)
        self.solves += 1
        if self.method == "highs":
            out = self._highs.solve(lo, hi, max_iter=max_iter, time_limit=time_limit)
        elif self.method == "linprog":
            out = linprog_solve(c, A, rel, b, lo, hi, max_iter=max_iter, time_limit=time_limit)
        else:
            out = revised_simplex(c, A, rel, b, lo, hi, max_iter=max_iter)
        if out.optimal:
            out.objective += self.model.obj_offset
        return out


def solve_lp(
    model: LinearModel,
    *,
    method: str = "auto",
    lower=None,
    upper=None,
    max_iter: int | None = None,
    time_limit: float | None = None,
) -> LpOutcome:
    """Solve ``model`` once, optionally overriding its column bounds.

    ``method`` is ``"simplex"`` (in-house), ``"highs"`` (highspy),
    ``"linprog"`` (HiGHS through SciPy) or ``"auto"``.
    """
    return LpSession(model, method).solve(lower, upper, max_iter=max_iter, time_limit=time_limit)


__all__ = [
    "FEAS_TOL",
    "INF",
    "INT_TOL",
    "OPT_TOL",
    "HighsSession",
    "LinearModel",
    "LpSession",
    "LpOutcome",
    "LpStatus",
    "choose_method",
    "highs_solve",
    "linprog_solve",
    "read_mps",
    "revised_simplex",
    "solve_lp",
    "write_mps",
]
