"""Two-phase bounded-variable revised simplex.

Every row ``a.x (<=, =, >=) b`` becomes ``a.x + s = b`` with a slack whose
bounds encode the relation. Nonbasic variables sit at a finite bound (free
ones at zero); rows whose starting slack would violate its bounds get an
artificial column, and phase one minimizes the sum of artificials. The basis
inverse is kept as a dense matrix updated by product-form pivots and
recomputed from scratch every ``refactor_every`` pivots.

Pricing is Dantzig's largest reduced cost. After ``bland_after`` consecutive
degenerate pivots the solver switches to Bland's smallest-index rule until
the next pivot that makes progress, which rules out cycling.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .model import FEAS_TOL, OPT_TOL, LpOutcome, LpStatus

_AT_LOWER, _AT_UPPER, _FREE, _BASIC = 0, 1, 2, 3
_PIVOT_TOL = 1e-11


class _Tableau:
    def __init__(self, c, A, rel, b, lower, upper, feas_tol, opt_tol, refactor_every, bland_after):
        m, n = A.shape
        self.m, self.n = m, n
        self.feas_tol, self.opt_tol = feas_tol, opt_tol
        self.refactor_every, self.bland_after = refactor_every, bland_after
        self.A = sp.csc_matrix(A)
        self.b = np.asarray(b, dtype=float)

        slack_lo = np.where(rel == ">=", -np.inf, 0.0)
        slack_hi = np.where(rel == "<=", np.inf, 0.0)

        x = np.zeros(n)
        state = np.empty(n, dtype=np.int8)
        finite_lo, finite_hi = np.isfinite(lower), np.isfinite(upper)
        x[finite_lo] = lower[finite_lo]
        only_hi = ~finite_lo & finite_hi
        x[only_hi] = upper[only_hi]
        state[:] = _FREE
        state[finite_lo] = _AT_LOWER
        state[only_hi] = _AT_UPPER

        resid = self.b - self.A @ x
        tol = feas_tol * max(1.0, float(np.max(np.abs(self.b), initial=0.0)))
        slack_ok = (resid >= slack_lo - tol) & (resid <= slack_hi + tol)
        art_rows = np.flatnonzero(~slack_ok)
        target = np.clip(resid, slack_lo, slack_hi)
        sign = np.sign(resid[art_rows] - target[art_rows])

        k = len(art_rows)
        self.k = k
        self.art_rows = art_rows
        self.art_sign = sign
        N = n + m + k
        self.N = N
        self.lo = np.concatenate([lower, slack_lo, np.zeros(k)])
        self.hi = np.concatenate([upper, slack_hi, np.full(k, np.inf)])
        self.x = np.concatenate([x, np.where(slack_ok, resid, target), np.abs(resid[art_rows] - target[art_rows])])
        slack_state = np.where(slack_ok, _BASIC, np.where(target == slack_lo, _AT_LOWER, _AT_UPPER))
        self.state = np.concatenate([state, slack_state.astype(np.int8), np.full(k, _BASIC, dtype=np.int8)])

        basis = np.arange(n, n + m)
        basis[art_rows] = n + m + np.arange(k)
        self.basis = basis
        self.binv = np.eye(m)
        self.binv[art_rows, art_rows] = sign
        self.iterations = 0
        self.since_refactor = 0
        self.degenerate_run = 0
        self.bland = False

    # column access over the extended matrix [A | I | art]
    def column(self, j: int) -> np.ndarray:
        if j < self.n:
            out = np.zeros(self.m)
            lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
            out[self.A.indices[lo:hi]] = self.A.data[lo:hi]
            return out
        out = np.zeros(self.m)
        if j < self.n + self.m:
            out[j - self.n] = 1.0
        else:
            a = j - self.n - self.m
            out[self.art_rows[a]] = self.art_sign[a]
        return out

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        y = cost[self.basis] @ self.binv
        d = cost.copy()
        d[: self.n] -= self.A.T @ y
        d[self.n : self.n + self.m] -= y
        d[self.n + self.m :] -= self.art_sign * y[self.art_rows]
        return d

    def refactor(self) -> None:
        B = np.column_stack([self.column(j) for j in self.basis]) if self.m else np.zeros((0, 0))
        self.binv = np.linalg.inv(B) if self.m else B
        self.since_refactor = 0
        self.recompute_basics()

    def recompute_basics(self) -> None:
        if self.m == 0:
            return
        xn = self.x.copy()
        xn[self.basis] = 0.0
        act = self.A @ xn[: self.n] + xn[self.n : self.n + self.m]
        if self.k:
            np.add.at(act, self.art_rows, self.art_sign * xn[self.n + self.m :])
        self.x[self.basis] = self.binv @ (self.b - act)

    def run(self, cost: np.ndarray, max_iter: int) -> LpStatus:
        opt_tol = self.opt_tol
        while True:
            if self.iterations >= max_iter:
                return LpStatus.ITERATION_LIMIT
            if self.since_refactor >= self.refactor_every:
                self.refactor()
            d = self.reduced_costs(cost)
            st = self.state
            movable = self.hi > self.lo
            inc = ((st == _AT_LOWER) | (st == _FREE)) & (d < -opt_tol) & movable
            dec = ((st == _AT_UPPER) | (st == _FREE)) & (d > opt_tol) & movable
            eligible = np.flatnonzero(inc | dec)
            if eligible.size == 0:
                return LpStatus.OPTIMAL
            if self.bland:
                q = int(eligible[0])
            else:
                q = int(eligible[np.argmax(np.abs(d[eligible]))])
            s = 1.0 if d[q] < 0 else -1.0
            alpha = self.binv @ self.column(q)
            delta = -s * alpha

            xb = self.x[self.basis]
            lob, hib = self.lo[self.basis], self.hi[self.basis]
            ratios = np.full(self.m, np.inf)
            down = delta < -_PIVOT_TOL
            up = delta > _PIVOT_TOL
            with np.errstate(invalid="ignore", divide="ignore"):
                ratios[down] = (xb[down] - lob[down]) / -delta[down]
                ratios[up] = (hib[up] - xb[up]) / delta[up]
            ratios = np.where(np.isnan(ratios), np.inf, np.maximum(ratios, 0.0))
            t_flip = self.hi[q] - self.lo[q]
            t_row = float(ratios.min()) if self.m else np.inf
            if t_flip <= t_row:
                t, r = t_flip, -1
            else:
                t = t_row
                ties = np.flatnonzero(ratios <= t_row + 1e-12 * max(1.0, abs(t_row)))
                if self.bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(delta[ties]))])
            if not np.isfinite(t):
                return LpStatus.UNBOUNDED

            self.iterations += 1
            if t > 1e-12:
                self.degenerate_run = 0
                self.bland = False
            else:
                self.degenerate_run += 1
                if self.degenerate_run >= self.bland_after:
                    self.bland = True

            self.x[self.basis] = xb + delta * t
            self.x[q] += s * t
            if r < 0:
                self.x[q] = self.hi[q] if s > 0 else self.lo[q]
                self.state[q] = _AT_UPPER if s > 0 else _AT_LOWER
                continue

            leaving = self.basis[r]
            if delta[r] < 0:
                self.x[leaving] = self.lo[leaving]
                self.state[leaving] = _AT_LOWER
            else:
                self.x[leaving] = self.hi[leaving]
                self.state[leaving] = _AT_UPPER
            self.basis[r] = q
            self.state[q] = _BASIC

            pivot = alpha[r]
            row_r = self.binv[r] / pivot
            self.binv -= np.outer(alpha, row_r)
            self.binv[r] = row_r
            self.since_refactor += 1


def revised_simplex(
    c,
    A,
    relations,
    b,
    lower,
    upper,
    *,
    max_iter: int | None = None,
    feas_tol: float = FEAS_TOL,
    opt_tol: float = OPT_TOL,
    refactor_every: int = 100,
    bland_after: int = 1000,
) -> LpOutcome:
    """Solve ``min c.x`` over ``A x (rel) b, lower <= x <= upper``."""
    c = np.asarray(c, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    b = np.asarray(b, dtype=float)
    relations = np.asarray(relations)
    A = sp.csr_matrix(A)
    n = len(c)
    if np.any(lower > upper):
        return LpOutcome(LpStatus.INFEASIBLE, np.full(n, np.nan), np.nan, 0, "simplex")

    # drop empty rows after checking them directly
    nnz = np.diff(A.indptr)
    empty = nnz == 0
    if empty.any():
        be, re = b[empty], relations[empty]
        bad = ((re == "<=") & (be < -feas_tol)) | ((re == ">=") & (be > feas_tol)) | ((re == "=") & (np.abs(be) > feas_tol))
        if bad.any():
            return LpOutcome(LpStatus.INFEASIBLE, np.full(n, np.nan), np.nan, 0, "simplex")
        keep = ~empty
        A, b, relations = A[keep], b[keep], relations[keep]

    m = A.shape[0]
    if max_iter is None:
        max_iter = 50 * (m + n)
    tab = _Tableau(c, A, relations, b, lower, upper, feas_tol, opt_tol, refactor_every, bland_after)

    if tab.k:
        cost1 = np.zeros(tab.N)
        cost1[n + m :] = 1.0
        status = tab.run(cost1, max_iter)
        tab.refactor()
        if status is LpStatus.ITERATION_LIMIT:
            return LpOutcome(status, tab.x[:n].copy(), np.nan, tab.iterations, "simplex")
        infeas = float(np.sum(np.abs(tab.x[n + m :])))
        if infeas > feas_tol * max(1.0, float(np.max(np.abs(b), initial=0.0))):
            return LpOutcome(LpStatus.INFEASIBLE, tab.x[:n].copy(), np.nan, tab.iterations, "simplex")
        tab.hi[n + m :] = 0.0
        art = np.arange(n + m, tab.N)
        nonbasic_art = art[tab.state[art] != _BASIC]
        tab.x[nonbasic_art] = 0.0
        tab.state[nonbasic_art] = _AT_LOWER

    cost2 = np.zeros(tab.N)
    cost2[:n] = c
    status = tab.run(cost2, max_iter)
    tab.refactor()
    x = tab.x[:n].copy()
    if status is LpStatus.OPTIMAL:
        # snap structurals that drifted past a bound by rounding noise
        x = np.clip(x, lower, upper)
    objective = float(c @ x) if status is LpStatus.OPTIMAL else np.nan
    return LpOutcome(status, x, objective, tab.iterations, "simplex")
