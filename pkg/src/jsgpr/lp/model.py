"""Sparse linear model container shared by every formulation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from ..errors import InvertedBounds, ModelError, UnknownColumn

INF = math.inf
FEAS_TOL = 1e-9
OPT_TOL = 1e-9
INT_TOL = 1e-6

_RELATIONS = {"<=": "<=", "=<": "<=", "L": "<=", "=": "=", "==": "=", "E": "=", ">=": ">=", "=>": ">=", "G": ">="}


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"
    NUMERICAL_ERROR = "NumericalError"

    def __str__(self):
        return self.value


@dataclass
class LpOutcome:
    status: LpStatus
    x: np.ndarray
    objective: float
    iterations: int
    method: str = ""
    # column reduced costs at the optimum, when the back end reports them
    reduced_costs: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class LinearModel:
    """Minimization LP ``min c.x + offset  s.t.  rows, lower <= x <= upper``.

    Rows are stored sparsely as ``(columns, values)`` array pairs with
    duplicate columns merged. The CSR matrix view is rebuilt lazily after any
    structural change.
    """

    def __init__(self, name: str = ""):
        self.name = name
        self.names: list[str] = []
        self.lower: list[float] = []
        self.upper: list[float] = []
        self.obj: list[float] = []
        self.obj_offset = 0.0
        self.row_cols: list[np.ndarray] = []
        self.row_vals: list[np.ndarray] = []
        self.relations: list[str] = []
        self.rhs: list[float] = []
        self.row_names: list[str] = []
        self._matrix = None

    @property
    def num_cols(self) -> int:
        return len(self.names)

    @property
    def num_rows(self) -> int:
        return len(self.rhs)

    def add_variable(self, name: str = "", lo: float = 0.0, hi: float = INF, obj: float = 0.0) -> int:
        lo, hi, obj = float(lo), float(hi), float(obj)
        if lo > hi:
            raise InvertedBounds(f"variable {name!r}: lower {lo} > upper {hi}")
        if math.isnan(lo) or math.isnan(hi) or not math.isfinite(obj):
            raise ModelError(f"variable {name!r}: non-finite data")
        self.names.append(name or f"x{len(self.names)}")
        self.lower.append(lo)
        self.upper.append(hi)
        self.obj.append(obj)
        self._matrix = None
        return len(self.names) - 1

    def add_variables(self, names, lo, hi, obj) -> range:
        """Bulk form of :meth:`add_variable` over equal-length sequences."""
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (len(names),))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (len(names),))
        obj = np.broadcast_to(np.asarray(obj, dtype=float), (len(names),))
        if np.any(lo > hi):
            raise InvertedBounds("lower bound above upper bound")
        if not np.all(np.isfinite(obj)):
            raise ModelError("non-finite objective coefficient")
        start = self.num_cols
        self.names.extend(names)
        self.lower.extend(lo.tolist())
        self.upper.extend(hi.tolist())
        self.obj.extend(obj.tolist())
        self._matrix = None
        return range(start, self.num_cols)

    def add_row_arrays(self, cols: np.ndarray, vals: np.ndarray, relation: str, rhs: float, name: str = "") -> int:
        """Fast path for builders: ``cols`` must be distinct valid indices."""
        rel = _RELATIONS[relation]
        cols = np.asarray(cols, dtype=np.int64)
        order = np.argsort(cols, kind="stable")
        self.row_cols.append(cols[order])
        self.row_vals.append(np.asarray(vals, dtype=float)[order])
        self.relations.append(rel)
        self.rhs.append(float(rhs))
        self.row_names.append(name or f"r{len(self.rhs) - 1}")
        self._matrix = None
        return len(self.rhs) - 1

    def add_constraint(
        self,
        row: Mapping[int, float] | Iterable[tuple[int, float]],
        relation: str,
        rhs: float,
        name: str = "",
    ) -> int:
        rel = _RELATIONS.get(relation)
        if rel is None:
            raise ModelError(f"unknown relation {relation!r}")
        items = row.items() if isinstance(row, Mapping) else row
        merged: dict[int, float] = {}
        for col, coeff in items:
            col = int(col)
            if not 0 <= col < self.num_cols:
                raise UnknownColumn(f"column {col} not in a {self.num_cols}-column model")
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ModelError("non-finite coefficient")
            merged[col] = merged.get(col, 0.0) + coeff
        rhs = float(rhs)
        if not math.isfinite(rhs):
            raise ModelError("non-finite right-hand side")
        cols = np.fromiter(merged.keys(), dtype=np.int64, count=len(merged))
        vals = np.fromiter(merged.values(), dtype=float, count=len(merged))
        order = np.argsort(cols, kind="stable")
        self.row_cols.append(cols[order])
        self.row_vals.append(vals[order])
        self.relations.append(rel)
        self.rhs.append(rhs)
        self.row_names.append(name or f"r{len(self.rhs) - 1}")
        self._matrix = None
        return len(self.rhs) - 1

    def row(self, r: int) -> dict[int, float]:
        return dict(zip(self.row_cols[r].tolist(), self.row_vals[r].tolist()))

    def set_bounds(self, col: int, lo: float, hi: float) -> None:
        if lo > hi:
            raise InvertedBounds(f"column {col}: lower {lo} > upper {hi}")
        self.lower[col], self.upper[col] = float(lo), float(hi)

    def set_objective(self, col: int, coeff: float) -> None:
        self.obj[col] = float(coeff)

    def copy(self) -> "LinearModel":
        other = LinearModel(self.name)
        other.names = list(self.names)
        other.lower = list(self.lower)
        other.upper = list(self.upper)
        other.obj = list(self.obj)
        other.obj_offset = self.obj_offset
        # row arrays are never mutated in place, so sharing them is safe
        other.row_cols = list(self.row_cols)
        other.row_vals = list(self.row_vals)
        other.relations = list(self.relations)
        other.rhs = list(self.rhs)
        other.row_names = list(self.row_names)
        other._matrix = self._matrix
        return other

    def matrix(self) -> sp.csr_matrix:
        if self._matrix is None or self._matrix.shape != (self.num_rows, self.num_cols):
            lengths = np.fromiter((len(c) for c in self.row_cols), dtype=np.int64, count=self.num_rows)
            indptr = np.concatenate(([0], np.cumsum(lengths)))
            indices = np.concatenate(self.row_cols) if self.row_cols else np.zeros(0, dtype=np.int64)
            data = np.concatenate(self.row_vals) if self.row_vals else np.zeros(0)
            self._matrix = sp.csr_matrix((data, indices, indptr), shape=(self.num_rows, self.num_cols))
        return self._matrix

    def arrays(self):
        """``(c, A, relations, b, lower, upper)`` as numpy objects."""
        return (
            np.asarray(self.obj, dtype=float),
            self.matrix(),
            np.asarray(self.relations),
            np.asarray(self.rhs, dtype=float),
            np.asarray(self.lower, dtype=float),
            np.asarray(self.upper, dtype=float),
        )

    def objective_value(self, x) -> float:
        return float(np.dot(self.obj, x)) + self.obj_offset

    def residuals(self, x, lower=None, upper=None) -> np.ndarray:
        """Per-row violation (>= 0) of ``x``, followed by bound violations."""
        x = np.asarray(x, dtype=float)
        act = self.matrix() @ x
        b = np.asarray(self.rhs)
        rel = np.asarray(self.relations)
        viol = np.where(rel == "<=", np.maximum(act - b, 0), np.where(rel == ">=", np.maximum(b - act, 0), np.abs(act - b)))
        lo = np.asarray(self.lower if lower is None else lower)
        hi = np.asarray(self.upper if upper is None else upper)
        bnd = np.maximum(np.maximum(lo - x, 0), np.maximum(x - hi, 0))
        return np.concatenate([viol, bnd])

    def __repr__(self):
        return f"LinearModel({self.name!r}, cols={self.num_cols}, rows={self.num_rows})"
