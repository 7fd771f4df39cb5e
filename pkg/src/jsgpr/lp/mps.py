"""MPS export for cross-checking models with external solvers.

``write_mps(model, fixed=True)`` emits classic fixed-column MPS with
generated 8-character names (``C0000001``, ``R0000001``) and numbers
squeezed into 12 characters. ``fixed=False`` writes free MPS with the
model's own names and full float precision; :func:`read_mps` reads either
form back for the round-trip tests.
"""
from __future__ import annotations

import math
from pathlib import Path

from .model import LinearModel

_REL_CODE = {"<=": "L", ">=": "G", "=": "E"}
_CODE_REL = {v: k for k, v in _REL_CODE.items()}


def _num12(v: float) -> str:
    for digits in range(12, 0, -1):
        s = f"{v:.{digits}g}"
        if len(s) <= 12:
            return s
    raise ValueError(f"cannot fit {v} in 12 characters")


def _fixed_line(f1="", f2="", f3="", f4="", f5="", f6="") -> str:
    line = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}"
    if f5:
        line += f"   {f5:<8}  {f6:>12}"
    return line.rstrip()


def _free_name(name: str) -> str:
    return "".join(ch if not ch.isspace() else "_" for ch in name) or "_"


def write_mps(model: LinearModel, path: str | Path | None = None, *, fixed: bool = True, integer_columns=()) -> str:
    if fixed:
        cname = [f"C{k + 1:07d}" for k in range(model.num_cols)]
        rname = [f"R{k + 1:07d}" for k in range(model.num_rows)]
        num = _num12
        obj_name = "COST"
    else:
        cname = [_free_name(n) for n in model.names]
        rname = [_free_name(n) for n in model.row_names]
        num = repr
        obj_name = "OBJ"

    def line(*fields):
        if fixed:
            return _fixed_line(*fields)
        return " " + " ".join(f for f in fields if f)

    out = [f"NAME          {_free_name(model.name or 'MODEL')}", "ROWS", line("N", obj_name)]
    for r in range(model.num_rows):
        out.append(line(_REL_CODE[model.relations[r]], rname[r]))

    col_entries: list[list[tuple[str, float]]] = [[] for _ in range(model.num_cols)]
    for j, c in enumerate(model.obj):
        if c != 0.0:
            col_entries[j].append((obj_name, c))
    for r in range(model.num_rows):
        for j, v in zip(model.row_cols[r].tolist(), model.row_vals[r].tolist()):
            col_entries[j].append((rname[r], v))

    integer = set(integer_columns)
    in_int = False
    out.append("COLUMNS")
    for j in range(model.num_cols):
        if (j in integer) != in_int:
            in_int = not in_int
            marker = "'INTORG'" if in_int else "'INTEND'"
            out.append(line("", "MARKER", "'MARKER'", "", marker))
        entries = col_entries[j] or [(obj_name, 0.0)]
        for k in range(0, len(entries), 2):
            f3, v3 = entries[k]
            if k + 1 < len(entries):
                f5, v5 = entries[k + 1]
                out.append(line("", cname[j], f3, num(v3), f5, num(v5)))
            else:
                out.append(line("", cname[j], f3, num(v3)))
    if in_int:
        out.append(line("", "MARKER", "'MARKER'", "", "'INTEND'"))

    out.append("RHS")
    if model.obj_offset:
        out.append(line("", "RHS", obj_name, num(-model.obj_offset)))
    for r in range(model.num_rows):
        if model.rhs[r] != 0.0:
            out.append(line("", "RHS", rname[r], num(model.rhs[r])))

    out.append("BOUNDS")
    for j in range(model.num_cols):
        lo, hi = model.lower[j], model.upper[j]
        if lo == hi:
            out.append(line("FX", "BND", cname[j], num(lo)))
        elif lo == -math.inf and hi == math.inf:
            out.append(line("FR", "BND", cname[j]))
        else:
            if lo == -math.inf:
                out.append(line("MI", "BND", cname[j]))
            elif lo != 0.0:
                out.append(line("LO", "BND", cname[j], num(lo)))
            if hi != math.inf:
                out.append(line("UP", "BND", cname[j], num(hi)))
    out.append("ENDATA")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def read_mps(text: str) -> tuple[LinearModel, list[int]]:
    """Parse MPS text (fixed or free, names without blanks)."""
    model = LinearModel()
    section = None
    obj_row = None
    rows: dict[str, int] = {}
    row_order: list[tuple[str, str]] = []
    cols: dict[str, int] = {}
    entries: dict[str, dict[int, float]] = {}
    rhs: dict[str, float] = {}
    integer: list[int] = []
    in_int = False
    bounds: list[tuple[str, str, float]] = []
    col_obj: dict[int, float] = {}
    col_names: list[str] = []
    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            head = raw.split()
            section = head[0]
            if section == "NAME" and len(head) > 1:
                model.name = head[1]
            continue
        tok = raw.split()
        if section == "ROWS":
            code, name = tok
            if code == "N":
                obj_row = obj_row or name
            else:
                rows[name] = len(row_order)
                row_order.append((name, _CODE_REL[code]))
                entries[name] = {}
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1] == "'MARKER'":
                in_int = tok[2] == "'INTORG'"
                continue
            cname = tok[0]
            if cname not in cols:
                cols[cname] = len(col_names)
                col_names.append(cname)
                if in_int:
                    integer.append(cols[cname])
            j = cols[cname]
            for k in range(1, len(tok) - 1, 2):
                rname, val = tok[k], float(tok[k + 1])
                if rname == obj_row:
                    col_obj[j] = col_obj.get(j, 0.0) + val
                else:
                    entries[rname][j] = entries[rname].get(j, 0.0) + val
        elif section == "RHS":
            for k in range(1, len(tok) - 1, 2):
                rhs[tok[k]] = float(tok[k + 1])
        elif section == "BOUNDS":
            kind, cname = tok[0], tok[2]
            val = float(tok[3]) if len(tok) > 3 else 0.0
            bounds.append((kind, cname, val))
    for j, name in enumerate(col_names):
        model.add_variable(name, 0.0, math.inf, col_obj.get(j, 0.0))
    for kind, cname, val in bounds:
        j = cols[cname]
        lo, hi = model.lower[j], model.upper[j]
        if kind == "UP":
            hi = val
        elif kind == "LO":
            lo = val
        elif kind == "FX":
            lo = hi = val
        elif kind == "FR":
            lo, hi = -math.inf, math.inf
        elif kind == "MI":
            lo = -math.inf
        elif kind == "PL":
            hi = math.inf
        elif kind == "BV":
            lo, hi = 0.0, 1.0
        model.set_bounds(j, lo, hi)
    for name, rel in row_order:
        model.add_constraint(entries[name], rel, rhs.get(name, 0.0), name)
    if obj_row in rhs:
        model.obj_offset = -rhs[obj_row]
    return model, integer
