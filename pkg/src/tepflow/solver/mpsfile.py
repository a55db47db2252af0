"""Fixed-field MPS export (write only).

Fixed-format MPS caps names at 8 characters, so rows and columns are
renamed R0000001.../C0000001... and the mapping back to the real names is
emitted as comment lines at the top of the file. Values wider than the
12-character value field fall back to progressively shorter scientific
forms.
"""

from __future__ import annotations

from ..problem import MilpProblem

OBJ = "COST"
_SENSE_TYPE = {"<=": "L", ">=": "G", "==": "E"}


def _fit12(v: float) -> str:
    s = repr(float(v))
    if len(s) <= 12:
        return s
    for fmt in ("%.6g", "%.6e", "%.5e", "%.4e"):
        s = fmt % v
        if len(s) <= 12:
            return s
    return "%.3e" % v


def _line(f1: str = "", f2: str = "", f3: str = "", f4: str = "", f5: str = "", f6: str = "") -> str:
    buf = [" "] * 61
    for text, start in ((f1, 1), (f2, 4), (f3, 14), (f4, 24), (f5, 39), (f6, 49)):
        for i, ch in enumerate(text):
            buf[start + i] = ch
    return "".join(buf).rstrip()


def write_mps(p: MilpProblem, path: str) -> None:
    """Write the problem in fixed-field MPS with an N objective row."""
    rows = p.sorted_rows()
    row_id = {r.name: f"R{k:07d}" for k, r in enumerate(rows, start=1)}
    col_id = {c.name: f"C{k:07d}" for k, c in enumerate(p.columns, start=1)}

    lines = ["* tepflow export", "* name mapping:", f"*   {OBJ} = objective"]
    for r in rows:
        lines.append(f"*   {row_id[r.name]} = {r.name}")
    for c in p.columns:
        lines.append(f"*   {col_id[c.name]} = {c.name}")

    lines.append("NAME" + " " * 10 + p.name[:8].upper().replace(" ", "_"))
    lines.append("ROWS")
    lines.append(_line(f1="N", f2=OBJ))
    for r in rows:
        lines.append(_line(f1=_SENSE_TYPE[r.sense], f2=row_id[r.name]))

    # column-major entries, rows in emission order within each column
    entries: dict[int, list[tuple[str, float]]] = {j: [] for j in range(len(p.columns))}
    for r in rows:
        rid = row_id[r.name]
        for j, a in r.coeffs:
            entries[j].append((rid, a))

    lines.append("COLUMNS")
    marker = 0
    in_int = False
    for j, c in enumerate(p.columns):
        if c.is_binary != in_int:
            marker += 1
            kind = "'INTORG'" if c.is_binary else "'INTEND'"
            lines.append(_line(f2=f"M{marker:07d}", f3="'MARKER'", f5=kind))
            in_int = c.is_binary
        pairs = list(entries[j])
        if c.cost != 0.0:
            pairs.insert(0, (OBJ, c.cost))
        if not pairs:
            # a column must appear at least once to exist
            pairs = [(OBJ, 0.0)]
        cid = col_id[c.name]
        for k in range(0, len(pairs), 2):
            chunk = pairs[k : k + 2]
            if len(chunk) == 2:
                (r1, a1), (r2, a2) = chunk
                lines.append(_line(f2=cid, f3=r1, f4=_fit12(a1), f5=r2, f6=_fit12(a2)))
            else:
                (r1, a1) = chunk[0]
                lines.append(_line(f2=cid, f3=r1, f4=_fit12(a1)))
    if in_int:
        marker += 1
        lines.append(_line(f2=f"M{marker:07d}", f3="'MARKER'", f5="'INTEND'"))

    lines.append("RHS")
    rhs_pairs = [(row_id[r.name], r.rhs) for r in rows if r.rhs != 0.0]
    for k in range(0, len(rhs_pairs), 2):
        chunk = rhs_pairs[k : k + 2]
        if len(chunk) == 2:
            (r1, b1), (r2, b2) = chunk
            lines.append(_line(f2="RHS", f3=r1, f4=_fit12(b1), f5=r2, f6=_fit12(b2)))
        else:
            (r1, b1) = chunk[0]
            lines.append(_line(f2="RHS", f3=r1, f4=_fit12(b1)))

    lines.append("BOUNDS")
    inf = float("inf")
    for c in p.columns:
        cid = col_id[c.name]
        if c.is_binary:
            lines.append(_line(f1="BV", f2="BND", f3=cid))
            continue
        lo, hi = c.lower, c.upper
        if lo == hi:
            lines.append(_line(f1="FX", f2="BND", f3=cid, f4=_fit12(lo)))
            continue
        if lo == -inf and hi == inf:
            lines.append(_line(f1="FR", f2="BND", f3=cid))
            continue
        if lo == -inf:
            lines.append(_line(f1="MI", f2="BND", f3=cid))
        elif lo != 0.0:
            lines.append(_line(f1="LO", f2="BND", f3=cid, f4=_fit12(lo)))
        if hi != inf:
            lines.append(_line(f1="UP", f2="BND", f3=cid, f4=_fit12(hi)))

    lines.append("ENDATA")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
