"""LP-format text export and a parser for the files this writer emits.

Characters that the format cannot carry in a name (':' terminates a row
label, '+'/'-' read as signs) are rewritten to '.' on write; that mapping
can collide only if two names differ solely in such characters, which the
builders never produce. Coefficients are written with repr so a
write/parse round trip is exact in every bit. The parser accepts exactly
the dialect written here, not arbitrary LP files.
"""

from __future__ import annotations

import re

from ..problem import MilpProblem

MAX_LINE = 230

INF = float("inf")


class LpParseError(Exception):
    def __init__(self, path: str, line_no: int, message: str) -> None:
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


_UNSAFE = re.compile(r"[^A-Za-z0-9_.]")


def sanitize(name: str) -> str:
    return _UNSAFE.sub(".", name)


def _num(v: float) -> str:
    return repr(float(v))


def _wrap(parts: list[str], indent: str) -> list[str]:
    lines: list[str] = []
    cur = ""
    for part in parts:
        if cur and len(cur) + len(part) + 1 > MAX_LINE:
            lines.append(cur)
            cur = ""
        cur = indent + part if not cur else cur + " " + part
    if cur:
        lines.append(cur)
    return lines


def _term_parts(coeffs, col_name) -> list[str]:
    parts = []
    for j, a in coeffs:
        sign = "+" if a >= 0 else "-"
        parts.append(f"{sign} {_num(abs(a))} {col_name[j]}")
    return parts


def write_lp(p: MilpProblem, path: str) -> None:
    """Write the problem as CPLEX-style LP text, rows sorted by name."""
    col_name = {j: sanitize(c.name) for j, c in enumerate(p.columns)}
    lines: list[str] = [r"\ tepflow export", "Minimize", " obj:"]

    obj_parts = []
    for j, c in enumerate(p.columns):
        if c.cost != 0.0:
            sign = "+" if c.cost >= 0 else "-"
            obj_parts.append(f"{sign} {_num(abs(c.cost))} {col_name[j]}")
    lines.extend(_wrap(obj_parts, indent="  "))

    lines.append("Subject To")
    relation = {"<=": "<=", ">=": ">=", "==": "="}
    for row in p.sorted_rows():
        parts = [f"{sanitize(row.name)}:"]
        parts.extend(_term_parts(row.coeffs, col_name))
        parts.append(f"{relation[row.sense]} {_num(row.rhs)}")
        lines.extend(_wrap(parts, indent=" "))

    lines.append("Bounds")
    for j, c in enumerate(p.columns):
        lo, hi, name = c.lower, c.upper, col_name[j]
        if lo == hi:
            lines.append(f" {name} = {_num(lo)}")
        elif lo == -INF and hi == INF:
            lines.append(f" {name} free")
        elif lo == -INF:
            lines.append(f" -inf <= {name} <= {_num(hi)}")
        elif hi == INF:
            if lo != 0.0:  # the default bound stays implicit
                lines.append(f" {_num(lo)} <= {name} <= +inf")
        else:
            lines.append(f" {_num(lo)} <= {name} <= {_num(hi)}")

    binaries = [col_name[j] for j, c in enumerate(p.columns) if c.is_binary]
    if binaries:
        lines.append("Binaries")
        lines.extend(_wrap(binaries, indent=" "))

    lines.append("End")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


_TOKEN = re.compile(
    r"(<=|>=|=|\+|-|:|"
    r"[0-9.][0-9.eE+\-]*|"
    r"[A-Za-z_][A-Za-z0-9_.]*)"
)

_SECTION_OF = {
    "minimize": "objective",
    "subject": "rows",
    "bounds": "bounds",
    "binaries": "binaries",
    "end": "end",
}


def _is_number(tok: str) -> bool:
    if tok == "inf":
        return True
    try:
        float(tok)
        return True
    except ValueError:
        return False


def _signed_value(tokens: list[str], path: str, line_no: int) -> float:
    sign = 1.0
    value = None
    for tok in tokens:
        if tok == "-":
            sign = -sign
        elif tok == "+":
            continue
        elif tok == "inf":
            value = sign * INF
        elif _is_number(tok):
            value = sign * float(tok)
        else:
            raise LpParseError(path, line_no, f"expected a number, got {tok!r}")
    if value is None:
        raise LpParseError(path, line_no, "expected a number")
    return value


def _linear_terms(tokens: list[str], path: str, line_no: int) -> list[tuple[str, float]]:
    terms: list[tuple[str, float]] = []
    i = 0
    while i < len(tokens):
        sign = 1.0
        while i < len(tokens) and tokens[i] in ("+", "-"):
            if tokens[i] == "-":
                sign = -sign
            i += 1
        if i >= len(tokens):
            break
        coef = 1.0
        if _is_number(tokens[i]):
            coef = float(tokens[i])
            i += 1
        if i >= len(tokens) or _is_number(tokens[i]):
            raise LpParseError(path, line_no, "coefficient without a variable")
        terms.append((tokens[i], sign * coef))
        i += 1
    return terms


def parse_lp(path: str) -> MilpProblem:
    """Read LP text produced by :func:`write_lp` back into a problem.

    Column order follows first appearance in the file, so it will not, in
    general, match the order of the problem that was written; everything
    else (costs, bounds, rows, integrality) round-trips exactly.
    """
    with open(path, encoding="ascii") as fh:
        raw_lines = fh.read().splitlines()

    section = None
    statements: list[tuple[str, list[str], int]] = []  # (section, tokens, line_no)
    current: list[str] | None = None
    bound_lines: list[tuple[list[str], int]] = []
    binary_names: list[str] = []

    for line_no, raw in enumerate(raw_lines, start=1):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        head = line.split()[0].lower()
        if head in _SECTION_OF:
            section = _SECTION_OF[head]
            current = None
            continue
        if section is None:
            raise LpParseError(path, line_no, "content before any section header")
        if section == "end":
            raise LpParseError(path, line_no, "content after End")
        tokens = _TOKEN.findall(line)
        if section == "bounds":
            bound_lines.append((tokens, line_no))
        elif section == "binaries":
            binary_names.extend(tokens)
        else:
            starts_statement = len(tokens) >= 2 and tokens[1] == ":"
            if starts_statement or current is None:
                current = list(tokens)
                statements.append((section, current, line_no))
            else:
                current.extend(tokens)

    bounds: dict[str, tuple[float, float]] = {}
    for tokens, line_no in bound_lines:
        _read_bound(tokens, bounds, path, line_no)

    cost: dict[str, float] = {}
    rows: list[tuple[str, list[tuple[str, float]], str, float, int]] = []
    order: list[str] = []
    seen: set[str] = set()

    def note(name: str) -> None:
        if name not in seen:
            seen.add(name)
            order.append(name)

    for sec, tokens, line_no in statements:
        if len(tokens) >= 2 and tokens[1] == ":":
            label, body = tokens[0], tokens[2:]
        else:
            label, body = "", tokens
        if sec == "objective":
            for name, coef in _linear_terms(body, path, line_no):
                cost[name] = cost.get(name, 0.0) + coef
                note(name)
        else:
            if not label:
                raise LpParseError(path, line_no, "constraint without a label")
            split_at = next((k for k, t in enumerate(body) if t in ("<=", ">=", "=")), None)
            if split_at is None:
                raise LpParseError(path, line_no, "constraint without a relation")
            terms = _linear_terms(body[:split_at], path, line_no)
            rhs = _signed_value(body[split_at + 1 :], path, line_no)
            sense = {"<=": "<=", ">=": ">=", "=": "=="}[body[split_at]]
            rows.append((label, terms, sense, rhs, line_no))
            for name, _ in terms:
                note(name)

    binary_set = set(binary_names)
    for name in list(bounds) + binary_names:
        note(name)

    p = MilpProblem()
    for name in order:
        lo, hi = bounds.get(name, (0.0, INF))
        if name in binary_set and name not in bounds:
            lo, hi = 0.0, 1.0
        p.add_column(name, lower=lo, upper=hi, cost=cost.get(name, 0.0), binary=name in binary_set)
    for label, terms, sense, rhs, line_no in rows:
        try:
            p.add_row(label, terms, sense, rhs)
        except (KeyError, ValueError) as exc:
            raise LpParseError(path, line_no, str(exc)) from exc
    return p


def _read_bound(
    tokens: list[str], bounds: dict[str, tuple[float, float]], path: str, line_no: int
) -> None:
    if not tokens:
        return
    if tokens[-1] == "free" and len(tokens) == 2:
        bounds[tokens[0]] = (-INF, INF)
        return
    if "=" in tokens and "<=" not in tokens and ">=" not in tokens:
        at = tokens.index("=")
        name = tokens[at - 1]
        value = _signed_value(tokens[at + 1 :], path, line_no)
        bounds[name] = (value, value)
        return
    splits = [k for k, t in enumerate(tokens) if t == "<="]
    if len(splits) == 2:
        lo = _signed_value(tokens[: splits[0]], path, line_no)
        name_part = tokens[splits[0] + 1 : splits[1]]
        hi = _signed_value(tokens[splits[1] + 1 :], path, line_no)
        if len(name_part) != 1:
            raise LpParseError(path, line_no, "cannot identify the bounded variable")
        bounds[name_part[0]] = (lo, hi)
        return
    raise LpParseError(path, line_no, f"unrecognized bound: {' '.join(tokens)}")
