"""Network data model: typed entities, validation, zone detection and file IO.

Networks are immutable value objects. Loading accepts either a directory with
the CSV set (buses, lines, generators, snapshots, load, availability and an
optional co2 file) or a single JSON document holding the same content.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

EXISTING = "existing"
CANDIDATE = "candidate"

CSV_FILES = (
    "buses.csv",
    "lines.csv",
    "generators.csv",
    "snapshots.csv",
    "load.csv",
    "availability.csv",
)


class NetworkError(Exception):
    """Base class for network data failures."""


class MissingFile(NetworkError):
    """A required input file is absent."""

    def __init__(self, path: str) -> None:
        super().__init__(f"missing input file: {path}")
        self.path = str(path)


class ParseError(NetworkError):
    """A cell could not be parsed; reports file, row and field."""

    def __init__(self, path: str, row: int, field: str, message: str) -> None:
        super().__init__(f"{path}:{row}: field {field!r}: {message}")
        self.path = str(path)
        self.row = row
        self.field = field


class ValidationError(NetworkError):
    """A record violates a structural rule; reports the offending entity."""

    def __init__(self, entity: str, rule: str) -> None:
        super().__init__(f"{entity}: {rule}")
        self.entity = entity
        self.rule = rule


@dataclass(frozen=True)
class Bus:
    """Network node. ``load`` holds one MW value per snapshot."""

    id: str
    load: tuple[float, ...]
    zone_hint: str | None = None


@dataclass(frozen=True)
class Line:
    """Existing or candidate branch between two buses."""

    id: str
    from_bus: str
    to_bus: str
    x: float  # series reactance, per unit
    capacity: float  # thermal limit, MW
    kind: str = EXISTING
    capital_cost: float = 0.0  # annualised, currency/a; candidates only
    corridor: str | None = None  # groups parallel candidates

    @property
    def is_candidate(self) -> bool:
        return self.kind == CANDIDATE


@dataclass(frozen=True)
class Generator:
    """Dispatchable source with expandable capacity.

    ``availability`` is the per-snapshot fraction of installed capacity that
    can be dispatched (1.0 for firm plant, a profile for renewables).
    """

    id: str
    bus: str
    marginal_cost: float  # currency/MWh
    capital_cost: float = 0.0  # currency/MW/a
    p_nom_max: float = math.inf  # MW
    availability: tuple[float, ...] = ()
    emission_rate: float = 0.0  # tCO2/MWh


@dataclass(frozen=True)
class Snapshot:
    """Representative operating period with its weight in hours."""

    index: int
    weight: float


@dataclass(frozen=True)
class SynchronousZone:
    """Connected component of the existing grid; angles are referenced to
    ``slack_bus``, the lexicographically smallest bus id of the zone."""

    id: int
    buses: frozenset[str]
    slack_bus: str


@dataclass(frozen=True)
class Network:
    """Immutable bundle of all entities plus an optional CO2 budget (t/a)."""

    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]
    snapshots: tuple[Snapshot, ...]
    co2_budget: float | None = None

    @cached_property
    def bus_index(self) -> dict[str, int]:
        return {b.id: k for k, b in enumerate(self.buses)}

    @cached_property
    def line_by_id(self) -> dict[str, Line]:
        return {l.id: l for l in self.lines}

    @property
    def existing_lines(self) -> tuple[Line, ...]:
        return tuple(l for l in self.lines if not l.is_candidate)

    @property
    def candidate_lines(self) -> tuple[Line, ...]:
        return tuple(l for l in self.lines if l.is_candidate)

    @property
    def n_snapshots(self) -> int:
        return len(self.snapshots)

    @cached_property
    def load_matrix(self) -> np.ndarray:
        """Bus x snapshot demand in MW."""
        return np.array([b.load for b in self.buses], dtype=float).reshape(
            len(self.buses), len(self.snapshots)
        )


def _parse_float(path: str, row: int, field: str, raw: str) -> float:
    raw = raw.strip()
    if raw == "" or raw.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(raw)
    except ValueError:
        raise ParseError(path, row, field, f"not a number: {raw!r}") from None


def _parse_int(path: str, row: int, field: str, raw: str) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise ParseError(path, row, field, f"not an integer: {raw!r}") from None


def _read_rows(path: Path, required: Sequence[str]) -> list[dict[str, str]]:
    if not path.exists():
        raise MissingFile(str(path))
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise ParseError(str(path), 1, col, "missing column")
        return [row for row in reader]


def _read_profile_csv(path: Path, key_field: str, n: int) -> dict[str, tuple[float, ...]]:
    """Read a wide entity x snapshot table; returns id -> value tuple."""
    if not path.exists():
        raise MissingFile(str(path))
    out: dict[str, tuple[float, ...]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(str(path), 1, key_field, "empty file") from None
        if len(header) - 1 != n:
            raise ParseError(
                str(path), 1, key_field, f"expected {n} snapshot columns, found {len(header) - 1}"
            )
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            key = row[0].strip()
            values = tuple(
                _parse_float(str(path), rownum, header[k + 1], row[k + 1]) for k in range(n)
            )
            out[key] = values
    return out


def _expand_corridor(rows: Iterable[dict], path: str) -> list[dict]:
    """Expand candidate rows with multiplicity k > 1 into k parallel lines."""
    out = []
    for rownum, row in rows:
        raw_mult = (row.get("multiplicity") or "1").strip() or "1"
        mult = _parse_int(path, rownum, "multiplicity", raw_mult)
        if mult < 1:
            raise ValidationError(f"line {row['id']}", "multiplicity must be >= 1")
        if mult == 1:
            out.append((rownum, row))
            continue
        if (row.get("kind") or EXISTING).strip() != CANDIDATE:
            raise ValidationError(f"line {row['id']}", "multiplicity > 1 requires kind=candidate")
        base = row["id"].strip()
        for k in range(1, mult + 1):
            dup = dict(row)
            dup["id"] = f"{base}_{k}"
            dup["corridor"] = (row.get("corridor") or "").strip() or base
            out.append((rownum, dup))
    return out


def load_network(path: str | Path) -> Network:
    """Load a network from a CSV directory or a JSON file.

    Parameters
    ----------
    path : str or Path
        Directory containing the CSV set, or a ``.json`` network document.
    """
    path = Path(path)
    if path.is_file() and path.suffix == ".json":
        return _load_json(path)
    if not path.is_dir():
        raise MissingFile(str(path))
    return _load_csv_dir(path)


def _load_csv_dir(d: Path) -> Network:
    snap_rows = _read_rows(d / "snapshots.csv", ("index", "weight"))
    snapshots = tuple(
        Snapshot(
            index=_parse_int(str(d / "snapshots.csv"), k + 2, "index", r["index"]),
            weight=_parse_float(str(d / "snapshots.csv"), k + 2, "weight", r["weight"]),
        )
        for k, r in enumerate(snap_rows)
    )
    nt = len(snapshots)

    load_prof = _read_profile_csv(d / "load.csv", "bus", nt)
    bus_rows = _read_rows(d / "buses.csv", ("id",))
    buses = tuple(
        Bus(
            id=r["id"].strip(),
            load=load_prof.get(r["id"].strip(), (0.0,) * nt),
            zone_hint=(r.get("zone_hint") or "").strip() or None,
        )
        for r in bus_rows
    )
    bus_ids = {b.id for b in buses}
    for key in load_prof:
        if key not in bus_ids:
            raise ValidationError(f"load row {key}", "references unknown bus")

    lines_path = d / "lines.csv"
    line_rows = _read_rows(lines_path, ("id", "from_bus", "to_bus", "x", "capacity"))
    expanded = _expand_corridor(
        [(k + 2, r) for k, r in enumerate(line_rows)], str(lines_path)
    )
    lines = tuple(
        Line(
            id=r["id"].strip(),
            from_bus=r["from_bus"].strip(),
            to_bus=r["to_bus"].strip(),
            x=_parse_float(str(lines_path), rownum, "x", r["x"]),
            capacity=_parse_float(str(lines_path), rownum, "capacity", r["capacity"]),
            kind=(r.get("kind") or EXISTING).strip() or EXISTING,
            capital_cost=_parse_float(
                str(lines_path), rownum, "capital_cost", r.get("capital_cost") or "0"
            ),
            corridor=(r.get("corridor") or "").strip() or None,
        )
        for rownum, r in expanded
    )

    gens_path = d / "generators.csv"
    gen_rows = _read_rows(gens_path, ("id", "bus", "marginal_cost"))
    avail_path = d / "availability.csv"
    avail_prof = _read_profile_csv(avail_path, "generator", nt) if avail_path.exists() else {}
    generators = tuple(
        Generator(
            id=r["id"].strip(),
            bus=r["bus"].strip(),
            marginal_cost=_parse_float(str(gens_path), k + 2, "marginal_cost", r["marginal_cost"]),
            capital_cost=_parse_float(
                str(gens_path), k + 2, "capital_cost", r.get("capital_cost") or "0"
            ),
            p_nom_max=_parse_float(str(gens_path), k + 2, "p_nom_max", r.get("p_nom_max") or "inf"),
            availability=avail_prof.get(r["id"].strip(), (1.0,) * nt),
            emission_rate=_parse_float(
                str(gens_path), k + 2, "emission_rate", r.get("emission_rate") or "0"
            ),
        )
        for k, r in enumerate(gen_rows)
    )
    gen_ids = {g.id for g in generators}
    for key in avail_prof:
        if key not in gen_ids:
            raise ValidationError(f"availability row {key}", "references unknown generator")

    co2_budget = None
    co2_path = d / "co2.csv"
    if co2_path.exists():
        rows = _read_rows(co2_path, ("budget",))
        if rows:
            co2_budget = _parse_float(str(co2_path), 2, "budget", rows[0]["budget"])

    net = Network(buses, lines, generators, snapshots, co2_budget)
    validate_network(net)
    return net


def _load_json(path: Path) -> Network:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(str(path), exc.lineno, "", exc.msg) from None

    def fnum(v) -> float:
        return math.inf if v is None else float(v)

    snapshots = tuple(Snapshot(int(s["index"]), float(s["weight"])) for s in doc.get("snapshots", []))
    nt = len(snapshots)
    load = doc.get("load", {})
    buses = tuple(
        Bus(b["id"], tuple(float(v) for v in load.get(b["id"], [0.0] * nt)), b.get("zone_hint"))
        for b in doc.get("buses", [])
    )
    expanded = _expand_corridor(
        [(k, dict(r, multiplicity=str(r.get("multiplicity", 1)))) for k, r in enumerate(doc.get("lines", []))],
        str(path),
    )
    lines = tuple(
        Line(
            id=str(r["id"]),
            from_bus=str(r["from_bus"]),
            to_bus=str(r["to_bus"]),
            x=float(r["x"]),
            capacity=fnum(r.get("capacity", math.inf)),
            kind=str(r.get("kind", EXISTING)),
            capital_cost=float(r.get("capital_cost", 0.0)),
            corridor=r.get("corridor"),
        )
        for _, r in expanded
    )
    avail = doc.get("availability", {})
    generators = tuple(
        Generator(
            id=g["id"],
            bus=g["bus"],
            marginal_cost=float(g["marginal_cost"]),
            capital_cost=float(g.get("capital_cost", 0.0)),
            p_nom_max=fnum(g.get("p_nom_max")),
            availability=tuple(float(v) for v in avail.get(g["id"], [1.0] * nt)),
            emission_rate=float(g.get("emission_rate", 0.0)),
        )
        for g in doc.get("generators", [])
    )
    net = Network(buses, lines, generators, snapshots, doc.get("co2_budget"))
    validate_network(net)
    return net


def validate_network(net: Network) -> None:
    """Check structural rules; raises ValidationError naming the offender."""
    if not net.buses:
        raise ValidationError("network", "needs at least one bus")
    if not net.snapshots:
        raise ValidationError("network", "needs at least one snapshot")
    nt = len(net.snapshots)

    seen: set[str] = set()
    for b in net.buses:
        if b.id in seen:
            raise ValidationError(f"bus {b.id}", "duplicate id")
        seen.add(b.id)
        if len(b.load) != nt:
            raise ValidationError(f"bus {b.id}", f"load profile needs {nt} values")
        if any(v < 0 for v in b.load):
            raise ValidationError(f"bus {b.id}", "negative load")
    bus_ids = seen

    seen = set()
    idx = {s.index for s in net.snapshots}
    if len(idx) != nt:
        raise ValidationError("snapshots", "duplicate index")
    for s in net.snapshots:
        if s.weight <= 0:
            raise ValidationError(f"snapshot {s.index}", "weight must be positive")

    for l in net.lines:
        if l.id in seen:
            raise ValidationError(f"line {l.id}", "duplicate id")
        seen.add(l.id)
        if l.from_bus not in bus_ids or l.to_bus not in bus_ids:
            raise ValidationError(f"line {l.id}", "endpoint is not a known bus")
        if l.from_bus == l.to_bus:
            raise ValidationError(f"line {l.id}", "self-loop")
        if not (l.x > 0) or not math.isfinite(l.x):
            raise ValidationError(f"line {l.id}", "reactance must be positive and finite")
        if l.capacity < 0:
            raise ValidationError(f"line {l.id}", "negative capacity")
        if l.kind not in (EXISTING, CANDIDATE):
            raise ValidationError(f"line {l.id}", f"unknown kind {l.kind!r}")
        if l.kind == EXISTING and l.capital_cost != 0.0:
            raise ValidationError(f"line {l.id}", "existing line cannot carry capital cost")
        if l.capital_cost < 0:
            raise ValidationError(f"line {l.id}", "negative capital cost")

    seen = set()
    for g in net.generators:
        if g.id in seen:
            raise ValidationError(f"generator {g.id}", "duplicate id")
        seen.add(g.id)
        if g.bus not in bus_ids:
            raise ValidationError(f"generator {g.id}", "bus is not known")
        if g.marginal_cost < 0 or g.capital_cost < 0 or g.emission_rate < 0:
            raise ValidationError(f"generator {g.id}", "costs and emission rate must be >= 0")
        if g.p_nom_max < 0:
            raise ValidationError(f"generator {g.id}", "p_nom_max must be >= 0")
        if len(g.availability) != nt:
            raise ValidationError(f"generator {g.id}", f"availability needs {nt} values")
        if any(not (0.0 <= v <= 1.0) for v in g.availability):
            raise ValidationError(f"generator {g.id}", "availability outside [0, 1]")

    if net.co2_budget is not None and net.co2_budget < 0:
        raise ValidationError("network", "co2 budget must be >= 0")


def synchronous_zones(net: Network, lines: Sequence[Line] | None = None) -> tuple[SynchronousZone, ...]:
    """Connected components over the given lines (default: existing lines).

    Zones are numbered 0.. in order of their smallest bus id; the slack bus
    of each zone is its lexicographically smallest bus id.
    """
    if lines is None:
        lines = net.existing_lines
    adj: dict[str, list[str]] = {b.id: [] for b in net.buses}
    for l in lines:
        adj[l.from_bus].append(l.to_bus)
        adj[l.to_bus].append(l.from_bus)

    unvisited = set(adj)
    comps: list[frozenset[str]] = []
    # deterministic sweep in sorted bus order
    for start in sorted(adj):
        if start not in unvisited:
            continue
        comp = {start}
        stack = [start]
        unvisited.discard(start)
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v in unvisited:
                    unvisited.discard(v)
                    comp.add(v)
                    stack.append(v)
        comps.append(frozenset(comp))

    comps.sort(key=min)
    return tuple(
        SynchronousZone(id=k, buses=c, slack_bus=min(c)) for k, c in enumerate(comps)
    )


def zone_of_bus(zones: Sequence[SynchronousZone]) -> dict[str, int]:
    """Map bus id to zone id."""
    out: dict[str, int] = {}
    for z in zones:
        for b in z.buses:
            out[b] = z.id
    return out


def incidence_matrix(net: Network, lines: Sequence[Line] | None = None) -> np.ndarray:
    """Signed bus x line incidence matrix K.

    K[i, l] is +1 where line l leaves bus i, -1 where it arrives, else 0.
    Column order follows the given line sequence (default: all lines).
    """
    if lines is None:
        lines = net.lines
    K = np.zeros((len(net.buses), len(lines)), dtype=np.int8)
    bi = net.bus_index
    for col, l in enumerate(lines):
        K[bi[l.from_bus], col] = 1
        K[bi[l.to_bus], col] = -1
    return K


def apply_investment(net: Network, built: Iterable[str]) -> Network:
    """Reduced network for a fixed investment decision.

    Built candidates become existing lines (their capital cost is dropped,
    accounting for it is the caller's concern); unbuilt candidates vanish.
    """
    built = set(built)
    known = {l.id for l in net.candidate_lines}
    unknown = built - known
    if unknown:
        raise ValidationError(f"line {sorted(unknown)[0]}", "not a candidate line")
    lines = []
    for l in net.lines:
        if not l.is_candidate:
            lines.append(l)
        elif l.id in built:
            lines.append(replace(l, kind=EXISTING, capital_cost=0.0))
    return replace(net, lines=tuple(lines))


def save_network(net: Network, path: str | Path, fmt: str = "csv") -> None:
    """Write a network as a CSV directory or single JSON document."""
    path = Path(path)
    if fmt == "json" or (fmt == "auto" and path.suffix == ".json"):
        _save_json(net, path)
    elif fmt in ("csv", "auto"):
        _save_csv_dir(net, path)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def _fmt(v: float) -> str:
    if v == math.inf:
        return "inf"
    return repr(v)


def _save_csv_dir(net: Network, d: Path) -> None:
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "buses.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "zone_hint"])
        for b in net.buses:
            w.writerow([b.id, b.zone_hint or ""])
    with open(d / "lines.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "from_bus", "to_bus", "x", "capacity", "kind", "capital_cost", "corridor", "multiplicity"])
        for l in net.lines:
            w.writerow(
                [l.id, l.from_bus, l.to_bus, _fmt(l.x), _fmt(l.capacity), l.kind, _fmt(l.capital_cost), l.corridor or "", 1]
            )
    with open(d / "generators.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "bus", "marginal_cost", "capital_cost", "p_nom_max", "emission_rate"])
        for g in net.generators:
            w.writerow(
                [g.id, g.bus, _fmt(g.marginal_cost), _fmt(g.capital_cost), _fmt(g.p_nom_max), _fmt(g.emission_rate)]
            )
    with open(d / "snapshots.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "weight"])
        for s in net.snapshots:
            w.writerow([s.index, _fmt(s.weight)])
    snap_cols = [str(s.index) for s in net.snapshots]
    with open(d / "load.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bus"] + snap_cols)
        for b in net.buses:
            w.writerow([b.id] + [_fmt(v) for v in b.load])
    with open(d / "availability.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generator"] + snap_cols)
        for g in net.generators:
            w.writerow([g.id] + [_fmt(v) for v in g.availability])
    if net.co2_budget is not None:
        with open(d / "co2.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["budget"])
            w.writerow([_fmt(net.co2_budget)])


def _save_json(net: Network, path: Path) -> None:
    def num(v: float):
        return None if v == math.inf else v

    doc = {
        "buses": [{"id": b.id, "zone_hint": b.zone_hint} for b in net.buses],
        "lines": [
            {
                "id": l.id,
                "from_bus": l.from_bus,
                "to_bus": l.to_bus,
                "x": l.x,
                "capacity": num(l.capacity),
                "kind": l.kind,
                "capital_cost": l.capital_cost,
                "corridor": l.corridor,
            }
            for l in net.lines
        ],
        "generators": [
            {
                "id": g.id,
                "bus": g.bus,
                "marginal_cost": g.marginal_cost,
                "capital_cost": g.capital_cost,
                "p_nom_max": num(g.p_nom_max),
                "emission_rate": g.emission_rate,
            }
            for g in net.generators
        ],
        "snapshots": [{"index": s.index, "weight": s.weight} for s in net.snapshots],
        "load": {b.id: list(b.load) for b in net.buses},
        "availability": {g.id: list(g.availability) for g in net.generators},
        "co2_budget": net.co2_budget,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
