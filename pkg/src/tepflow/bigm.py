"""Big-M derivation for disjunctive investment constraints.

Every coefficient comes with a provenance record naming the rule and the
lines whose capacity-reactance products built up the value, so reported
coefficients can be audited line by line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .graph import CycleSpec, SlackRelaxationPlan, shortest_path
from .netmodel import Line, Network, synchronous_zones, zone_of_bus


class NotSameZone(Exception):
    """Raised when the weighted-path rule is asked about an inter-zone line."""

    def __init__(self, line_id: str) -> None:
        super().__init__(f"line {line_id} endpoints are in different zones")
        self.line_id = line_id


class SameZone(Exception):
    """Raised when the network-sum fallback is asked about an intra-zone line."""

    def __init__(self, line_id: str) -> None:
        super().__init__(f"line {line_id} endpoints share a zone")
        self.line_id = line_id


@dataclass(frozen=True)
class BigMProvenance:
    rule: str
    members: tuple[str, ...]
    terms: tuple[float, ...]
    value: float


@dataclass
class BigMSet:
    """All big-M coefficients for one network, keyed by line or cycle id."""

    kvl_angle: dict[str, float] = field(default_factory=dict)
    slack: dict[str, float] = field(default_factory=dict)
    kvl_cycle: dict[str, float] = field(default_factory=dict)
    provenance: dict[str, BigMProvenance] = field(default_factory=dict)


def _fx(line: Line) -> float:
    return line.capacity * line.x


def _intra_record(net: Network, line: Line) -> BigMProvenance:
    zones = synchronous_zones(net)
    zmap = zone_of_bus(zones)
    if zmap[line.from_bus] != zmap[line.to_bus]:
        raise NotSameZone(line.id)
    path = shortest_path(net, line.from_bus, line.to_bus, weight=_fx)
    assert path is not None
    members = tuple(lid for lid, _ in path)
    terms = tuple(_fx(net.line_by_id[lid]) for lid in members)
    # largest angle difference the existing grid can sustain between the
    # endpoints, divided by the candidate's reactance
    value = sum(terms) / line.x
    return BigMProvenance("intra_path", members, terms, value)


def kvl_bigm_intra(net: Network, line: Line) -> float:
    """Voltage-law big-M for a candidate inside one zone: the cheapest
    capacity-reactance path between its endpoints over existing lines,
    divided by the candidate's reactance."""
    return _intra_record(net, line).value


def _inter_record(net: Network, line: Line) -> BigMProvenance:
    zones = synchronous_zones(net)
    zmap = zone_of_bus(zones)
    if zmap[line.from_bus] == zmap[line.to_bus]:
        raise SameZone(line.id)
    members = tuple(l.id for l in net.lines)
    terms = tuple(_fx(l) for l in net.lines)
    value = sum(terms) / line.x
    return BigMProvenance("inter_sum", members, terms, value)


def kvl_bigm_inter(net: Network, line: Line) -> float:
    """Voltage-law big-M for a zone-coupling candidate: the network-wide
    capacity-reactance sum (all lines, existing and candidate), divided by
    the candidate's reactance. Coarse but safe for any investment state."""
    return _inter_record(net, line).value


def slack_bigm(net: Network, plan: SlackRelaxationPlan) -> dict[str, float]:
    """Angle-reference big-Ms for relaxed zones, one per candidate line.

    For each non-root zone, every candidate in its relaxing set is rated by
    the cheapest capacity-reactance path between the upstream and local
    slack buses when only that candidate is added to the existing grid. The
    zone takes the worst value of its set, plus the upstream zone's final
    value, so nested relaxations stay valid; all members share the result.
    """
    values, _ = _slack_records(net, plan)
    return values


def _slack_records(
    net: Network, plan: SlackRelaxationPlan
) -> tuple[dict[str, float], dict[str, BigMProvenance]]:
    zones = synchronous_zones(net)
    slack_of = {z.id: z.slack_bus for z in zones}
    existing = net.existing_lines
    zone_final: dict[int, float] = {r: 0.0 for r in plan.roots}
    values: dict[str, float] = {}
    prov: dict[str, BigMProvenance] = {}

    for relax in plan.relaxations:  # ordered root-down
        bases: dict[str, tuple[float, tuple[str, ...], tuple[float, ...]]] = {}
        for cid in relax.candidates:
            cand = net.line_by_id[cid]
            path = shortest_path(
                net,
                slack_of[relax.upstream],
                slack_of[relax.zone],
                weight=_fx,
                allowed=list(existing) + [cand],
            )
            assert path is not None, f"no slack path via {cid}"
            members = tuple(lid for lid, _ in path)
            terms = tuple(_fx(net.line_by_id[lid]) for lid in members)
            bases[cid] = (sum(terms), members, terms)
        set_max = max(v[0] for v in bases.values())
        upstream_add = zone_final[relax.upstream]
        final = set_max + upstream_add
        zone_final[relax.zone] = final
        for cid, (base, members, terms) in bases.items():
            values[cid] = final
            rule = "slack_path" if upstream_add == 0.0 else "slack_path+upstream"
            prov[f"slack:{cid}"] = BigMProvenance(rule, members, terms, final)
    return values, prov


def cycle_bigm(net: Network, cycle: CycleSpec) -> float:
    """Voltage-law big-M for a candidate cycle: the sum of unsigned
    capacity-reactance products along the cycle, the largest voltage
    mismatch the gated lines could ever leave open."""
    return sum(_fx(net.line_by_id[lid]) for lid, _ in cycle.entries)


def compute_all(
    net: Network,
    cycles: Sequence[CycleSpec] = (),
    plan: SlackRelaxationPlan | None = None,
    factor: float = 1.0,
) -> BigMSet:
    """Derive every big-M the formulations need.

    ``cycles`` are the candidate cycles (gated); ``plan`` may be None when
    the zone graph is not a forest, in which case no slack entries exist.
    ``factor`` scales all values uniformly (1.0 emits the derived bounds).
    """
    if factor <= 0:
        raise ValueError("big-M scale factor must be positive")
    out = BigMSet()
    for cand in net.candidate_lines:
        try:
            rec = _intra_record(net, cand)
        except NotSameZone:
            rec = _inter_record(net, cand)
        value = rec.value * factor
        out.kvl_angle[cand.id] = value
        out.provenance[f"kvl:{cand.id}"] = BigMProvenance(rec.rule, rec.members, rec.terms, value)

    if plan is not None and plan.relaxations:
        values, prov = _slack_records(net, plan)
        for cid, v in values.items():
            out.slack[cid] = v * factor
        for key, rec in prov.items():
            out.provenance[key] = BigMProvenance(rec.rule, rec.members, rec.terms, rec.value * factor)

    for cyc in cycles:
        if not cyc.gating_candidates:
            continue
        members = tuple(lid for lid, _ in cyc.entries)
        terms = tuple(_fx(net.line_by_id[lid]) for lid in members)
        value = sum(terms) * factor
        out.kvl_cycle[cyc.id] = value
        out.provenance[f"cycle:{cyc.id}"] = BigMProvenance("cycle_sum", members, terms, value)

    bad = [
        key
        for key, rec in out.provenance.items()
        if not math.isfinite(rec.value)
    ]
    if bad:
        raise ValueError(f"non-finite big-M (infinite capacity upstream?): {bad[:3]}")
    return out


def report_rows(bigms: BigMSet) -> list[dict[str, str]]:
    """Flatten a BigMSet for CSV reporting."""
    rows = []
    for key in sorted(bigms.provenance):
        rec = bigms.provenance[key]
        kind, _, ident = key.partition(":")
        rows.append(
            {
                "kind": kind,
                "id": ident,
                "value": repr(rec.value),
                "rule": rec.rule,
                "members": " ".join(rec.members),
            }
        )
    return rows
