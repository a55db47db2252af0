"""MILP builders: shared core plus angle- and cycle-based voltage laws.

Both formulations share an identical core (dispatch, investment, flow
limits, balance), so their column counts differ exactly by one voltage
angle per bus and snapshot and their optima must coincide.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import graph as graphmod
from .bigm import BigMSet, compute_all
from .graph import (
    CycleSpec,
    NotAForest,
    SlackRelaxationPlan,
    SubnetworkGraph,
    cycle_basis,
    candidate_cycles_inter,
    candidate_cycles_intra,
    slack_relaxation_plan,
    subnetwork_graph,
)
from .netmodel import Network, SynchronousZone, synchronous_zones, zone_of_bus
from .problem import MilpProblem, ProblemStats

log = logging.getLogger(__name__)

ANGLE = "angle"
CYCLE = "cycle"


class AngleFormulationUnsupported(Exception):
    """The angle formulation needs a rooted-forest zone graph; carried
    zone-level cycles say why this network does not have one."""

    def __init__(self, cycles: Sequence[tuple[int, ...]]) -> None:
        super().__init__(
            "angle formulation unsupported: zone graph has cycles "
            f"{list(cycles)}; use the cycle formulation"
        )
        self.cycles = tuple(cycles)


@dataclass(frozen=True)
class FormulationConfig:
    """Build options shared by both formulations."""

    kind: str = CYCLE
    include_co2: bool = True
    mip_gap: float = 0.005
    bigm_slack_factor: float = 1.0  # uniform big-M headroom multiplier
    slack_strategy: str = "breadth_first_central"
    explicit_roots: tuple[int, ...] | None = None
    cycle_cap: int = graphmod.DEFAULT_CYCLE_CAP

    def __post_init__(self) -> None:
        if self.kind not in (ANGLE, CYCLE):
            raise ValueError(f"unknown formulation kind {self.kind!r}")
        if not (0.0 < self.mip_gap < 1.0):
            raise ValueError("mip_gap must lie in (0, 1)")
        if self.bigm_slack_factor < 1.0:
            raise ValueError("bigm_slack_factor must be >= 1")


@dataclass
class GraphArtifacts:
    """Everything derived from the network topology that builders consume."""

    zones: tuple[SynchronousZone, ...]
    basis: tuple[CycleSpec, ...]
    intra_cycles: tuple[CycleSpec, ...]
    inter_cycles: tuple[CycleSpec, ...]
    subnetwork: SubnetworkGraph
    plan: SlackRelaxationPlan | None  # None when the zone graph is not a forest
    zone_cycles: tuple[tuple[int, ...], ...]  # why plan is None
    bigms: BigMSet

    @property
    def candidate_cycles(self) -> tuple[CycleSpec, ...]:
        return self.intra_cycles + self.inter_cycles


def analyze(net: Network, cfg: FormulationConfig | None = None) -> GraphArtifacts:
    """Run the full topology pipeline once; builders take the result."""
    cfg = cfg or FormulationConfig()
    zones = synchronous_zones(net)
    basis = cycle_basis(net)
    intra = candidate_cycles_intra(net)
    sg = subnetwork_graph(net)
    inter = candidate_cycles_inter(net, sg, cap=cfg.cycle_cap)
    try:
        plan = slack_relaxation_plan(sg, cfg.slack_strategy, cfg.explicit_roots)
        zone_cycles: tuple[tuple[int, ...], ...] = ()
    except NotAForest as exc:
        plan = None
        zone_cycles = exc.cycles
    bigms = compute_all(net, list(intra) + list(inter), plan, factor=cfg.bigm_slack_factor)
    return GraphArtifacts(zones, basis, intra, inter, sg, plan, zone_cycles, bigms)


def _var_G(g: str) -> str:
    return f"G:{g}"


def _var_g(g: str, t: int) -> str:
    return f"g:{g}:{t}"


def _var_f(l: str, t: int) -> str:
    return f"f:{l}:{t}"


def _var_i(l: str) -> str:
    return f"i:{l}"


def _var_theta(b: str, t: int) -> str:
    return f"theta:{b}:{t}"


def build_core(net: Network, cfg: FormulationConfig | None = None, name: str = "core") -> MilpProblem:
    """Formulation-independent part: capacities, dispatch, flows, balance.

    Columns: generator capacity G, dispatch g per snapshot, flow f per line
    and snapshot, investment binary i per candidate. Rows per snapshot:
    nodal balance (==), dispatch limit, candidate flow gating pair; plus
    one optional emission budget row.
    """
    cfg = cfg or FormulationConfig()
    p = MilpProblem(name, metadata={"formulation": "core"})
    snaps = net.snapshots

    for gen in net.generators:
        p.add_column(_var_G(gen.id), 0.0, gen.p_nom_max, cost=gen.capital_cost)
    for gen in net.generators:
        for t, s in enumerate(snaps):
            p.add_column(_var_g(gen.id, t), 0.0, math.inf, cost=s.weight * gen.marginal_cost)
    for line in net.lines:
        for t in range(len(snaps)):
            p.add_column(_var_f(line.id, t), -line.capacity, line.capacity)
    for cand in net.candidate_lines:
        p.add_column(_var_i(cand.id), 0.0, 1.0, cost=cand.capital_cost, binary=True)

    gens_at: dict[str, list[str]] = {}
    for gen in net.generators:
        gens_at.setdefault(gen.bus, []).append(gen.id)

    for bus in net.buses:
        for t in range(len(snaps)):
            terms: list[tuple[str, float]] = [(_var_g(g, t), 1.0) for g in gens_at.get(bus.id, [])]
            for line in net.lines:
                if line.from_bus == bus.id:
                    terms.append((_var_f(line.id, t), -1.0))
                elif line.to_bus == bus.id:
                    terms.append((_var_f(line.id, t), 1.0))
            p.add_row(f"kcl:{bus.id}:{t}", terms, "==", bus.load[t])

    for gen in net.generators:
        for t in range(len(snaps)):
            p.add_row(
                f"disp:{gen.id}:{t}",
                [(_var_g(gen.id, t), 1.0), (_var_G(gen.id), -gen.availability[t])],
                "<=",
                0.0,
            )

    for cand in net.candidate_lines:
        if not math.isfinite(cand.capacity):
            raise ValueError(f"candidate {cand.id} needs a finite capacity")
        for t in range(len(snaps)):
            p.add_row(
                f"flim:{cand.id}:{t}:hi",
                [(_var_f(cand.id, t), 1.0), (_var_i(cand.id), -cand.capacity)],
                "<=",
                0.0,
            )
            p.add_row(
                f"flim:{cand.id}:{t}:lo",
                [(_var_f(cand.id, t), 1.0), (_var_i(cand.id), cand.capacity)],
                ">=",
                0.0,
            )

    if cfg.include_co2 and net.co2_budget is not None:
        terms = [
            (_var_g(gen.id, t), s.weight * gen.emission_rate)
            for gen in net.generators
            if gen.emission_rate > 0
            for t, s in enumerate(snaps)
        ]
        if terms:
            p.add_row("co2", terms, "<=", net.co2_budget)
    return p


def build_angle(
    net: Network,
    plan: SlackRelaxationPlan | None,
    bigms: BigMSet,
    cfg: FormulationConfig | None = None,
) -> MilpProblem:
    """Angle formulation: voltage angles per bus, big-M voltage laws on
    candidates, fixed or relaxable angle references per zone.

    ``plan`` must come from a rooted-forest zone graph; passing None (the
    not-a-forest case) raises AngleFormulationUnsupported.
    """
    cfg = cfg or FormulationConfig()
    if plan is None:
        sg = subnetwork_graph(net)
        try:
            plan = slack_relaxation_plan(sg, cfg.slack_strategy, cfg.explicit_roots)
        except NotAForest as exc:
            raise AngleFormulationUnsupported(exc.cycles) from None

    p = build_core(net, cfg, name="angle")
    p.metadata["formulation"] = ANGLE
    zones = synchronous_zones(net)
    nt = len(net.snapshots)

    for bus in net.buses:
        for t in range(nt):
            p.add_column(_var_theta(bus.id, t), -math.inf, math.inf)

    for line in net.existing_lines:
        inv_x = 1.0 / line.x
        for t in range(nt):
            p.add_row(
                f"kvl0:{line.id}:{t}",
                [
                    (_var_f(line.id, t), 1.0),
                    (_var_theta(line.from_bus, t), -inv_x),
                    (_var_theta(line.to_bus, t), inv_x),
                ],
                "==",
                0.0,
            )

    for cand in net.candidate_lines:
        inv_x = 1.0 / cand.x
        m = bigms.kvl_angle[cand.id]
        for t in range(nt):
            base = [
                (_var_f(cand.id, t), 1.0),
                (_var_theta(cand.from_bus, t), -inv_x),
                (_var_theta(cand.to_bus, t), inv_x),
            ]
            p.add_row(f"kvl1:{cand.id}:{t}:hi", base + [(_var_i(cand.id), m)], "<=", m)
            p.add_row(f"kvl1:{cand.id}:{t}:lo", base + [(_var_i(cand.id), -m)], ">=", -m)

    relaxed = {r.zone: r for r in plan.relaxations}
    for zone in zones:
        for t in range(nt):
            ref = _var_theta(zone.slack_bus, t)
            r = relaxed.get(zone.id)
            if r is None:
                p.add_row(f"slack:z{zone.id}:{t}", [(ref, 1.0)], "==", 0.0)
            else:
                gates = [(_var_i(c), -bigms.slack[c]) for c in r.candidates]
                p.add_row(f"slack:z{zone.id}:{t}:hi", [(ref, 1.0)] + gates, "<=", 0.0)
                gates = [(_var_i(c), bigms.slack[c]) for c in r.candidates]
                p.add_row(f"slack:z{zone.id}:{t}:lo", [(ref, 1.0)] + gates, ">=", 0.0)

    _log_build(p)
    return p


def build_cycle(
    net: Network,
    basis: Sequence[CycleSpec],
    candidate_cycles: Sequence[CycleSpec],
    bigms: BigMSet,
    cfg: FormulationConfig | None = None,
) -> MilpProblem:
    """Cycle formulation: voltage laws as zero-sums around the existing
    cycle basis plus big-M gated sums around candidate cycles. No angle
    variables, so any zone-graph shape is fine."""
    cfg = cfg or FormulationConfig()
    p = build_core(net, cfg, name="cycle")
    p.metadata["formulation"] = CYCLE
    nt = len(net.snapshots)

    for spec in basis:
        for t in range(nt):
            terms = [
                (_var_f(lid, t), sign * net.line_by_id[lid].x) for lid, sign in spec.entries
            ]
            p.add_row(f"cyc:{spec.id}:{t}", terms, "==", 0.0)

    for spec in candidate_cycles:
        m = bigms.kvl_cycle[spec.id]
        n_gate = len(spec.gating_candidates)
        for t in range(nt):
            flow_terms = [
                (_var_f(lid, t), sign * net.line_by_id[lid].x) for lid, sign in spec.entries
            ]
            gates_hi = [(_var_i(c), m) for c in sorted(spec.gating_candidates)]
            p.add_row(
                f"ccyc:{spec.id}:{t}:hi", flow_terms + gates_hi, "<=", m * n_gate
            )
            gates_lo = [(_var_i(c), -m) for c in sorted(spec.gating_candidates)]
            p.add_row(
                f"ccyc:{spec.id}:{t}:lo", flow_terms + gates_lo, ">=", -m * n_gate
            )

    _log_build(p)
    return p


def build(net: Network, cfg: FormulationConfig | None = None) -> MilpProblem:
    """One-call build: runs the topology pipeline and dispatches on kind."""
    cfg = cfg or FormulationConfig()
    art = analyze(net, cfg)
    if cfg.kind == ANGLE:
        if art.plan is None:
            raise AngleFormulationUnsupported(art.zone_cycles)
        return build_angle(net, art.plan, art.bigms, cfg)
    return build_cycle(net, art.basis, art.candidate_cycles, art.bigms, cfg)


def problem_stats(p: MilpProblem) -> ProblemStats:
    """Row/column/binary/nonzero counts for reporting and comparison."""
    return p.stats()


def _log_build(p: MilpProblem) -> None:
    s = p.stats()
    lo, hi = p.coefficient_range()
    ratio = hi / lo if lo > 0 else math.inf
    log.info(
        "built %s: %d rows, %d cols (%d binary), %d nonzeros, |coef| in [%.3g, %.3g] (ratio %.3g)",
        p.name, s.rows, s.columns, s.binaries, s.nonzeros, lo, hi, ratio,
    )
