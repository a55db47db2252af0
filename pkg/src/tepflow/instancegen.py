"""Reproducible test networks: random instances and the worked fixtures.

Random instances are calibrated so that no line can ever saturate: every
capacity strictly exceeds the total system load, which bounds any feasible
flow. Candidate lines then earn their keep purely through cheaper energy
in a neighbouring zone (or through the emission budget), never through
congestion relief, keeping every gated voltage-law row strictly interior
at every binary assignment. A post-draw audit confirms the margins and
redraws with a derived seed if a draw slips through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .formulation import CYCLE, FormulationConfig, analyze, build_cycle
from .netmodel import Bus, Generator, Line, Network, Snapshot, validate_network
from .solver import solve_lp

AUDIT_ATTEMPTS = 12
AUDIT_MAX_LOADING = 0.9
AUDIT_MIN_SLACK = 1e-3


class GenerationFailure(Exception):
    """No audited instance emerged within the retry budget."""

    def __init__(self, spec: "InstanceSpec", attempts: int, reason: str) -> None:
        super().__init__(f"gave up after {attempts} draws for seed {spec.seed}: {reason}")
        self.spec = spec
        self.attempts = attempts
        self.reason = reason


@dataclass(frozen=True)
class InstanceSpec:
    """Knobs for one random instance; equal specs give equal networks."""

    seed: int
    n_buses: int = 4
    n_zones: int = 1
    n_snapshots: int = 1
    mesh_edges: int = 0  # extra intra-zone existing lines beyond the spanning trees
    candidates_per_corridor: int = 1  # parallel candidates per inter-zone corridor
    intra_candidates: int = 1
    renewable_share: float = 0.25
    co2_limited: bool = False
    zone_cycle: bool = False  # ring the zone graph (angle formulation must refuse)

    def __post_init__(self) -> None:
        if self.n_buses < 2:
            raise ValueError("need at least two buses")
        if not 1 <= self.n_zones <= self.n_buses:
            raise ValueError("zone count must be between 1 and the bus count")
        if not 1 <= self.n_snapshots:
            raise ValueError("need at least one snapshot")
        if self.zone_cycle and self.n_zones < 3:
            raise ValueError("a zone cycle needs at least three zones")
        if self.candidates_per_corridor < 1:
            raise ValueError("candidates_per_corridor must be >= 1")
        if self.mesh_edges < 0 or self.intra_candidates < 0:
            raise ValueError("counts must be >= 0")
        if not 0.0 <= self.renewable_share <= 1.0:
            raise ValueError("renewable_share must be in [0, 1]")


def _draw(spec: InstanceSpec, rng: np.random.Generator) -> Network:
    nb, nz, nt = spec.n_buses, spec.n_zones, spec.n_snapshots

    sizes = [1] * nz
    for _ in range(nb - nz):
        sizes[int(rng.integers(0, nz))] += 1
    zone_buses: list[list[str]] = []
    nxt = 1
    for size in sizes:
        zone_buses.append([f"b{k:02d}" for k in range(nxt, nxt + size)])
        nxt += size

    lines: list[Line] = []
    lid = 0

    def new_lid() -> str:
        nonlocal lid
        lid += 1
        return f"l{lid:02d}"

    # spanning tree per zone, then optional extra mesh lines
    for members in zone_buses:
        for k in range(1, len(members)):
            parent = members[int(rng.integers(0, k))]
            lines.append(
                Line(new_lid(), parent, members[k], x=round(float(rng.uniform(0.05, 0.4)), 4), capacity=0.0)
            )
    meshable = [m for m in zone_buses if len(m) >= 2]
    for _ in range(spec.mesh_edges if meshable else 0):
        members = meshable[int(rng.integers(0, len(meshable)))]
        u, v = rng.choice(len(members), size=2, replace=False)
        a, b = sorted((members[int(u)], members[int(v)]))
        lines.append(Line(new_lid(), a, b, x=round(float(rng.uniform(0.05, 0.4)), 4), capacity=0.0))

    # inter-zone corridors: a random zone tree, optionally one closing edge
    corridor_pairs: list[tuple[int, int]] = []
    tree_adj: dict[int, set[int]] = {z: set() for z in range(nz)}
    for z in range(1, nz):
        parent = int(rng.integers(0, z))
        corridor_pairs.append((parent, z))
        tree_adj[parent].add(z)
        tree_adj[z].add(parent)
    if spec.zone_cycle:
        extra = next(
            (a, b) for a in range(nz) for b in range(a + 1, nz) if b not in tree_adj[a]
        )
        corridor_pairs.append(extra)

    cand_rows: list[tuple[str, str, str, str]] = []  # id, from, to, corridor
    cid = 0
    for k, (za, zb) in enumerate(corridor_pairs, start=1):
        fa = zone_buses[za][int(rng.integers(0, len(zone_buses[za])))]
        fb = zone_buses[zb][int(rng.integers(0, len(zone_buses[zb])))]
        corridor = f"k{k:02d}"
        for _ in range(spec.candidates_per_corridor):
            cid += 1
            cand_rows.append((f"c{cid:02d}", fa, fb, corridor))
    intra_hosts = [m for m in zone_buses if len(m) >= 2]
    if spec.intra_candidates and not intra_hosts:
        raise ValueError("intra candidates need a zone with at least two buses")
    for _ in range(spec.intra_candidates):
        members = intra_hosts[int(rng.integers(0, len(intra_hosts)))]
        u, v = rng.choice(len(members), size=2, replace=False)
        a, b = sorted((members[int(u)], members[int(v)]))
        cid += 1
        cand_rows.append((f"c{cid:02d}", a, b, f"k{len(corridor_pairs) + cid:02d}"))

    # loads; at least one bus must draw power
    all_buses = [b for members in zone_buses for b in members]
    load: dict[str, tuple[float, ...]] = {}
    for b in all_buses:
        if rng.random() < 0.7:
            load[b] = tuple(round(float(rng.uniform(5, 60)), 2) for _ in range(nt))
        else:
            load[b] = (0.0,) * nt
    if all(max(v) == 0.0 for v in load.values()):
        b = all_buses[int(rng.integers(0, len(all_buses)))]
        load[b] = tuple(round(float(rng.uniform(20, 60)), 2) for _ in range(nt))
    total_load = max(sum(load[b][t] for b in all_buses) for t in range(nt))

    # every capacity clears the total load, so no flow can reach it
    def cap() -> float:
        return round(total_load * float(rng.uniform(1.3, 2.5)), 1)

    weights = [round(float(rng.uniform(60, 400)), 1) for _ in range(nt)]

    gens: list[Generator] = []
    gid = 0

    def new_gid() -> str:
        nonlocal gid
        gid += 1
        return f"g{gid:02d}"

    firm_mc: list[float] = []
    firm_rate: list[float] = []
    for members in zone_buses:
        mc = round(float(rng.uniform(40, 90)), 2)
        rate = round(float(rng.uniform(0.05, 0.2)), 3)
        firm_mc.append(mc)
        firm_rate.append(rate)
        gens.append(
            Generator(
                new_gid(), members[0], marginal_cost=mc,
                capital_cost=round(float(rng.uniform(0.5, 2.0)), 2),
                p_nom_max=math.inf, availability=(1.0,) * nt,
                emission_rate=rate,
            )
        )
    cheap_mcs: list[float] = []
    for z in range(nz):
        if z > 0 and rng.random() < 0.5:
            continue
        members = zone_buses[z]
        bus = members[int(rng.integers(0, len(members)))]
        mc = round(float(rng.uniform(3, 12)), 2)
        cheap_mcs.append(mc)
        gens.append(
            Generator(
                new_gid(), bus, marginal_cost=mc,
                capital_cost=round(float(rng.uniform(0.5, 2.0)), 2),
                p_nom_max=round(total_load * float(rng.uniform(0.5, 0.9)), 1),
                availability=(1.0,) * nt,
                emission_rate=0.9 if spec.co2_limited else 0.0,
            )
        )
    n_ren = int(round(spec.renewable_share * nb))
    if n_ren:
        for bus in rng.choice(all_buses, size=min(n_ren, nb), replace=False):
            gens.append(
                Generator(
                    new_gid(), str(bus), marginal_cost=round(float(rng.uniform(0.5, 3.0)), 2),
                    capital_cost=round(float(rng.uniform(0.3, 1.5)), 2),
                    p_nom_max=round(total_load * float(rng.uniform(0.3, 0.8)), 1),
                    availability=tuple(round(float(rng.uniform(0.15, 0.95)), 3) for _ in range(nt)),
                    emission_rate=0.0,
                )
            )

    # candidate worth: energy-cost spread times a plausible traded volume,
    # scattered around break-even so the solver builds some and skips others
    spread = max(firm_mc) - (min(cheap_mcs) if cheap_mcs else min(firm_mc))
    hours = sum(weights)
    base_value = max(spread, 5.0) * 0.3 * total_load * hours
    for row in cand_rows:
        lines.append(
            Line(
                row[0], row[1], row[2], x=round(float(rng.uniform(0.05, 0.4)), 4),
                capacity=cap(), kind="candidate",
                capital_cost=round(base_value * float(rng.uniform(0.3, 3.0)), 1),
                corridor=row[3],
            )
        )
    lines = [
        l if l.is_candidate else replace(l, capacity=cap())
        for l in lines
    ]

    co2_budget = None
    if spec.co2_limited:
        floor = sum(
            weights[t] * sum(load[b][t] for b in zone_buses[z]) * firm_rate[z]
            for z in range(nz)
            for t in range(nt)
        )
        co2_budget = round(1.25 * floor + 1.0, 1)

    net = Network(
        buses=tuple(Bus(b, load[b]) for b in all_buses),
        lines=tuple(lines),
        generators=tuple(gens),
        snapshots=tuple(Snapshot(t, weights[t]) for t in range(nt)),
        co2_budget=co2_budget,
    )
    validate_network(net)
    return net


def _audit(net: Network) -> str | None:
    """Check the calibration promises on the cheapest and fullest builds.

    Returns a reason string on failure, None when the draw is sound.
    """
    cfg = FormulationConfig(kind=CYCLE)
    art = analyze(net, cfg)
    prob = build_cycle(net, art.basis, art.candidate_cycles, art.bigms, cfg)
    cands = [l.id for l in net.candidate_lines]
    gated = {
        f"ccyc:{spec.id}:{t}:{side}": spec.gating_candidates
        for spec in art.candidate_cycles
        for t in range(net.n_snapshots)
        for side in ("hi", "lo")
    }
    for assignment in (0.0, 1.0):
        sol = solve_lp(prob, fixed={f"i:{c}": assignment for c in cands})
        if sol.status != "optimal":
            return f"assignment all={assignment:g} is {sol.status}"
        for line in net.lines:
            if line.is_candidate and assignment == 0.0:
                continue
            for t in range(net.n_snapshots):
                if abs(sol.values[f"f:{line.id}:{t}"]) > AUDIT_MAX_LOADING * line.capacity:
                    return f"line {line.id} loaded beyond {AUDIT_MAX_LOADING:.0%}"
        activities = sol.activities
        for row in prob.rows:
            gating = gated.get(row.name)
            if gating is None:
                continue
            built = sum(sol.values[f"i:{c}"] for c in gating)
            if assignment == 1.0 and len(gating) == built:
                continue  # row is meant to bind
            slack = row.rhs - activities[row.name] if row.sense == "<=" else activities[row.name] - row.rhs
            if slack < AUDIT_MIN_SLACK:
                return f"gated row {row.name} nearly active (slack {slack:.3g})"
    return None


def generate(spec: InstanceSpec) -> Network:
    """Draw a deterministic, audited instance for the given spec."""
    reason = "no attempt made"
    for attempt in range(AUDIT_ATTEMPTS):
        rng = np.random.default_rng(spec.seed + attempt * 1_000_003)
        try:
            net = _draw(spec, rng)
        except ValueError as exc:
            raise GenerationFailure(spec, attempt + 1, str(exc)) from exc
        failure = _audit(net)
        if failure is None:
            return net
        reason = failure
    raise GenerationFailure(spec, AUDIT_ATTEMPTS, reason)


def acceptance_suite() -> list[InstanceSpec]:
    """The deterministic instance family used by the acceptance checks.

    Spans 2-12 buses, 1-4 zones, up to 8 candidate lines, 1-3 snapshots.
    Instances with a ringed zone graph exercise the cycle formulation's
    exclusive territory; everything else builds under both formulations.
    """
    specs: list[InstanceSpec] = []
    seed = 1000

    def add(**kw) -> None:
        nonlocal seed
        specs.append(InstanceSpec(seed=seed, **kw))
        seed += 7

    # single zone, tiny
    for nb in (2, 3, 4):
        for mesh in (0, 1):
            for intra in (1, 2):
                for _ in range(3):
                    add(n_buses=nb, mesh_edges=mesh, intra_candidates=intra)
    # single zone, meshed, some multi-snapshot
    for nb in (5, 6, 8):
        for mesh in (1, 2):
            for intra in (2, 3):
                for rep in range(3):
                    add(n_buses=nb, mesh_edges=mesh, intra_candidates=intra,
                        n_snapshots=1 + rep % 2)
    # two zones
    for nb in (4, 6, 8, 9):
        for cpc in (1, 2):
            for intra in (0, 1):
                for rep in range(4):
                    add(n_buses=nb, n_zones=2, candidates_per_corridor=cpc,
                        intra_candidates=intra, n_snapshots=1 + rep % 2,
                        co2_limited=rep == 3)
    # three zones, tree-shaped
    for nb in (6, 8, 10):
        for cpc in (1, 2):
            for intra in (0, 1):
                for rep in range(3):
                    add(n_buses=nb, n_zones=3, candidates_per_corridor=cpc,
                        intra_candidates=intra, n_snapshots=1 + rep % 3,
                        co2_limited=rep == 2)
    # four zones, tree-shaped
    for nb in (8, 10, 12):
        for cpc in (1, 2):
            for intra in (0, 1):
                for _ in range(2):
                    add(n_buses=nb, n_zones=4, candidates_per_corridor=cpc,
                        intra_candidates=intra)
    # ringed zone graphs (cycle formulation only)
    for nb in (8, 10):
        for _ in range(3):
            add(n_buses=nb, n_zones=3, zone_cycle=True, intra_candidates=0)
    for nb in (10, 12):
        for _ in range(3):
            add(n_buses=nb, n_zones=4, zone_cycle=True, intra_candidates=0)
    # stress: densest combinatorics, including one 8-candidate instance
    for rep in range(6):
        add(n_buses=11 + rep % 2, n_zones=3, candidates_per_corridor=2,
            intra_candidates=2, n_snapshots=3, co2_limited=rep % 2 == 0)
    add(n_buses=12, n_zones=4, candidates_per_corridor=2, intra_candidates=2)
    return specs


def fixtures() -> dict[str, Network]:
    """Hand-built networks reproducing the documented worked examples.

    Keys group by topic: A.* single-zone big-M shapes, B.* candidate cycle
    choice, C.* multi-zone slack handling, D.* zone-graph rings, NEG.1 the
    deliberately tight network for the halved-big-M control.
    """
    nets: dict[str, Network] = {}

    nets["A.1"] = Network(
        buses=(Bus("a1", (0.0,)), Bus("a2", (100.0,))),
        lines=(
            Line("l1", "a1", "a2", x=0.1, capacity=200.0),
            Line("c1", "a1", "a2", x=0.1, capacity=200.0, kind="candidate", capital_cost=500.0),
        ),
        generators=(
            Generator("g1", "a1", marginal_cost=10.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g2", "a2", marginal_cost=50.0, capital_cost=1.0, availability=(1.0,)),
        ),
        snapshots=(Snapshot(0, 100.0),),
    )

    nets["A.2"] = Network(
        buses=(Bus("a1", (0.0,)), Bus("a2", (30.0,)), Bus("a3", (70.0,))),
        lines=(
            Line("l1", "a1", "a2", x=0.1, capacity=150.0),
            Line("l2", "a2", "a3", x=0.1, capacity=150.0),
            Line("c1", "a1", "a3", x=0.2, capacity=150.0, kind="candidate", capital_cost=800.0),
        ),
        generators=(
            Generator("g1", "a1", marginal_cost=8.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g2", "a3", marginal_cost=60.0, capital_cost=1.0, availability=(1.0,)),
        ),
        snapshots=(Snapshot(0, 100.0),),
    )

    nets["A.3"] = Network(
        buses=(Bus("r1", (0.0,)), Bus("r2", (40.0,)), Bus("r3", (120.0,)), Bus("r4", (40.0,))),
        lines=(
            Line("l1", "r1", "r2", x=0.1, capacity=260.0),
            Line("l2", "r2", "r3", x=0.1, capacity=260.0),
            Line("l3", "r3", "r4", x=0.15, capacity=260.0),
            Line("l4", "r4", "r1", x=0.15, capacity=260.0),
            Line("c1", "r1", "r3", x=0.1, capacity=260.0, kind="candidate", capital_cost=1500.0),
        ),
        generators=(
            Generator("g1", "r1", marginal_cost=7.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g2", "r3", marginal_cost=55.0, capital_cost=1.0, availability=(1.0,)),
        ),
        snapshots=(Snapshot(0, 100.0),),
    )

    nets["B.1"] = Network(
        buses=tuple(Bus(f"b{k}", (load,)) for k, load in enumerate((0.0, 0.0, 30.0, 90.0, 30.0, 0.0), start=1)),
        lines=(
            Line("l1", "b1", "b2", x=0.1, capacity=200.0),
            Line("l2", "b2", "b3", x=0.1, capacity=200.0),
            Line("l3", "b3", "b4", x=0.1, capacity=200.0),
            Line("l4", "b4", "b5", x=0.1, capacity=200.0),
            Line("l5", "b5", "b6", x=0.1, capacity=200.0),
            Line("l6", "b6", "b1", x=0.1, capacity=200.0),
            Line("c1", "b2", "b6", x=0.1, capacity=200.0, kind="candidate", capital_cost=5000.0),
        ),
        generators=(
            Generator("g1", "b1", marginal_cost=6.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g2", "b4", marginal_cost=58.0, capital_cost=1.0, availability=(1.0,)),
        ),
        snapshots=(Snapshot(0, 100.0),),
    )

    nets["B.2"] = Network(
        buses=(
            Bus("b0", (0.0, 0.0, 0.0)), Bus("b1", (0.0, 0.0, 0.0)),
            Bus("b2", (25.0, 10.0, 5.0)), Bus("b3", (35.0, 20.0, 10.0)),
            Bus("b4", (0.0, 0.0, 0.0)), Bus("b5", (60.0, 45.0, 20.0)),
        ),
        lines=(
            Line("l5", "b0", "b1", x=0.1, capacity=160.0),
            Line("l1", "b1", "b2", x=0.1, capacity=160.0),
            Line("l2", "b2", "b3", x=0.1, capacity=160.0),
            Line("l3", "b3", "b4", x=0.1, capacity=160.0),
            Line("l4", "b4", "b5", x=0.1, capacity=160.0),
            Line("c2", "b1", "b4", x=0.15, capacity=160.0, kind="candidate", capital_cost=2000.0),
            Line("c1", "b0", "b5", x=0.2, capacity=160.0, kind="candidate", capital_cost=2500.0),
        ),
        generators=(
            Generator("g1", "b0", marginal_cost=9.0, capital_cost=1.0, availability=(0.9, 0.5, 0.3)),
            Generator("g2", "b5", marginal_cost=52.0, capital_cost=1.0, availability=(1.0, 1.0, 1.0)),
            Generator("g3", "b3", marginal_cost=30.0, capital_cost=1.2, p_nom_max=50.0, availability=(1.0, 1.0, 1.0)),
        ),
        snapshots=(Snapshot(0, 120.0), Snapshot(1, 90.0), Snapshot(2, 60.0)),
    )

    nets["C.1"] = Network(
        buses=(Bus("v1", (0.0,)), Bus("v2", (30.0,)), Bus("w1", (40.0,)), Bus("w2", (0.0,))),
        lines=(
            Line("l1", "v1", "v2", x=0.1, capacity=100.0),
            Line("l2", "w1", "w2", x=0.1, capacity=100.0),
            Line("c1", "v2", "w2", x=0.1, capacity=100.0, kind="candidate", capital_cost=20000.0),
        ),
        generators=(
            Generator("g1", "v1", marginal_cost=5.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g2", "w1", marginal_cost=65.0, capital_cost=1.0, availability=(1.0,)),
        ),
        snapshots=(Snapshot(0, 200.0),),
    )

    nets["C.2"] = Network(
        buses=(
            Bus("v1", (0.0, 0.0)), Bus("v2", (60.0, 40.0)), Bus("v3", (0.0, 0.0)),
            Bus("w1", (0.0, 0.0)), Bus("w2", (80.0, 60.0)), Bus("w3", (60.0, 30.0)), Bus("w4", (0.0, 0.0)),
        ),
        lines=(
            Line("l1", "v1", "v2", x=0.1, capacity=300.0),
            Line("l2", "v2", "v3", x=0.1, capacity=300.0),
            Line("l3", "v3", "v1", x=0.1, capacity=300.0),
            Line("l4", "w1", "w2", x=0.1, capacity=300.0),
            Line("l5", "w2", "w3", x=0.1, capacity=300.0),
            Line("l6", "w3", "w4", x=0.1, capacity=300.0),
            Line("l7", "w4", "w1", x=0.1, capacity=300.0),
            Line("c1", "v1", "w1", x=0.2, capacity=300.0, kind="candidate", capital_cost=30000.0),
            Line("c2", "v3", "w4", x=0.2, capacity=300.0, kind="candidate", capital_cost=45000.0),
        ),
        generators=(
            Generator("g1", "v2", marginal_cost=6.0, capital_cost=1.0, availability=(1.0, 1.0), emission_rate=0.9),
            Generator("g2", "w2", marginal_cost=48.0, capital_cost=1.0, availability=(1.0, 1.0), emission_rate=0.05),
            Generator("g3", "w3", marginal_cost=1.0, capital_cost=0.8, p_nom_max=80.0, availability=(0.4, 0.8)),
        ),
        snapshots=(Snapshot(0, 150.0), Snapshot(1, 100.0)),
        co2_budget=14000.0,
    )

    nets["C.3"] = Network(
        buses=(
            Bus("u1", (0.0,)), Bus("u2", (40.0,)),
            Bus("v1", (0.0,)), Bus("v2", (30.0,)),
            Bus("w1", (0.0,)), Bus("w2", (50.0,)),
        ),
        lines=(
            Line("l1", "u1", "u2", x=0.1, capacity=160.0),
            Line("l2", "v1", "v2", x=0.1, capacity=160.0),
            Line("l3", "w1", "w2", x=0.1, capacity=160.0),
            Line("c3", "u2", "v1", x=0.15, capacity=160.0, kind="candidate", capital_cost=8000.0),
            Line("c1", "v2", "w1", x=0.15, capacity=160.0, kind="candidate", capital_cost=9000.0),
            Line("c2", "v2", "w2", x=0.15, capacity=160.0, kind="candidate", capital_cost=12000.0),
        ),
        generators=(
            Generator("g1", "u1", marginal_cost=4.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g2", "v1", marginal_cost=25.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g3", "w1", marginal_cost=70.0, capital_cost=1.0, availability=(1.0,)),
        ),
        snapshots=(Snapshot(0, 250.0),),
    )

    nets["D.1"] = Network(
        buses=(
            Bus("x1", (0.0,)),
            Bus("y1", (0.0,)), Bus("y2", (50.0,)), Bus("y3", (0.0,)),
            Bus("z1", (0.0,)), Bus("z2", (0.0,)), Bus("z3", (40.0,)), Bus("z4", (0.0,)), Bus("z5", (30.0,)),
        ),
        lines=(
            Line("l1", "y1", "y2", x=0.1, capacity=170.0),
            Line("l2", "y2", "y3", x=0.1, capacity=170.0),
            Line("l3", "y3", "y1", x=0.1, capacity=170.0),
            Line("l4", "z1", "z2", x=0.1, capacity=170.0),
            Line("l5", "z2", "z3", x=0.1, capacity=170.0),
            Line("l6", "z3", "z4", x=0.1, capacity=170.0),
            Line("l7", "z4", "z5", x=0.1, capacity=170.0),
            Line("c1", "x1", "y2", x=0.2, capacity=170.0, kind="candidate", capital_cost=6000.0),
            Line("c2", "y3", "z4", x=0.2, capacity=170.0, kind="candidate", capital_cost=7000.0),
            Line("c3", "z5", "x1", x=0.2, capacity=170.0, kind="candidate", capital_cost=8000.0),
        ),
        generators=(
            Generator("g1", "x1", marginal_cost=5.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g2", "y1", marginal_cost=60.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g3", "z1", marginal_cost=55.0, capital_cost=1.0, availability=(1.0,)),
        ),
        snapshots=(Snapshot(0, 200.0),),
    )

    nets["D.2"] = Network(
        buses=(Bus("s1", (0.0,)), Bus("s2", (60.0,)), Bus("s3", (40.0,))),
        lines=(
            Line("c1", "s1", "s2", x=0.15, capacity=140.0, kind="candidate", capital_cost=3000.0, corridor="p12"),
            Line("c2", "s1", "s2", x=0.15, capacity=140.0, kind="candidate", capital_cost=5000.0, corridor="p12"),
            Line("c3", "s2", "s3", x=0.15, capacity=140.0, kind="candidate", capital_cost=4000.0, corridor="p23"),
            Line("c4", "s2", "s3", x=0.15, capacity=140.0, kind="candidate", capital_cost=6000.0, corridor="p23"),
            Line("c5", "s1", "s3", x=0.15, capacity=140.0, kind="candidate", capital_cost=4500.0, corridor="p13"),
            Line("c6", "s1", "s3", x=0.15, capacity=140.0, kind="candidate", capital_cost=8000.0, corridor="p13"),
        ),
        generators=(
            Generator("g1", "s1", marginal_cost=5.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g2", "s2", marginal_cost=55.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g3", "s3", marginal_cost=60.0, capital_cost=1.0, availability=(1.0,)),
        ),
        snapshots=(Snapshot(0, 200.0),),
    )

    # loads sit at 70% of capacity here, so a halved big-M provably cuts
    # into the reachable angle range while the full one keeps 30% slack
    nets["NEG.1"] = Network(
        buses=(Bus("a1", (0.0,)), Bus("a2", (0.0,)), Bus("a3", (70.0,))),
        lines=(
            Line("l1", "a1", "a2", x=0.1, capacity=100.0),
            Line("l2", "a2", "a3", x=0.1, capacity=100.0),
            Line("c1", "a1", "a3", x=0.05, capacity=100.0, kind="candidate", capital_cost=10000.0),
        ),
        generators=(
            Generator("g1", "a1", marginal_cost=5.0, capital_cost=1.0, availability=(1.0,)),
            Generator("g2", "a3", marginal_cost=50.0, capital_cost=1.0, availability=(1.0,)),
        ),
        snapshots=(Snapshot(0, 100.0),),
    )

    for net in nets.values():
        validate_network(net)
    return nets
