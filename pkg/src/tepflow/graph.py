"""Cycle and path machinery on the network multigraph.

Provides the existing-grid cycle basis, candidate cycles for intra- and
inter-zone expansion lines, the zone-level subnetwork graph and the slack
relaxation plan used by the angle formulation. All traversals use explicit
deterministic tie-breaking so repeated runs emit identical structures.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .netmodel import (
    Line,
    Network,
    SynchronousZone,
    incidence_matrix,
    synchronous_zones,
    zone_of_bus,
)

DEFAULT_CYCLE_CAP = 10_000


class NotAForest(Exception):
    """The zone-level candidate graph contains cycles, so no consistent
    slack relaxation hierarchy exists and the angle formulation is out."""

    def __init__(self, cycles: Sequence[tuple[int, ...]]) -> None:
        super().__init__(f"subnetwork graph has zone-level cycles: {list(cycles)}")
        self.cycles = tuple(cycles)


class CycleExplosion(Exception):
    """Candidate cycle count exceeds the enumeration cap."""

    def __init__(self, count: int, cap: int) -> None:
        super().__init__(f"{count} candidate cycles exceed cap {cap}")
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class CycleSpec:
    """A signed closed walk in the line multigraph.

    ``entries`` lists (line_id, sign) pairs; sign +1 means the walk follows
    the line's from->to orientation. ``gating_candidates`` are the candidate
    lines whose investment variables gate the cycle's voltage-law row.
    """

    id: str
    entries: tuple[tuple[str, int], ...]
    gating_candidates: frozenset[str]

    @property
    def line_ids(self) -> tuple[str, ...]:
        return tuple(lid for lid, _ in self.entries)


@dataclass(frozen=True)
class ZoneEdge:
    """A candidate line viewed at zone level."""

    line_id: str
    zone_from: int
    zone_to: int

    @property
    def pair(self) -> tuple[int, int]:
        return (min(self.zone_from, self.zone_to), max(self.zone_from, self.zone_to))


@dataclass(frozen=True)
class SubnetworkGraph:
    """Multigraph with synchronous zones as nodes and inter-zone candidate
    lines as edges."""

    nodes: tuple[int, ...]
    edges: tuple[ZoneEdge, ...]


@dataclass(frozen=True)
class ZoneRelaxation:
    """One non-root zone with its upstream neighbour and the candidate
    lines whose construction releases the zone's angle reference."""

    zone: int
    upstream: int
    candidates: tuple[str, ...]


@dataclass(frozen=True)
class SlackRelaxationPlan:
    """Rooted-forest orientation of the subnetwork graph.

    ``relaxations`` is ordered root-down (each zone appears after its
    upstream zone), which downstream big-M accumulation relies on.
    """

    roots: tuple[int, ...]
    relaxations: tuple[ZoneRelaxation, ...]

    def for_zone(self, zone: int) -> ZoneRelaxation | None:
        for r in self.relaxations:
            if r.zone == zone:
                return r
        return None


def _adjacency(
    net: Network, lines: Iterable[Line]
) -> dict[str, list[tuple[str, Line, int]]]:
    """bus -> [(neighbour, line, sign)] with sign +1 when leaving from_bus."""
    adj: dict[str, list[tuple[str, Line, int]]] = {b.id: [] for b in net.buses}
    for l in lines:
        adj[l.from_bus].append((l.to_bus, l, 1))
        adj[l.to_bus].append((l.from_bus, l, -1))
    for lst in adj.values():
        lst.sort(key=lambda e: (e[0], e[1].id))
    return adj


def shortest_path(
    net: Network,
    source: str,
    target: str,
    weight: Callable[[Line], float] | None = None,
    allowed: Iterable[Line] | None = None,
) -> list[tuple[str, int]] | None:
    """Cheapest signed path from source to target, or None if disconnected.

    Uses Dijkstra on the multigraph of ``allowed`` lines (default: existing
    lines). Ties are broken by fewer hops, then by the lexicographically
    smallest tuple of line ids, so the result is unique and reproducible.
    """
    if weight is None:
        weight = lambda l: 1.0
    if allowed is None:
        allowed = net.existing_lines
    adj = _adjacency(net, allowed)
    if source == target:
        return []

    best: dict[str, tuple] = {}
    # heap entries: (dist, hops, line-id tuple, bus, signed path)
    heap: list[tuple] = [(0.0, 0, (), source, [])]
    settled: set[str] = set()
    while heap:
        dist, hops, lids, u, path = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        if u == target:
            return path
        for v, line, sign in adj[u]:
            if v in settled:
                continue
            w = weight(line)
            if w < 0:
                raise ValueError(f"negative weight on line {line.id}")
            key = (dist + w, hops + 1, lids + (line.id,))
            if v not in best or key < best[v]:
                best[v] = key
                heapq.heappush(heap, key + (v, path + [(line.id, sign)]))
    return None


def closed_walk_residual(net: Network, spec: CycleSpec) -> np.ndarray:
    """Signed sum of incidence columns along the walk; zero iff closed."""
    lines = [net.line_by_id[lid] for lid, _ in spec.entries]
    K = incidence_matrix(net, lines)
    signs = np.array([s for _, s in spec.entries], dtype=np.int64)
    return K.astype(np.int64) @ signs


def cycle_basis(net: Network) -> tuple[CycleSpec, ...]:
    """Fundamental cycles of the existing grid, one per non-tree line.

    Per zone, a BFS spanning tree is grown from the slack bus (neighbours
    visited in sorted order); every remaining existing line is a chord and
    closes exactly one cycle with its tree path. Yields
    |existing lines| - |buses| + |zones| independent cycles.
    """
    zones = synchronous_zones(net)
    adj = _adjacency(net, net.existing_lines)
    specs: list[CycleSpec] = []

    for zone in zones:
        # parent[bus] = (parent bus, line, sign of parent->bus traversal)
        parent: dict[str, tuple[str, Line, int] | None] = {zone.slack_bus: None}
        depth = {zone.slack_bus: 0}
        tree_lines: set[str] = set()
        queue = [zone.slack_bus]
        while queue:
            u = queue.pop(0)
            for v, line, sign in adj[u]:
                if v not in parent:
                    parent[v] = (u, line, sign)
                    depth[v] = depth[u] + 1
                    tree_lines.add(line.id)
                    queue.append(v)

        chords = sorted(
            (
                l
                for l in net.existing_lines
                if l.id not in tree_lines and l.from_bus in zone.buses
            ),
            key=lambda l: l.id,
        )
        for chord in chords:
            entries = [(chord.id, 1)] + _tree_path(parent, depth, chord.to_bus, chord.from_bus)
            specs.append(
                CycleSpec(id=f"basis:{chord.id}", entries=tuple(entries), gating_candidates=frozenset())
            )
    return tuple(specs)


def _tree_path(
    parent: dict[str, tuple[str, Line, int] | None],
    depth: dict[str, int],
    source: str,
    target: str,
) -> list[tuple[str, int]]:
    """Signed walk source -> target inside a rooted spanning tree."""
    up_src: list[tuple[str, int]] = []
    up_tgt: list[tuple[str, int]] = []
    a, b = source, target
    while depth[a] > depth[b]:
        p, line, sign = parent[a]  # type: ignore[misc]
        up_src.append((line.id, -sign))  # walking child -> parent
        a = p
    while depth[b] > depth[a]:
        p, line, sign = parent[b]  # type: ignore[misc]
        up_tgt.append((line.id, sign))  # will be reversed: parent -> child
        b = p
    while a != b:
        p, line, sign = parent[a]  # type: ignore[misc]
        up_src.append((line.id, -sign))
        a = p
        p, line, sign = parent[b]  # type: ignore[misc]
        up_tgt.append((line.id, sign))
        b = p
    return up_src + up_tgt[::-1]


def candidate_cycles_intra(net: Network) -> tuple[CycleSpec, ...]:
    """One cycle per candidate whose endpoints share a zone: the candidate
    plus the unit-weight shortest path over existing lines back between its
    endpoints. The path never uses other candidates, so each cycle is gated
    by its own candidate alone."""
    zones = synchronous_zones(net)
    zmap = zone_of_bus(zones)
    specs: list[CycleSpec] = []
    for cand in net.candidate_lines:
        if zmap[cand.from_bus] != zmap[cand.to_bus]:
            continue
        back = shortest_path(net, cand.to_bus, cand.from_bus)
        assert back is not None  # same zone means connected by existing lines
        entries = tuple([(cand.id, 1)] + back)
        specs.append(
            CycleSpec(id=f"cand:{cand.id}", entries=entries, gating_candidates=frozenset({cand.id}))
        )
    return tuple(specs)


def subnetwork_graph(net: Network) -> SubnetworkGraph:
    """Zone-level multigraph spanned by inter-zone candidate lines."""
    zones = synchronous_zones(net)
    zmap = zone_of_bus(zones)
    edges = tuple(
        ZoneEdge(l.id, zmap[l.from_bus], zmap[l.to_bus])
        for l in net.candidate_lines
        if zmap[l.from_bus] != zmap[l.to_bus]
    )
    return SubnetworkGraph(nodes=tuple(z.id for z in zones), edges=edges)


def _simple_zone_cycles(
    nodes: Sequence[int], pairs: Iterable[tuple[int, int]]
) -> list[tuple[int, ...]]:
    """All simple cycles (>= 3 nodes) of a small undirected simple graph.

    Cycles are rooted at their smallest node and oriented so the second
    node is smaller than the last, giving one canonical copy each.
    """
    pair_set = {frozenset(p) for p in pairs}
    adj = {
        u: sorted(v for v in nodes if v != u and frozenset((u, v)) in pair_set)
        for u in nodes
    }
    out: list[tuple[int, ...]] = []

    def dfs(start: int, u: int, path: list[int], visited: set[int]) -> None:
        for v in adj[u]:
            if v == start and len(path) >= 3:
                if path[1] < path[-1]:
                    out.append(tuple(path))
            elif v > start and v not in visited:
                visited.add(v)
                path.append(v)
                dfs(start, v, path, visited)
                path.pop()
                visited.remove(v)

    for s in sorted(nodes):
        dfs(s, s, [s], {s})
    out.sort()
    return out


def candidate_cycles_inter(
    net: Network,
    sg: SubnetworkGraph | None = None,
    cap: int = DEFAULT_CYCLE_CAP,
) -> tuple[CycleSpec, ...]:
    """Candidate cycles closing through two or more zones.

    Every simple cycle of the zone-level multigraph (including two-edge
    cycles from parallel candidates between the same zone pair) is expanded
    to line level by joining consecutive candidates with unit-weight
    shortest connector paths over each zone's existing lines. The number of
    cycles is the product of parallel-candidate counts along each zone
    cycle; enumeration aborts with CycleExplosion beyond ``cap``.
    """
    if sg is None:
        sg = subnetwork_graph(net)
    zones = synchronous_zones(net)
    zmap = zone_of_bus(zones)

    by_pair: dict[tuple[int, int], list[ZoneEdge]] = {}
    for e in sg.edges:
        by_pair.setdefault(e.pair, []).append(e)
    for lst in by_pair.values():
        lst.sort(key=lambda e: e.line_id)

    zone_cycles = _simple_zone_cycles(sg.nodes, by_pair.keys())

    count = sum(
        len(lst) * (len(lst) - 1) // 2 for lst in by_pair.values()
    )
    for zc in zone_cycles:
        prod = 1
        for k in range(len(zc)):
            prod *= len(by_pair[(min(zc[k], zc[(k + 1) % len(zc)]), max(zc[k], zc[(k + 1) % len(zc)]))])
        count += prod
    if count > cap:
        raise CycleExplosion(count, cap)

    specs: list[CycleSpec] = []

    def connector(zone: int, frm: str, to: str) -> list[tuple[str, int]]:
        path = shortest_path(net, frm, to)
        assert path is not None, f"zone {zone} lost connectivity"
        return path

    def expand(seq: list[ZoneEdge], zseq: list[int]) -> CycleSpec:
        """Walk zones zseq[0] -> zseq[1] -> ... -> zseq[0] via candidates seq."""
        entries: list[tuple[str, int]] = []
        k = len(seq)
        arrival: list[str] = []  # bus where the walk enters zone zseq[i+1]
        departure: list[str] = []  # bus where the walk leaves zone zseq[i]
        signs: list[int] = []
        for i, edge in enumerate(seq):
            line = net.line_by_id[edge.line_id]
            if zmap[line.from_bus] == zseq[i]:
                signs.append(1)
                departure.append(line.from_bus)
                arrival.append(line.to_bus)
            else:
                signs.append(-1)
                departure.append(line.to_bus)
                arrival.append(line.from_bus)
        for i, edge in enumerate(seq):
            entries.append((edge.line_id, signs[i]))
            nxt = (i + 1) % k
            entries.extend(connector(zseq[nxt] if nxt else zseq[0], arrival[i], departure[nxt]))
        gating = frozenset(e.line_id for e in seq)
        return CycleSpec(
            id="zcyc:" + "+".join(sorted(gating)), entries=tuple(entries), gating_candidates=gating
        )

    # two-edge cycles from parallel candidates
    for pair in sorted(by_pair):
        lst = by_pair[pair]
        for ea, eb in itertools.combinations(lst, 2):
            specs.append(expand([ea, eb], [pair[0], pair[1]]))

    # longer cycles over distinct zones
    for zc in zone_cycles:
        hop_pairs = [
            (min(zc[i], zc[(i + 1) % len(zc)]), max(zc[i], zc[(i + 1) % len(zc)]))
            for i in range(len(zc))
        ]
        for combo in itertools.product(*(by_pair[p] for p in hop_pairs)):
            specs.append(expand(list(combo), list(zc)))

    specs.sort(key=lambda s: (len(s.gating_candidates), s.id))
    return tuple(specs)


def slack_relaxation_plan(
    sg: SubnetworkGraph,
    strategy: str = "breadth_first_central",
    roots: Sequence[int] | None = None,
) -> SlackRelaxationPlan:
    """Choose a root zone per subnetwork tree and orient it root-down.

    Parallel candidates between the same zone pair share one tree edge and
    form a joint relaxing set. Strategies: ``breadth_first_central`` roots
    at a minimum-eccentricity zone, ``depth_first`` at a maximum-
    eccentricity zone, ``explicit`` takes ``roots`` (one per tree). Ties go
    to the smallest zone id. Raises NotAForest when the simple zone graph
    contains a cycle.
    """
    nodes = sorted(sg.nodes)
    by_pair: dict[tuple[int, int], list[str]] = {}
    for e in sg.edges:
        by_pair.setdefault(e.pair, []).append(e.line_id)
    for lst in by_pair.values():
        lst.sort()

    cycles = _simple_zone_cycles(nodes, by_pair.keys())
    if cycles:
        raise NotAForest(cycles)

    adj: dict[int, list[int]] = {u: [] for u in nodes}
    for a, b in by_pair:
        adj[a].append(b)
        adj[b].append(a)
    for lst2 in adj.values():
        lst2.sort()

    # split into components
    comps: list[list[int]] = []
    seen: set[int] = set()
    for s in nodes:
        if s in seen:
            continue
        comp = [s]
        seen.add(s)
        queue = [s]
        while queue:
            u = queue.pop(0)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    queue.append(v)
        comps.append(sorted(comp))

    def bfs_depths(start: int) -> dict[int, int]:
        depth = {start: 0}
        queue = [start]
        while queue:
            u = queue.pop(0)
            for v in adj[u]:
                if v not in depth:
                    depth[v] = depth[u] + 1
                    queue.append(v)
        return depth

    explicit = list(roots) if roots is not None else []
    chosen_roots: list[int] = []
    relaxations: list[ZoneRelaxation] = []
    for comp in comps:
        if strategy == "explicit":
            inside = [r for r in explicit if r in comp]
            if len(inside) != 1:
                raise ValueError(
                    f"explicit roots must name exactly one zone per tree, got {inside} for {comp}"
                )
            root = inside[0]
        else:
            ecc = {u: max(bfs_depths(u).values()) for u in comp}
            if strategy == "breadth_first_central":
                root = min(comp, key=lambda u: (ecc[u], u))
            elif strategy == "depth_first":
                root = min(comp, key=lambda u: (-ecc[u], u))
            else:
                raise ValueError(f"unknown strategy {strategy!r}")
        chosen_roots.append(root)

        # orient root-down in BFS order
        parent: dict[int, int] = {}
        order: list[int] = []
        depth = {root: 0}
        queue = [root]
        while queue:
            u = queue.pop(0)
            for v in adj[u]:
                if v not in depth:
                    depth[v] = depth[u] + 1
                    parent[v] = u
                    order.append(v)
                    queue.append(v)
        for v in order:
            u = parent[v]
            pair = (min(u, v), max(u, v))
            relaxations.append(
                ZoneRelaxation(zone=v, upstream=u, candidates=tuple(by_pair[pair]))
            )

    return SlackRelaxationPlan(roots=tuple(chosen_roots), relaxations=tuple(relaxations))


def dump_graphs(net: Network, directory: str | Path) -> None:
    """Debug export: cycles as a signed edge list, zone graph as DOT."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sg = subnetwork_graph(net)
    basis = cycle_basis(net)
    intra = candidate_cycles_intra(net)
    try:
        inter = candidate_cycles_inter(net, sg)
    except CycleExplosion:
        inter = ()

    with open(directory / "cycles.txt", "w") as fh:
        for spec in list(basis) + list(intra) + list(inter):
            arrows = " ".join(f"{'+' if s > 0 else '-'}{lid}" for lid, s in spec.entries)
            gate = ",".join(sorted(spec.gating_candidates)) or "-"
            fh.write(f"{spec.id}\tgate={gate}\t{arrows}\n")

    with open(directory / "subnetwork.dot", "w") as fh:
        fh.write("graph subnetwork {\n")
        for z in sg.nodes:
            fh.write(f"  z{z};\n")
        for e in sg.edges:
            fh.write(f'  z{e.zone_from} -- z{e.zone_to} [label="{e.line_id}"];\n')
        fh.write("}\n")
