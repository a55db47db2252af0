"""Solution checking and angle recovery.

The cycle formulation never carries bus angles, so they are rebuilt here
from the accepted flows: per synchronous zone of the as-built network,
solve the weighted-Laplacian system for the net injections and pin the
slack bus to zero. A solution passes verification only if the recovered
angles reproduce every flow, which is exactly the loop consistency the
formulations are meant to guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .graph import cycle_basis
from .netmodel import Network, apply_investment, incidence_matrix, synchronous_zones

PHYS_TOL = 1e-6
BUILD_TOL = 1e-6


class PostprocError(Exception):
    pass


class SingularLaplacian(PostprocError):
    """A zone's reduced susceptance matrix could not be factorised."""

    def __init__(self, zone_id: int) -> None:
        super().__init__(f"singular susceptance matrix in zone {zone_id}")
        self.zone_id = zone_id


class UnbalancedInjections(PostprocError):
    """Injections do not sum to zero within a synchronous zone."""

    def __init__(self, zone_id: int, imbalance: float) -> None:
        super().__init__(f"zone {zone_id} injections off by {imbalance:.6g} MW")
        self.zone_id = zone_id
        self.imbalance = imbalance


class VerificationFailure(PostprocError):
    """One or more physics checks rejected the solution."""

    def __init__(self, failures: list[str]) -> None:
        super().__init__("; ".join(failures[:8]) + ("" if len(failures) <= 8 else f"; +{len(failures) - 8} more"))
        self.failures = failures


@dataclass(frozen=True)
class FlowReport:
    """Verified operating point, all quantities recomputed from the raw values."""

    objective: float
    built: tuple[str, ...]
    flows: dict[tuple[str, int], float]
    angles: dict[tuple[str, int], float]
    dispatch: dict[tuple[str, int], float]
    capacity: dict[str, float]
    emissions: float
    max_kcl_residual: float
    max_kvl_residual: float
    max_angle_flow_gap: float

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "built": list(self.built),
            "capacity": self.capacity,
            "emissions": self.emissions,
            "flows": {f"{lid}:{t}": v for (lid, t), v in self.flows.items()},
            "angles": {f"{b}:{t}": v for (b, t), v in self.angles.items()},
            "dispatch": {f"{g}:{t}": v for (g, t), v in self.dispatch.items()},
            "residuals": {
                "kcl": self.max_kcl_residual,
                "kvl": self.max_kvl_residual,
                "angle_flow": self.max_angle_flow_gap,
            },
        }


def recover_angles(net: Network, injections: np.ndarray, built: Iterable[str] = ()) -> np.ndarray:
    """Bus angles reproducing the given net injections on the built grid.

    ``injections`` is (n_buses, n_snapshots) in the bus order of ``net``.
    Each zone must balance to zero; the zone slack bus gets angle zero.
    """
    asbuilt = apply_investment(net, built)
    inj = np.asarray(injections, dtype=float)
    if inj.shape != (len(net.buses), net.n_snapshots):
        raise ValueError(f"injections must be shaped {(len(net.buses), net.n_snapshots)}, got {inj.shape}")

    zones = synchronous_zones(asbuilt)
    bus_index = asbuilt.bus_index
    theta = np.zeros_like(inj)
    lines = asbuilt.existing_lines

    for zone in zones:
        members = sorted(zone.buses)
        local = {b: k for k, b in enumerate(members)}
        nz = len(members)
        total = inj[[bus_index[b] for b in members], :].sum(axis=0)
        scale = max(1.0, float(np.abs(inj).max()))
        worst = float(np.abs(total).max()) if total.size else 0.0
        if worst > PHYS_TOL * scale * max(1, nz):
            raise UnbalancedInjections(zone.id, worst)

        lap = np.zeros((nz, nz))
        for line in lines:
            if line.from_bus not in zone.buses:
                continue
            u, v = local[line.from_bus], local[line.to_bus]
            w = 1.0 / line.x
            lap[u, u] += w
            lap[v, v] += w
            lap[u, v] -= w
            lap[v, u] -= w

        slack = local[zone.slack_bus]
        keep = [k for k in range(nz) if k != slack]
        if not keep:
            continue  # single-bus zone, angle stays zero
        reduced = lap[np.ix_(keep, keep)]
        rhs = inj[[bus_index[members[k]] for k in keep], :]
        try:
            sol = np.linalg.solve(reduced, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularLaplacian(zone.id) from exc
        if not np.all(np.isfinite(sol)):
            raise SingularLaplacian(zone.id)
        for row, k in enumerate(keep):
            theta[bus_index[members[k]], :] = sol[row, :]
    return theta


def _value(values: Mapping[str, float], key: str) -> float:
    return float(values.get(key, 0.0))


def verify_solution(net: Network, values: Mapping[str, float], objective: float | None = None) -> FlowReport:
    """Recompute every physical constraint from raw variable values.

    Checks, all at ``PHYS_TOL`` relative to the quantity's own scale:
    binary integrality, zero flow on unbuilt candidates, nodal balance,
    dispatch and capacity limits, thermal limits, loop consistency on a
    freshly computed cycle basis of the as-built network, agreement of
    flows with angles recovered from the injections, the emission budget,
    and (when given) the reported objective. Raises
    :class:`VerificationFailure` listing everything that failed.
    """
    failures: list[str] = []
    T = net.n_snapshots

    built: list[str] = []
    for line in net.candidate_lines:
        v = _value(values, f"i:{line.id}")
        if min(abs(v), abs(v - 1.0)) > BUILD_TOL:
            failures.append(f"i:{line.id} = {v:.8g} is not integral")
        if v > 0.5:
            built.append(line.id)
    built_set = set(built)

    flows: dict[tuple[str, int], float] = {}
    for line in net.lines:
        for t in range(T):
            flows[(line.id, t)] = _value(values, f"f:{line.id}:{t}")

    dispatch: dict[tuple[str, int], float] = {}
    capacity: dict[str, float] = {}
    for gen in net.generators:
        capacity[gen.id] = _value(values, f"G:{gen.id}")
        for t in range(T):
            dispatch[(gen.id, t)] = _value(values, f"g:{gen.id}:{t}")

    # unbuilt candidates must be electrically absent
    for line in net.candidate_lines:
        if line.id in built_set:
            continue
        for t in range(T):
            f = flows[(line.id, t)]
            if abs(f) > PHYS_TOL * max(1.0, line.capacity):
                failures.append(f"unbuilt {line.id} carries {f:.6g} MW at t={t}")

    # thermal limits
    for line in net.lines:
        if line.is_candidate and line.id not in built_set:
            continue
        for t in range(T):
            f = flows[(line.id, t)]
            if abs(f) > line.capacity + PHYS_TOL * max(1.0, line.capacity):
                failures.append(f"{line.id} overloaded at t={t}: |{f:.6g}| > {line.capacity:.6g}")

    # dispatch within availability and installed capacity within its cap
    for gen in net.generators:
        G = capacity[gen.id]
        if G < -PHYS_TOL or G > gen.p_nom_max + PHYS_TOL * max(1.0, abs(gen.p_nom_max) if np.isfinite(gen.p_nom_max) else 1.0):
            failures.append(f"G:{gen.id} = {G:.6g} outside [0, {gen.p_nom_max:.6g}]")
        for t in range(T):
            g = dispatch[(gen.id, t)]
            avail = gen.availability[t] if gen.availability else 1.0
            cap = avail * G
            if g < -PHYS_TOL * max(1.0, cap) or g > cap + PHYS_TOL * max(1.0, cap):
                failures.append(f"g:{gen.id}:{t} = {g:.6g} outside [0, {cap:.6g}]")

    # nodal balance on the as-built grid
    bus_index = net.bus_index
    load = net.load_matrix
    inj = -load.copy()
    for gen in net.generators:
        for t in range(T):
            inj[bus_index[gen.bus], t] += dispatch[(gen.id, t)]
    max_kcl = 0.0
    net_flow = np.zeros((len(net.buses), T))
    for line in net.lines:
        if line.is_candidate and line.id not in built_set:
            continue
        u, v = bus_index[line.from_bus], bus_index[line.to_bus]
        for t in range(T):
            f = flows[(line.id, t)]
            net_flow[u, t] -= f
            net_flow[v, t] += f
    residual = inj + net_flow
    scale = max(1.0, float(np.abs(load).max()), float(np.abs(inj).max()))
    max_kcl = float(np.abs(residual).max()) if residual.size else 0.0
    if max_kcl > PHYS_TOL * scale:
        worst = np.unravel_index(np.abs(residual).argmax(), residual.shape)
        failures.append(
            f"nodal balance violated at bus {net.buses[worst[0]].id} t={worst[1]}: residual {residual[worst]:.6g} MW"
        )

    # loop consistency on a cycle basis computed from scratch
    asbuilt = apply_investment(net, built)
    basis = cycle_basis(asbuilt)
    max_kvl = 0.0
    for cyc in basis:
        x_scale = max(1.0, max(abs(asbuilt.line_by_id[lid].x * asbuilt.line_by_id[lid].capacity) for lid, _ in cyc.entries))
        for t in range(T):
            s = sum(sign * asbuilt.line_by_id[lid].x * flows[(lid, t)] for lid, sign in cyc.entries)
            max_kvl = max(max_kvl, abs(s))
            if abs(s) > PHYS_TOL * x_scale:
                failures.append(f"loop sum of {cyc.id} at t={t} is {s:.6g}")

    # angles must reproduce the flows exactly
    max_gap = 0.0
    angles: dict[tuple[str, int], float] = {}
    try:
        theta = recover_angles(net, inj, built)
    except PostprocError as exc:
        failures.append(f"angle recovery failed: {exc}")
        theta = None
    if theta is not None:
        for b in net.buses:
            for t in range(T):
                angles[(b.id, t)] = float(theta[bus_index[b.id], t])
        for line in net.lines:
            if line.is_candidate and line.id not in built_set:
                continue
            u, v = bus_index[line.from_bus], bus_index[line.to_bus]
            for t in range(T):
                f_ang = (theta[u, t] - theta[v, t]) / line.x
                gap = abs(f_ang - flows[(line.id, t)])
                max_gap = max(max_gap, gap)
                if gap > PHYS_TOL * max(1.0, line.capacity):
                    failures.append(f"angle flow on {line.id} t={t} differs by {gap:.6g} MW")

    # emission budget
    weights = [s.weight for s in net.snapshots]
    emissions = sum(
        weights[t] * gen.emission_rate * dispatch[(gen.id, t)] for gen in net.generators for t in range(T)
    )
    if net.co2_budget is not None and emissions > net.co2_budget + PHYS_TOL * max(1.0, net.co2_budget):
        failures.append(f"emissions {emissions:.6g} exceed budget {net.co2_budget:.6g}")

    # objective from first principles
    recomputed = sum(net.line_by_id[lid].capital_cost for lid in built)
    recomputed += sum(gen.capital_cost * capacity[gen.id] for gen in net.generators)
    recomputed += sum(
        weights[t] * gen.marginal_cost * dispatch[(gen.id, t)] for gen in net.generators for t in range(T)
    )
    if objective is not None and abs(recomputed - objective) > PHYS_TOL * max(1.0, abs(objective)):
        failures.append(f"objective mismatch: reported {objective:.8g}, recomputed {recomputed:.8g}")

    if failures:
        raise VerificationFailure(failures)
    return FlowReport(
        objective=recomputed,
        built=tuple(sorted(built)),
        flows=flows,
        angles=angles,
        dispatch=dispatch,
        capacity=capacity,
        emissions=emissions,
        max_kcl_residual=max_kcl,
        max_kvl_residual=max_kvl,
        max_angle_flow_gap=max_gap,
    )
