"""Exhaustive validity audit of the gated (big-M) constraints.

For every binary assignment, the disjunctive rows that are supposed to be
switched off must stay strictly away from their bound, and the gated
problem's optimum must coincide with the optimum of the physically
reduced network (candidates either removed or hardened into existing
lines) plus the capital of what was built. Scaling the big-M values below
1 deliberately breaks the first property; the audit is expected to catch
that, which is what the negative control asserts.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

from .bigm import BigMSet
from .formulation import (
    ANGLE,
    CYCLE,
    FormulationConfig,
    analyze,
    build_angle,
    build_cycle,
)
from .netmodel import Network, apply_investment
from .problem import MilpProblem
from .solver import TooManyBinaries, solve_lp
from .solver.simplex import compile_problem, solve_compiled

SLACK_THRESHOLD = 1e-6
REL_TOL = 1e-6
ENUM_CAP = 20

# how a gated row is meant to switch off: "unless_all_built" rows are
# vacuous until every gating candidate exists, "when_any_built" rows are
# the zone-reference constraints that must stop binding once any of their
# relaxing candidates is built
UNLESS_ALL_BUILT = "unless_all_built"
WHEN_ANY_BUILT = "when_any_built"


@dataclass(frozen=True)
class AssignmentResult:
    """Outcome of one fixed binary assignment."""

    built: tuple[str, ...]
    status: str
    objective: float | None
    removal_status: str
    removal_objective: float | None  # includes capital of the built lines
    min_vacuous_slack: float | None  # None when no row was switched off
    violations: tuple[str, ...]


@dataclass(frozen=True)
class AuditReport:
    formulation: str
    bigm_scale: float
    results: tuple[AssignmentResult, ...]
    oracle_objective: float | None
    oracle_built: tuple[str, ...] | None

    @property
    def violations(self) -> tuple[str, ...]:
        return tuple(v for r in self.results for v in r.violations)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def assignments(self) -> int:
        return len(self.results)


def scaled_bigms(bigms: BigMSet, scale: float) -> BigMSet:
    """Uniformly rescaled copy; provenance values follow the scaling."""
    if scale <= 0:
        raise ValueError("big-M scale must be positive")
    if scale == 1.0:
        return bigms
    return BigMSet(
        kvl_angle={k: v * scale for k, v in bigms.kvl_angle.items()},
        slack={k: v * scale for k, v in bigms.slack.items()},
        kvl_cycle={k: v * scale for k, v in bigms.kvl_cycle.items()},
        provenance={k: replace(p, value=p.value * scale) for k, p in bigms.provenance.items()},
    )


def _gated_rows(net: Network, art, kind: str) -> dict[str, tuple[str, frozenset[str]]]:
    """Map row name -> (vacuity mode, gating candidate set)."""
    out: dict[str, tuple[str, frozenset[str]]] = {}
    nt = net.n_snapshots
    if kind == ANGLE:
        for cand in net.candidate_lines:
            gate = frozenset((cand.id,))
            for t in range(nt):
                out[f"kvl1:{cand.id}:{t}:hi"] = (UNLESS_ALL_BUILT, gate)
                out[f"kvl1:{cand.id}:{t}:lo"] = (UNLESS_ALL_BUILT, gate)
        if art.plan is not None:
            for r in art.plan.relaxations:
                gate = frozenset(r.candidates)
                for t in range(nt):
                    out[f"slack:z{r.zone}:{t}:hi"] = (WHEN_ANY_BUILT, gate)
                    out[f"slack:z{r.zone}:{t}:lo"] = (WHEN_ANY_BUILT, gate)
    else:
        for spec in art.candidate_cycles:
            gate = frozenset(spec.gating_candidates)
            for t in range(nt):
                out[f"ccyc:{spec.id}:{t}:hi"] = (UNLESS_ALL_BUILT, gate)
                out[f"ccyc:{spec.id}:{t}:lo"] = (UNLESS_ALL_BUILT, gate)
    return out


def removal_objective(net: Network, built: tuple[str, ...]) -> tuple[str, float | None]:
    """Optimum of the plain network with this investment decision baked in.

    Built candidates become existing lines, unbuilt ones disappear; their
    capital is added back so the value is comparable with the gated MILP.
    """
    reduced = apply_investment(net, built)
    cfg = FormulationConfig(kind=CYCLE)
    art = analyze(reduced, cfg)
    prob = build_cycle(reduced, art.basis, art.candidate_cycles, art.bigms, cfg)
    sol = solve_lp(prob)
    if sol.status != "optimal":
        return sol.status, None
    capital = sum(net.line_by_id[lid].capital_cost for lid in built)
    return "optimal", sol.objective_upper + capital


def _build_for_audit(net: Network, kind: str, bigm_scale: float) -> tuple[MilpProblem, dict]:
    cfg = FormulationConfig(kind=kind)
    art = analyze(net, cfg)
    bigms = scaled_bigms(art.bigms, bigm_scale)
    if kind == ANGLE:
        prob = build_angle(net, art.plan, bigms, cfg)
    else:
        prob = build_cycle(net, art.basis, art.candidate_cycles, bigms, cfg)
    return prob, _gated_rows(net, art, kind)


def oracle_audit(
    net: Network,
    kind: str = CYCLE,
    bigm_scale: float = 1.0,
    slack_threshold: float = SLACK_THRESHOLD,
    rel_tol: float = REL_TOL,
    cap: int = ENUM_CAP,
) -> AuditReport:
    """Enumerate all binary assignments and check every gating promise.

    Per assignment: solve the gated LP, require each switched-off row to
    be slack by at least ``slack_threshold``, and require agreement with
    :func:`removal_objective` to ``rel_tol`` (two infeasible outcomes
    agree). Returns the full per-assignment record plus the enumeration
    optimum, which doubles as a gap-free reference for the MILP solver.
    """
    prob, gated = _build_for_audit(net, kind, bigm_scale)
    cands = sorted(l.id for l in net.candidate_lines)
    if len(cands) > cap:
        raise TooManyBinaries(len(cands), cap)
    cp = compile_problem(prob)
    col_of = {c: prob.column_index(f"i:{c}") for c in cands}
    rows_by_name = {r.name: r for r in prob.rows}

    results: list[AssignmentResult] = []
    best: tuple[float, tuple[str, ...]] | None = None
    for bits in itertools.product((0.0, 1.0), repeat=len(cands)):
        chosen = dict(zip(cands, bits))
        built = tuple(c for c in cands if chosen[c] == 1.0)
        violations: list[str] = []
        res = solve_compiled(cp, [(col_of[c], v, v) for c, v in chosen.items()])

        min_slack: float | None = None
        objective: float | None = None
        if res.status == "optimal":
            objective = res.objective
            if best is None or objective < best[0]:
                best = (objective, built)
            values = {col.name: float(res.x[j]) for j, col in enumerate(prob.columns)}
            activities = prob.row_activity(values)
            for name, (mode, gate) in gated.items():
                n_built = sum(chosen[c] for c in gate)
                vacuous = (n_built < len(gate)) if mode == UNLESS_ALL_BUILT else (n_built > 0)
                if not vacuous:
                    continue
                row = rows_by_name[name]
                slack = row.rhs - activities[name] if row.sense == "<=" else activities[name] - row.rhs
                if min_slack is None or slack < min_slack:
                    min_slack = slack
                if slack < slack_threshold:
                    violations.append(
                        f"{kind}/built={','.join(built) or '-'}: gated row {name} has slack {slack:.3g}"
                    )
        elif res.status == "unbounded":
            violations.append(f"{kind}/built={','.join(built) or '-'}: unbounded")

        removal_status, removal_obj = removal_objective(net, built)
        if res.status == "optimal" and removal_status == "optimal":
            assert objective is not None and removal_obj is not None
            if abs(objective - removal_obj) > rel_tol * max(1.0, abs(removal_obj)):
                violations.append(
                    f"{kind}/built={','.join(built) or '-'}: gated optimum {objective:.8g} "
                    f"!= reduced-network optimum {removal_obj:.8g}"
                )
        elif (res.status == "infeasible") != (removal_status == "infeasible"):
            violations.append(
                f"{kind}/built={','.join(built) or '-'}: gated problem {res.status}, "
                f"reduced network {removal_status}"
            )

        results.append(
            AssignmentResult(
                built=built,
                status=res.status,
                objective=objective,
                removal_status=removal_status,
                removal_objective=removal_obj,
                min_vacuous_slack=min_slack,
                violations=tuple(violations),
            )
        )

    return AuditReport(
        formulation=kind,
        bigm_scale=bigm_scale,
        results=tuple(results),
        oracle_objective=best[0] if best else None,
        oracle_built=best[1] if best else None,
    )
