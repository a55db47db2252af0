"""Branch and bound over the LP relaxation, plus the exhaustive oracle.

Best-first search with most-fractional branching; every tie is broken by
column name, and heap ties by insertion order, so searches replay
identically run to run.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

from ..problem import MilpProblem
from .simplex import CompiledProblem, LpResult, compile_problem, solve_compiled

INT_TOL = 1e-6
PRUNE_EPS = 1e-9


class TooManyBinaries(Exception):
    """The exhaustive oracle refuses beyond its enumeration cap."""

    def __init__(self, count: int, cap: int) -> None:
        super().__init__(f"{count} binaries exceed the bruteforce cap of {cap}")
        self.count = count
        self.cap = cap


@dataclass
class Solution:
    """Solver outcome with primal values and both objective bounds."""

    status: str  # optimal | gap_reached | infeasible | unbounded | time_limit | node_limit
    objective_upper: float
    objective_lower: float
    values: dict[str, float] = field(default_factory=dict)
    activities: dict[str, float] = field(default_factory=dict)
    build_seconds: float = 0.0
    solve_seconds: float = 0.0
    node_count: int = 0
    iterations: int = 0

    @property
    def gap(self) -> float:
        if not (math.isfinite(self.objective_upper) and math.isfinite(self.objective_lower)):
            return math.inf
        return (self.objective_upper - self.objective_lower) / max(1.0, abs(self.objective_upper))

    @property
    def feasible(self) -> bool:
        return self.status in ("optimal", "gap_reached", "time_limit", "node_limit") and math.isfinite(
            self.objective_upper
        )

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "objective_upper": None if not math.isfinite(self.objective_upper) else self.objective_upper,
            "objective_lower": None
            if not math.isfinite(self.objective_lower)
            else self.objective_lower,
            "gap": None if not math.isfinite(self.gap) else self.gap,
            "values": self.values,
            "build_seconds": self.build_seconds,
            "solve_seconds": self.solve_seconds,
            "node_count": self.node_count,
            "iterations": self.iterations,
        }


def _package(
    p: MilpProblem,
    status: str,
    upper: float,
    lower: float,
    best: LpResult | None,
    nodes: int,
    iters: int,
    t0: float,
) -> Solution:
    values: dict[str, float] = {}
    activities: dict[str, float] = {}
    if best is not None and best.x is not None:
        values = {col.name: float(best.x[j]) for j, col in enumerate(p.columns)}
        activities = p.row_activity(values)
    return Solution(
        status=status,
        objective_upper=upper,
        objective_lower=lower,
        values=values,
        activities=activities,
        solve_seconds=time.perf_counter() - t0,
        node_count=nodes,
        iterations=iters,
    )


def solve_lp(p: MilpProblem, fixed: dict[str, float] | None = None) -> Solution:
    """Solve the LP relaxation (binaries stay within their box bounds)."""
    t0 = time.perf_counter()
    cp = compile_problem(p)
    overrides = []
    if fixed:
        for name, v in fixed.items():
            overrides.append((p.column_index(name), float(v), float(v)))
    res = solve_compiled(cp, overrides)
    if res.status == "optimal":
        return _package(p, "optimal", res.objective, res.objective, res, 1, res.iterations, t0)
    bound = math.inf if res.status == "infeasible" else -math.inf
    return _package(p, res.status, math.inf, bound, None, 1, res.iterations, t0)


def solve_milp(
    p: MilpProblem,
    mip_gap: float = 0.005,
    time_limit: float | None = None,
    node_limit: int | None = None,
) -> Solution:
    """Best-first branch and bound to the requested relative gap.

    Status is "optimal" when the tree is exhausted, "gap_reached" when the
    incumbent is proven within ``mip_gap`` early; limits yield
    "time_limit"/"node_limit" with honest bounds either way.
    """
    t0 = time.perf_counter()
    cp = compile_problem(p)
    by_name = sorted(range(len(p.columns)), key=lambda j: p.columns[j].name)
    bin_order = [j for j in by_name if p.columns[j].is_binary]

    counter = itertools.count()
    heap: list[tuple[float, int, dict[int, float]]] = [(-math.inf, next(counter), {})]
    incumbent: LpResult | None = None
    inc_obj = math.inf
    nodes = 0
    iters = 0
    status: str | None = None
    lower_at_stop = -math.inf

    while heap:
        bound, _, fixing = heapq.heappop(heap)
        if bound >= inc_obj - PRUNE_EPS * max(1.0, abs(inc_obj)):
            continue
        if incumbent is not None and (inc_obj - bound) <= mip_gap * max(1.0, abs(inc_obj)):
            status, lower_at_stop = "gap_reached", bound
            break
        if time_limit is not None and time.perf_counter() - t0 >= time_limit:
            status, lower_at_stop = "time_limit", bound
            break
        if node_limit is not None and nodes >= node_limit:
            status, lower_at_stop = "node_limit", bound
            break

        nodes += 1
        res = solve_compiled(cp, [(j, v, v) for j, v in fixing.items()])
        iters += res.iterations
        if res.status == "infeasible":
            continue
        if res.status == "unbounded":
            return _package(p, "unbounded", -math.inf, -math.inf, None, nodes, iters, t0)
        assert res.objective is not None and res.x is not None
        if res.objective >= inc_obj - PRUNE_EPS * max(1.0, abs(inc_obj)):
            continue

        branch_j = -1
        branch_score = math.inf
        for j in bin_order:
            if j in fixing:
                continue
            v = res.x[j]
            if abs(v - round(v)) > INT_TOL:
                score = abs(v - 0.5)
                if score < branch_score:
                    branch_score = score
                    branch_j = j
        if branch_j < 0:
            incumbent = res
            inc_obj = res.objective
            continue
        for v in (0.0, 1.0):
            child = dict(fixing)
            child[branch_j] = v
            heapq.heappush(heap, (res.objective, next(counter), child))

    if status is None:
        if incumbent is None:
            return _package(p, "infeasible", math.inf, math.inf, None, nodes, iters, t0)
        status, lower_at_stop = "optimal", inc_obj
    if incumbent is None:
        return _package(p, status, math.inf, lower_at_stop, None, nodes, iters, t0)
    return _package(p, status, inc_obj, lower_at_stop, incumbent, nodes, iters, t0)


def bruteforce_milp(p: MilpProblem, cap: int = 20) -> Solution:
    """Exhaustive oracle: every binary assignment as its own LP.

    Deterministic and gap-free; refuses more than ``cap`` binaries. The
    first assignment attaining the optimum (in lexicographic assignment
    order over name-sorted binaries) is returned.
    """
    t0 = time.perf_counter()
    by_name = sorted(range(len(p.columns)), key=lambda j: p.columns[j].name)
    bins = [j for j in by_name if p.columns[j].is_binary]
    if len(bins) > cap:
        raise TooManyBinaries(len(bins), cap)
    cp = compile_problem(p)

    best: LpResult | None = None
    best_obj = math.inf
    nodes = 0
    iters = 0
    for bits in itertools.product((0.0, 1.0), repeat=len(bins)):
        nodes += 1
        res = solve_compiled(cp, [(j, v, v) for j, v in zip(bins, bits)])
        iters += res.iterations
        if res.status == "unbounded":
            return _package(p, "unbounded", -math.inf, -math.inf, None, nodes, iters, t0)
        if res.status == "optimal" and res.objective < best_obj:
            best = res
            best_obj = res.objective
    if best is None:
        return _package(p, "infeasible", math.inf, math.inf, None, nodes, iters, t0)
    return _package(p, "optimal", best_obj, best_obj, best, nodes, iters, t0)
