"""Timing harness that races the two formulations on equal instances.

Timing ratios depend on hardware, solver implementation, and instance
mix, none of which travel with the code, so the harness never asserts
that one formulation wins. It measures, summarizes, and reports. The
properties worth testing are arithmetic: each speed-up is the ratio of
the recorded times, the summary statistics describe the recorded ratios,
and racing a formulation against itself must land near 1.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from time import perf_counter

from .formulation import ANGLE, CYCLE, FormulationConfig, build
from .netmodel import Network
from .problem import MilpProblem
from .solver import Solution, solve_milp

# self-race ratios outside this band indicate a noisy harness, not code
NOISE_BAND = (1.0 / 3.0, 3.0)


@dataclass(frozen=True)
class FormulationRun:
    """Median timings and final solver outcome for one formulation."""

    kind: str
    build_seconds: float
    solve_seconds: float
    status: str
    objective: float
    nodes: int
    columns: int
    rows: int
    nonzeros: int

    @property
    def total_seconds(self) -> float:
        return self.build_seconds + self.solve_seconds


@dataclass(frozen=True)
class RaceResult:
    """One instance, both formulations."""

    label: str
    n_buses: int
    n_zones: int
    n_candidates: int
    n_snapshots: int
    angle: FormulationRun
    cycle: FormulationRun

    @property
    def speedup(self) -> float:
        """Total-time ratio; > 1 means the cycle formulation won."""
        return self.angle.total_seconds / self.cycle.total_seconds

    @property
    def variable_ratio(self) -> float:
        return self.cycle.columns / self.angle.columns

    @property
    def constraint_ratio(self) -> float:
        return self.cycle.rows / self.angle.rows


CSV_HEADER = (
    "label,buses,zones,candidates,snapshots,"
    "build_angle_s,solve_angle_s,build_cycle_s,solve_cycle_s,"
    "status_angle,status_cycle,nodes_angle,nodes_cycle,"
    "objective_angle,objective_cycle,"
    "columns_angle,columns_cycle,rows_angle,rows_cycle,"
    "nonzeros_angle,nonzeros_cycle,"
    "variable_ratio,constraint_ratio,speedup"
)


def csv_row(r: RaceResult) -> str:
    a, c = r.angle, r.cycle
    return ",".join(
        str(v)
        for v in (
            r.label,
            r.n_buses,
            r.n_zones,
            r.n_candidates,
            r.n_snapshots,
            f"{a.build_seconds:.6f}",
            f"{a.solve_seconds:.6f}",
            f"{c.build_seconds:.6f}",
            f"{c.solve_seconds:.6f}",
            a.status,
            c.status,
            a.nodes,
            c.nodes,
            repr(a.objective),
            repr(c.objective),
            a.columns,
            c.columns,
            a.rows,
            c.rows,
            a.nonzeros,
            c.nonzeros,
            repr(r.variable_ratio),
            repr(r.constraint_ratio),
            repr(r.speedup),
        )
    )


@dataclass(frozen=True)
class BenchmarkReport:
    results: tuple[RaceResult, ...]
    control_label: str | None
    control_ratio: float | None
    repeats: int

    @property
    def speedups(self) -> tuple[float, ...]:
        return tuple(r.speedup for r in self.results)

    def summary(self) -> dict[str, float]:
        s = self.speedups
        if not s:
            return {}
        return {
            "mean": statistics.mean(s),
            "median": statistics.median(s),
            "max": max(s),
            "min": min(s),
        }

    @property
    def control_in_band(self) -> bool | None:
        if self.control_ratio is None:
            return None
        lo, hi = NOISE_BAND
        return lo <= self.control_ratio <= hi

    def to_csv(self) -> str:
        n_fields = CSV_HEADER.count(",") + 1
        pad = [""] * (n_fields - 2)  # label first, speedup last

        def tail_row(label: str, value: float) -> str:
            return ",".join([label, *pad, repr(value)])

        lines = [CSV_HEADER]
        lines.extend(csv_row(r) for r in self.results)
        for stat, v in self.summary().items():
            lines.append(tail_row(f"summary_{stat}_speedup", v))
        if self.control_ratio is not None:
            lines.append(tail_row(f"control_{self.control_label}", self.control_ratio))
        return "\n".join(lines) + "\n"

    def format_table(self) -> str:
        head = (
            f"{'instance':<14}{'buses':>6}{'zones':>6}{'cand':>5}{'T':>3}"
            f"{'cols a/c':>12}{'nnz a/c':>12}{'t_angle':>10}{'t_cycle':>10}{'speedup':>9}"
        )
        lines = [head, "-" * len(head)]
        for r in self.results:
            lines.append(
                f"{r.label:<14}{r.n_buses:>6}{r.n_zones:>6}{r.n_candidates:>5}{r.n_snapshots:>3}"
                f"{f'{r.angle.columns}/{r.cycle.columns}':>12}"
                f"{f'{r.angle.nonzeros}/{r.cycle.nonzeros}':>12}"
                f"{r.angle.total_seconds * 1e3:>8.2f}ms{r.cycle.total_seconds * 1e3:>8.2f}ms"
                f"{r.speedup:>9.2f}"
            )
        s = self.summary()
        if s:
            lines.append("-" * len(head))
            lines.append(
                f"speed-up over {len(self.results)} instances: "
                f"mean {s['mean']:.2f}  median {s['median']:.2f}  "
                f"max {s['max']:.2f}  min {s['min']:.2f}"
            )
        if self.control_ratio is not None:
            verdict = "ok" if self.control_in_band else "OUT OF BAND"
            lines.append(
                f"self-race control ({self.control_label}): ratio "
                f"{self.control_ratio:.2f} [{verdict}]"
            )
        return "\n".join(lines)


def _build_timed(net: Network, kind: str) -> tuple[float, MilpProblem]:
    t0 = perf_counter()
    prob = build(net, FormulationConfig(kind=kind))
    return perf_counter() - t0, prob


def time_formulation(
    net: Network, kind: str, repeats: int = 3, mip_gap: float = 1e-9
) -> FormulationRun:
    """Median build and solve wall times; one warm-up run is discarded."""
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    _, prob = _build_timed(net, kind)
    solve_milp(prob, mip_gap=mip_gap)
    builds, solves = [], []
    sol: Solution | None = None
    for _ in range(repeats):
        dt_b, prob = _build_timed(net, kind)
        t0 = perf_counter()
        sol = solve_milp(prob, mip_gap=mip_gap)
        builds.append(dt_b)
        solves.append(perf_counter() - t0)
    assert sol is not None
    return FormulationRun(
        kind=kind,
        build_seconds=statistics.median(builds),
        solve_seconds=statistics.median(solves),
        status=sol.status,
        objective=sol.objective_upper,
        nodes=sol.node_count,
        columns=len(prob.columns),
        rows=len(prob.rows),
        nonzeros=prob.nonzeros(),
    )


def race(net: Network, label: str, repeats: int = 3, mip_gap: float = 1e-9) -> RaceResult:
    """Time both formulations on one instance.

    Raises AngleFormulationUnsupported on zone-cycle topologies; callers
    racing a generated pool should filter those out first.
    """
    from .graph import synchronous_zones

    run_a = time_formulation(net, ANGLE, repeats, mip_gap)
    run_c = time_formulation(net, CYCLE, repeats, mip_gap)
    return RaceResult(
        label=label,
        n_buses=len(net.buses),
        n_zones=len(synchronous_zones(net)),
        n_candidates=len(net.candidate_lines),
        n_snapshots=net.n_snapshots,
        angle=run_a,
        cycle=run_c,
    )


def self_race(net: Network, repeats: int = 3, mip_gap: float = 1e-9) -> float:
    """Race the cycle formulation against itself; returns the time ratio.

    Anything far from 1 means the measurement is dominated by noise and
    the real ratios in the same report should not be trusted.
    """
    first = time_formulation(net, CYCLE, repeats, mip_gap)
    second = time_formulation(net, CYCLE, repeats, mip_gap)
    return first.total_seconds / second.total_seconds


def run_benchmark(
    instances: list[tuple[str, Network]],
    repeats: int = 3,
    mip_gap: float = 1e-9,
    control: tuple[str, Network] | None = None,
    jobs: int = 1,
) -> BenchmarkReport:
    """Race every instance; with jobs > 1 instances run in worker processes.

    Parallel workers contend for cores, so keep jobs at 1 whenever the
    absolute times matter; the per-instance medians stay self-consistent
    either way because both formulations share each worker.
    """
    if jobs > 1 and len(instances) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = [pool.submit(race, net, label, repeats, mip_gap) for label, net in instances]
            results = [f.result() for f in futs]
    else:
        results = [race(net, label, repeats, mip_gap) for label, net in instances]
    control_label = control_ratio = None
    if control is not None:
        control_label = control[0]
        control_ratio = self_race(control[1], repeats, mip_gap)
    return BenchmarkReport(
        results=tuple(results),
        control_label=control_label,
        control_ratio=control_ratio,
        repeats=repeats,
    )
