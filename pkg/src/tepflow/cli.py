"""Command line front end: generate, solve, export, verify, benchmark.

Exit codes:
    0   success
    1   bad input: missing or invalid file, malformed instance matrix
    2   solver outcome is infeasible or unbounded, or the solver's own
        numerical audit failed
    3   a check failed: audit violation, cross-formulation bound rule
        breach, physics verification failure
    4   angle formulation unsupported on this topology (zone graph has
        a cycle); rerun with --formulation cycle
    5   exhaustive enumeration refused: too many binary variables
    130 interrupted

All JSON and CSV outputs are deterministic for fixed inputs and flags;
wall-clock timings live in dedicated fields or columns and are the only
thing expected to differ between identical runs.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .benchmark import CSV_HEADER, NOISE_BAND, csv_row, race, self_race
from .formulation import (
    ANGLE,
    CYCLE,
    AngleFormulationUnsupported,
    FormulationConfig,
    analyze,
    build,
)
from .instancegen import GenerationFailure, InstanceSpec, fixtures, generate
from .netmodel import Network, NetworkError, load_network, save_network
from .postproc import PostprocError, VerificationFailure, verify_solution
from .solver import NumericalFailure, TooManyBinaries, solve_milp, write_lp, write_mps
from .verify import oracle_audit

log = logging.getLogger("tepflow")

OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2
EXIT_CHECK = 3
EXIT_UNSUPPORTED = 4
EXIT_ENUMERATION = 5
EXIT_INTERRUPT = 130

BOUND_RULE_TOL = 1e-6


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(path).write_text(text)


def _emit_json(path: str | None, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True))


def _kinds(formulation: str) -> tuple[str, ...]:
    return (ANGLE, CYCLE) if formulation == "both" else (formulation,)


def cmd_generate(args: argparse.Namespace) -> int:
    if args.fixture is not None:
        table = fixtures()
        if args.fixture not in table:
            log.error("unknown fixture %r; known: %s", args.fixture, ", ".join(sorted(table)))
            return EXIT_INPUT
        net = table[args.fixture]
    else:
        spec = InstanceSpec(
            seed=args.seed,
            n_buses=args.buses,
            n_zones=args.zones,
            n_snapshots=args.snapshots,
            mesh_edges=args.mesh_edges,
            candidates_per_corridor=args.candidates_per_corridor,
            intra_candidates=args.intra_candidates,
            renewable_share=args.renewable_share,
            co2_limited=args.co2_limited,
            zone_cycle=args.zone_cycle,
        )
        net = generate(spec)
    save_network(net, args.out, fmt="auto")
    log.info(
        "wrote %s: %d buses, %d lines (%d candidates), %d generators, %d snapshots",
        args.out,
        len(net.buses),
        len(net.lines),
        len(net.candidate_lines),
        len(net.generators),
        net.n_snapshots,
    )
    return OK


def _solve_one(net: Network, kind: str, args: argparse.Namespace) -> dict:
    cfg = FormulationConfig(kind=kind, bigm_slack_factor=args.bigm_slack_factor)
    prob = build(net, cfg)
    sol = solve_milp(prob, mip_gap=args.mip_gap, time_limit=args.time_limit)
    entry: dict = {"formulation": kind, "solution": sol.to_dict(), "flow_report": None}
    if sol.feasible and not args.skip_physics:
        report = verify_solution(net, sol.values, objective=sol.objective_upper)
        entry["flow_report"] = report.to_dict()
    return entry


def cmd_solve(args: argparse.Namespace) -> int:
    net = load_network(args.network)
    out: dict = {}
    rc = OK
    for kind in _kinds(args.formulation):
        entry = _solve_one(net, kind, args)
        out[kind] = entry
        status = entry["solution"]["status"]
        if status in ("infeasible", "unbounded"):
            rc = max(rc, EXIT_SOLVER)
        log.info("%s: %s objective=%s", kind, status, entry["solution"]["objective_upper"])

    if args.formulation == "both":
        cross = _cross_check(out[ANGLE]["solution"], out[CYCLE]["solution"])
        out["cross_check"] = cross
        if not cross["bound_rule_holds"]:
            log.error("bound rule violated: %s", cross)
            rc = max(rc, EXIT_CHECK)
    _emit_json(args.out, out)
    return rc


def _cross_check(a: dict, c: dict) -> dict:
    """Each formulation's upper bound must dominate the other's lower bound."""

    def geq(upper, lower) -> bool:
        if upper is None or lower is None:  # no bound established, nothing violated
            return True
        return upper >= lower - BOUND_RULE_TOL * max(1.0, abs(upper))

    holds = geq(a["objective_upper"], c["objective_lower"]) and geq(
        c["objective_upper"], a["objective_lower"]
    )
    return {
        "upper_angle": a["objective_upper"],
        "lower_angle": a["objective_lower"],
        "upper_cycle": c["objective_upper"],
        "lower_cycle": c["objective_lower"],
        "bound_rule_holds": holds,
    }


def cmd_export(args: argparse.Namespace) -> int:
    net = load_network(args.network)
    if args.dump_graphs:
        from .graph import dump_graphs

        dump_graphs(net, args.dump_graphs)
        log.info("graph debug dump in %s", args.dump_graphs)
    cfg = FormulationConfig(kind=args.formulation, bigm_slack_factor=args.bigm_slack_factor)
    prob = build(net, cfg)
    fmt = args.format
    if fmt == "auto":
        suffix = Path(args.out).suffix.lower()
        if suffix not in (".lp", ".mps"):
            log.error("cannot infer format from %r; pass --format lp|mps", args.out)
            return EXIT_INPUT
        fmt = suffix[1:]
    if fmt == "lp":
        write_lp(prob, args.out)
    else:
        write_mps(prob, args.out)
    st = prob.stats()
    log.info(
        "wrote %s: %d columns, %d rows, %d nonzeros", args.out, st.columns, st.rows, st.nonzeros
    )
    return OK


def cmd_verify(args: argparse.Namespace) -> int:
    net = load_network(args.network)
    out: dict = {"bigm_scale": args.bigm_scale, "formulations": {}}
    reports = {}
    rc = OK
    for kind in _kinds(args.formulation):
        try:
            rep = oracle_audit(net, kind, bigm_scale=args.bigm_scale, cap=args.max_binaries)
        except AngleFormulationUnsupported as exc:
            if args.formulation != "both":
                raise
            # cycle formulation still covers this topology; record and move on
            out["formulations"][kind] = {"status": "unsupported", "reason": str(exc)}
            log.warning("%s formulation unsupported here: %s", kind, exc)
            continue
        reports[kind] = rep
        out["formulations"][kind] = {
            "status": "violations" if rep.violations else "ok",
            "assignments": rep.assignments,
            "oracle_objective": rep.oracle_objective,
            "oracle_built": list(rep.oracle_built) if rep.oracle_built is not None else None,
            "violations": list(rep.violations),
            "min_vacuous_slack": min(
                (r.min_vacuous_slack for r in rep.results if r.min_vacuous_slack is not None),
                default=None,
            ),
        }
        if rep.violations:
            rc = EXIT_CHECK
            for v in rep.violations:
                log.error("violation: %s", v)

    if len(reports) == 2:
        oa, oc = reports[ANGLE].oracle_objective, reports[CYCLE].oracle_objective
        if (oa is None) != (oc is None):
            agree = False
        elif oa is None:
            agree = True
        else:
            agree = abs(oa - oc) <= 1e-6 * max(1.0, abs(oc))
        out["objectives_agree"] = agree
        if not agree:
            log.error("formulations disagree on the optimum: angle=%s cycle=%s", oa, oc)
            rc = EXIT_CHECK
    _emit_json(args.out, out)
    return rc


def _matrix_instances(path: str) -> list[tuple[str, Network]]:
    try:
        entries = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read instance matrix {path}: {exc}") from exc
    if not isinstance(entries, list) or not entries:
        raise ValueError("instance matrix must be a non-empty JSON array")
    table = None
    out = []
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ValueError(f"matrix entry {k} is not an object")
        entry = dict(entry)
        label = entry.pop("label", None)
        if "fixture" in entry:
            name = entry.pop("fixture")
            if entry:
                raise ValueError(f"matrix entry {k}: fixture takes no other keys, got {entry}")
            if table is None:
                table = fixtures()
            if name not in table:
                raise ValueError(f"matrix entry {k}: unknown fixture {name!r}")
            out.append((label or name, table[name]))
        else:
            try:
                spec = InstanceSpec(**entry)
            except TypeError as exc:
                raise ValueError(f"matrix entry {k}: {exc}") from exc
            out.append((label or f"seed{spec.seed}", generate(spec)))
    return out


def _strip_candidates(net: Network) -> Network:
    return Network(
        buses=net.buses,
        lines=net.existing_lines,
        generators=net.generators,
        snapshots=net.snapshots,
        co2_budget=net.co2_budget,
    )


def cmd_benchmark(args: argparse.Namespace) -> int:
    instances = _matrix_instances(args.matrix)
    sink = sys.stdout if args.out in (None, "-") else open(args.out, "w")
    close_sink = sink is not sys.stdout

    def emit(line: str) -> None:
        sink.write(line + "\n")
        sink.flush()  # keep finished rows on disk if a later solve dies

    speedups: list[float] = []
    interrupted = False
    try:
        emit(CSV_HEADER)
        if args.jobs > 1 and len(instances) > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                futs = [
                    pool.submit(race, net, label, args.repeats, args.mip_gap)
                    for label, net in instances
                ]
                for f in futs:
                    r = f.result()
                    emit(csv_row(r))
                    speedups.append(r.speedup)
        else:
            for label, net in instances:
                r = race(net, label, args.repeats, args.mip_gap)
                emit(csv_row(r))
                speedups.append(r.speedup)
    except KeyboardInterrupt:
        interrupted = True
        log.warning("interrupted; %d of %d instances persisted", len(speedups), len(instances))
    finally:
        pad = [""] * (CSV_HEADER.count(",") - 1)
        if speedups:
            import statistics

            for stat, v in (
                ("mean", statistics.mean(speedups)),
                ("median", statistics.median(speedups)),
                ("max", max(speedups)),
                ("min", min(speedups)),
            ):
                emit(",".join([f"summary_{stat}_speedup", *pad, repr(v)]))
        if not interrupted and not args.no_control:
            label, first = instances[0]
            ratio = self_race(_strip_candidates(first), args.repeats, args.mip_gap)
            emit(",".join([f"control_{label}", *pad, repr(ratio)]))
            lo, hi = NOISE_BAND
            if not lo <= ratio <= hi:
                log.warning("self-race control ratio %.3f outside [%g, %g]", ratio, lo, hi)
        if close_sink:
            sink.close()
    return EXIT_INTERRUPT if interrupted else OK


def cmd_bigm_report(args: argparse.Namespace) -> int:
    net = load_network(args.network)
    cfg = FormulationConfig(bigm_slack_factor=args.bigm_slack_factor)
    art = analyze(net, cfg)
    lines = ["key,rule,value,members"]
    for key in sorted(art.bigms.provenance):
        rec = art.bigms.provenance[key]
        lines.append(f"{key},{rec.rule},{rec.value!r},{'+'.join(rec.members)}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return OK


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tepflow",
        description="Build, solve, export, and cross-verify transmission "
        "expansion planning problems with linearized power flow.",
        epilog="Exit codes: 0 ok, 1 bad input, 2 solver infeasible/unbounded/"
        "numerical failure, 3 check failed, 4 angle formulation unsupported, "
        "5 too many binaries, 130 interrupted.",
    )
    ap.add_argument("--log-level", default="warning", choices=["debug", "info", "warning", "error"])
    ap.add_argument("--seed", type=int, default=0, help="seed for generate")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for benchmark")
    # the same flags are accepted after the subcommand; SUPPRESS keeps the
    # subparser from overwriting a value given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--log-level", choices=["debug", "info", "warning", "error"], default=argparse.SUPPRESS
    )
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser(
        "generate",
        parents=[common],
        help="write a reproducible random instance or a named fixture",
    )
    g.add_argument("--fixture", help="write this named fixture instead of a random instance")
    g.add_argument("--buses", type=int, default=6)
    g.add_argument("--zones", type=int, default=1)
    g.add_argument("--snapshots", type=int, default=1)
    g.add_argument("--mesh-edges", type=int, default=1)
    g.add_argument("--candidates-per-corridor", type=int, default=1)
    g.add_argument("--intra-candidates", type=int, default=1)
    g.add_argument("--renewable-share", type=float, default=0.25)
    g.add_argument("--co2-limited", action="store_true")
    g.add_argument("--zone-cycle", action="store_true")
    g.add_argument("--out", required=True, help="CSV directory, or .json for one document")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", parents=[common], help="solve one network, optionally with both formulations")
    s.add_argument("network", help="network CSV directory or JSON file")
    s.add_argument("--formulation", default="both", choices=[ANGLE, CYCLE, "both"])
    s.add_argument("--mip-gap", type=float, default=1e-6)
    s.add_argument("--time-limit", type=float, default=None, help="seconds")
    s.add_argument("--bigm-slack-factor", type=float, default=1.0)
    s.add_argument("--skip-physics", action="store_true", help="skip the flow re-verification")
    s.add_argument("--out", default=None, help="JSON output path, default stdout")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("export", parents=[common], help="write the MILP as an LP or MPS file")
    e.add_argument("network")
    e.add_argument("--formulation", default=CYCLE, choices=[ANGLE, CYCLE])
    e.add_argument("--format", default="auto", choices=["auto", "lp", "mps"])
    e.add_argument("--bigm-slack-factor", type=float, default=1.0)
    e.add_argument("--dump-graphs", metavar="DIR", help="also dump cycle and zone-graph debug files")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export)

    v = sub.add_parser("verify", parents=[common], help="exhaustively audit big-M validity on a small network")
    v.add_argument("network")
    v.add_argument("--formulation", default="both", choices=[ANGLE, CYCLE, "both"])
    v.add_argument("--bigm-scale", type=float, default=1.0, help="scale every big-M (negative control)")
    v.add_argument("--max-binaries", type=int, default=20)
    v.add_argument("--out", default=None, help="JSON report path, default stdout")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("benchmark", parents=[common], help="race both formulations over an instance matrix")
    b.add_argument("matrix", help="JSON array of instance specs or {'fixture': name} entries")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--mip-gap", type=float, default=1e-9)
    b.add_argument("--no-control", action="store_true", help="skip the self-race control row")
    b.add_argument("--out", default=None, help="CSV output path, default stdout")
    b.set_defaults(func=cmd_benchmark)

    r = sub.add_parser("bigm-report", parents=[common], help="CSV audit trail of every derived big-M")
    r.add_argument("network")
    r.add_argument("--bigm-slack-factor", type=float, default=1.0)
    r.add_argument("--out", default=None, help="CSV output path, default stdout")
    r.set_defaults(func=cmd_bigm_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()), format="%(levelname)s %(message)s"
    )
    try:
        return args.func(args)
    except AngleFormulationUnsupported as exc:
        log.error("%s", exc)
        return EXIT_UNSUPPORTED
    except TooManyBinaries as exc:
        log.error("%s", exc)
        return EXIT_ENUMERATION
    except NumericalFailure as exc:
        log.error("solver numerical audit failed: %s", exc)
        return EXIT_SOLVER
    except VerificationFailure as exc:
        log.error("physics verification failed:\n%s", "\n".join(exc.failures))
        return EXIT_CHECK
    except PostprocError as exc:  # solution too broken to even re-verify
        log.error("%s", exc)
        return EXIT_CHECK
    except (NetworkError, GenerationFailure, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except KeyboardInterrupt:
        return EXIT_INTERRUPT


if __name__ == "__main__":
    raise SystemExit(main())
