"""Shared fixtures plus the acceptance summary printed after each run."""

from __future__ import annotations

import re

import pytest

from tepflow.instancegen import acceptance_suite, fixtures, generate


@pytest.fixture(scope="session")
def fixture_nets():
    return fixtures()


@pytest.fixture(scope="session")
def suite_nets():
    """The full generated acceptance pool, built once per session."""
    return [(spec, generate(spec)) for spec in acceptance_suite()]


CRITERIA = {
    1: "formulation equivalence on the generated pool (cross bounds, oracle agreement, < 5 min)",
    2: "big-M validity for every assignment, removal equality, negative control caught",
    3: "cycle basis dimension |L0| - |N| + zones and exact full row rank",
    4: "pinned fixture structures (B.1, B.2, C.2, D.1, D.2)",
    5: "column identity |N|*T and nonzero reduction on meshed fixtures",
    6: "physics residuals <= 1e-6 on every solved instance",
    7: "benchmark harness internal consistency and self-race control",
    8: "LP export/import preserves optima to 1e-9 on all fixtures, < 1 min",
}

_outcomes: dict[int, list[str]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes.setdefault(num, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        outcomes = _outcomes.get(num)
        if not outcomes:
            verdict = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            verdict = "PASS"
        else:
            verdict = "FAIL"
        terminalreporter.write_line(f"criterion {num} [{verdict}]: {CRITERIA[num]}")
