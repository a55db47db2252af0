"""The compiled kernel and its pure-python twin must be interchangeable."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

import tepflow.solver.simplex as simplex
from tepflow.formulation import ANGLE, CYCLE, FormulationConfig, build
from tepflow.problem import MilpProblem
from tepflow.solver import _simplex_py, solve_milp
from tepflow.solver.simplex import BACKEND, compile_problem, solve_compiled

_simplex_cy = pytest.importorskip("tepflow.solver._simplex_cy")


def random_lp(rng: np.random.Generator) -> MilpProblem:
    p = MilpProblem("lp")
    n = int(rng.integers(2, 8))
    for j in range(n):
        shape = int(rng.integers(0, 3))
        lo, hi = {0: (0.0, float(rng.uniform(1, 9))), 1: (-5.0, 5.0), 2: (0.0, np.inf)}[shape]
        p.add_column(f"x{j}", lo, hi, cost=float(rng.uniform(-3, 3)))
    for i in range(int(rng.integers(1, 7))):
        terms = [(f"x{j}", float(rng.uniform(-2, 2))) for j in range(n) if rng.uniform() < 0.6]
        if not terms:
            terms = [("x0", 1.0)]
        sense = ("<=", ">=", "==")[int(rng.integers(0, 3))]
        p.add_row(f"r{i}", terms, sense, float(rng.uniform(-4, 6)))
    return p


def run_with_kernel(monkeypatch, kernel, cp, overrides=()):
    monkeypatch.setattr(simplex, "_kernel", kernel)
    return solve_compiled(cp, list(overrides))


def test_twins_agree_on_random_lps(monkeypatch):
    rng = np.random.default_rng(321)
    for _ in range(40):
        p = random_lp(rng)
        cp = compile_problem(p)
        a = run_with_kernel(monkeypatch, _simplex_py, cp)
        b = run_with_kernel(monkeypatch, _simplex_cy, cp)
        assert a.status == b.status
        if a.status == "optimal":
            # accumulation order may flip a degenerate tie, so the pivot
            # sequences can differ; the optima must not
            assert b.objective == pytest.approx(a.objective, rel=1e-9, abs=1e-9)


def test_twins_agree_on_fixture_problems(monkeypatch, fixture_nets):
    for name in ("A.3", "B.2", "C.2", "D.2"):
        net = fixture_nets[name]
        kinds = (CYCLE,) if name.startswith("D.") else (ANGLE, CYCLE)
        for kind in kinds:
            cp = compile_problem(build(net, FormulationConfig(kind=kind)))
            a = run_with_kernel(monkeypatch, _simplex_py, cp)
            b = run_with_kernel(monkeypatch, _simplex_cy, cp)
            assert a.status == b.status == "optimal"
            assert b.objective == pytest.approx(a.objective, rel=1e-9)


def test_twins_agree_under_overrides(monkeypatch, fixture_nets):
    p = build(fixture_nets["C.3"], FormulationConfig(kind=CYCLE))
    cp = compile_problem(p)
    cands = [j for j in cp.binary_indices]
    for bits in ((0.0, 0.0, 0.0), (1.0, 0.0, 1.0), (1.0, 1.0, 1.0)):
        overrides = [(j, v, v) for j, v in zip(cands, bits)]
        a = run_with_kernel(monkeypatch, _simplex_py, cp, overrides)
        b = run_with_kernel(monkeypatch, _simplex_cy, cp, overrides)
        assert a.status == b.status
        if a.status == "optimal":
            assert b.objective == pytest.approx(a.objective, rel=1e-12)


def test_backend_constant_matches_loaded_kernel():
    assert BACKEND in ("cython", "python")
    assert BACKEND == simplex._kernel.NAME
    assert BACKEND == "cython"  # the extension is built in this install


SUBPROCESS_SNIPPET = """
import json
from tepflow.formulation import CYCLE, FormulationConfig, build
from tepflow.instancegen import fixtures
from tepflow.solver import solve_milp
from tepflow.solver.simplex import BACKEND

net = fixtures()["B.2"]
sol = solve_milp(build(net, FormulationConfig(kind=CYCLE)), mip_gap=1e-9)
print(json.dumps({"backend": BACKEND, "status": sol.status, "objective": sol.objective_upper}))
"""


def run_subprocess(pure: bool) -> dict:
    env = dict(os.environ)
    env["TEPFLOW_PURE_PYTHON"] = "1" if pure else "0"
    out = subprocess.run(
        [sys.executable, "-c", SUBPROCESS_SNIPPET],
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_environment_toggle_forces_python(fixture_nets):
    here = solve_milp(build(fixture_nets["B.2"], FormulationConfig(kind=CYCLE)), mip_gap=1e-9)
    pure = run_subprocess(pure=True)
    fast = run_subprocess(pure=False)
    assert pure["backend"] == "python"
    assert fast["backend"] == "cython"
    assert pure["objective"] == pytest.approx(here.objective_upper, rel=1e-9)
    assert fast["objective"] == pytest.approx(here.objective_upper, rel=1e-9)
