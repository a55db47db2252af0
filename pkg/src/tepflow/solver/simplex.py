"""Two-phase bounded-variable revised simplex over compiled problem arrays.

The pivot kernel is selected once at import: the compiled extension when it
is importable, else the pure numpy twin. Setting ``TEPFLOW_PURE_PYTHON=1``
forces the fallback. Every solve is finished with a feasibility and LP
duality audit; drift beyond tolerance raises NumericalFailure instead of
returning a silently wrong optimum.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ..problem import MilpProblem

if os.environ.get("TEPFLOW_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _simplex_py as _kernel
else:
    try:
        from . import _simplex_cy as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _simplex_py as _kernel

BACKEND: str = _kernel.NAME

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
AUDIT_TOL = 1e-6
MAX_ITER = 50_000
REFACTOR_EVERY = 64


class NumericalFailure(Exception):
    """The solve lost numerical footing; carries a condition estimate."""

    def __init__(self, message: str, condition: float = math.nan) -> None:
        super().__init__(
            f"{message} (basis condition estimate {condition:.3g})"
            if not math.isnan(condition)
            else message
        )
        self.condition = condition


@dataclass
class CompiledProblem:
    """Dense standard form: equality rows with one signed-bound slack each."""

    A: np.ndarray  # (m, n_struct + m), Fortran order
    b: np.ndarray
    c: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    n_struct: int
    m: int
    col_names: list[str]
    row_names: list[str]
    binary_indices: np.ndarray


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: float | None
    x: np.ndarray | None  # structural column values
    duals: np.ndarray | None  # one per row
    iterations: int


def compile_problem(p: MilpProblem) -> CompiledProblem:
    """Lower a MilpProblem to dense arrays, one slack column per row.

    Senses become bounds on the slack: <= gives [0, inf), >= gives
    (-inf, 0], == pins it to zero, so the kernel only ever sees equalities.
    """
    n = len(p.columns)
    m = len(p.rows)
    A = np.zeros((m, n + m), order="F")
    b = np.zeros(m)
    lower = np.empty(n + m)
    upper = np.empty(n + m)
    c = np.zeros(n + m)
    for j, col in enumerate(p.columns):
        lower[j] = col.lower
        upper[j] = col.upper
        c[j] = col.cost
    row_names = []
    for ri, row in enumerate(p.rows):
        for j, a in row.coeffs:
            A[ri, j] = a
        A[ri, n + ri] = 1.0
        b[ri] = row.rhs
        if row.sense == "<=":
            lower[n + ri], upper[n + ri] = 0.0, math.inf
        elif row.sense == ">=":
            lower[n + ri], upper[n + ri] = -math.inf, 0.0
        else:
            lower[n + ri], upper[n + ri] = 0.0, 0.0
        row_names.append(row.name)
    return CompiledProblem(
        A=A,
        b=b,
        c=c,
        lower=lower,
        upper=upper,
        n_struct=n,
        m=m,
        col_names=[col.name for col in p.columns],
        row_names=row_names,
        binary_indices=np.array(p.binary_columns, dtype=np.int64),
    )


def _initial_status(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    vstat = np.full(lower.shape, 3, dtype=np.int8)
    vstat[np.isfinite(lower)] = 0
    vstat[(~np.isfinite(lower)) & np.isfinite(upper)] = 1
    return vstat


def solve_compiled(
    cp: CompiledProblem,
    overrides: list[tuple[int, float, float]] = (),
) -> LpResult:
    """Solve the LP with optional per-column bound overrides (by index)."""
    n_tot = cp.n_struct + cp.m
    m = cp.m
    lower = cp.lower.copy()
    upper = cp.upper.copy()
    for j, lo, hi in overrides:
        lower[j] = lo
        upper[j] = hi

    vstat0 = _initial_status(lower, upper)
    from ._simplex_py import _nonbasic_values  # shared helper

    vals = _nonbasic_values(lower, upper, vstat0)
    r = cp.b - cp.A @ vals
    sign = np.where(r >= 0, 1.0, -1.0)

    A_ext = np.zeros((m, n_tot + m), order="F")
    A_ext[:, :n_tot] = cp.A
    A_ext[np.arange(m), n_tot + np.arange(m)] = sign
    lower_ext = np.concatenate([lower, np.zeros(m)])
    upper_ext = np.concatenate([upper, np.full(m, math.inf)])
    basis = (n_tot + np.arange(m)).astype(np.int64)
    vstat = np.concatenate([vstat0, np.full(m, 2, dtype=np.int8)])

    c1 = np.zeros(n_tot + m)
    c1[n_tot:] = 1.0
    status, it1, x, _ = _kernel.run(
        A_ext, cp.b, c1, lower_ext, upper_ext, basis, vstat,
        OPT_TOL, MAX_ITER, REFACTOR_EVERY,
    )
    if status == 1:
        raise NumericalFailure("phase 1 reported an unbounded direction")
    if status == 2:
        raise NumericalFailure("phase 1 hit the iteration limit")
    if status == 3:
        raise NumericalFailure("phase 1 basis became singular")

    b_scale = 1.0 + float(np.abs(cp.b).max()) if m else 1.0
    infeasibility = float(x[n_tot:].sum())
    if infeasibility > FEAS_TOL * b_scale:
        return LpResult("infeasible", None, None, None, it1)

    # pin artificials and reoptimise with the real objective
    upper_ext[n_tot:] = 0.0
    c2 = np.concatenate([cp.c, np.zeros(m)])
    status, it2, x, y = _kernel.run(
        A_ext, cp.b, c2, lower_ext, upper_ext, basis, vstat,
        OPT_TOL, MAX_ITER, REFACTOR_EVERY,
    )
    iters = it1 + it2
    if status == 1:
        return LpResult("unbounded", None, None, None, iters)
    if status == 2:
        raise NumericalFailure("phase 2 hit the iteration limit")
    if status == 3:
        raise NumericalFailure("phase 2 basis became singular")

    objective = float(c2 @ x)
    _audit(cp, A_ext, c2, lower_ext, upper_ext, basis, vstat, x, y, objective, b_scale)
    return LpResult("optimal", objective, x[: cp.n_struct].copy(), y, iters)


def _audit(cp, A_ext, c2, lower_ext, upper_ext, basis, vstat, x, y, objective, b_scale) -> None:
    """Feasibility and duality identity at the claimed optimum."""
    tol = AUDIT_TOL * b_scale
    residual = float(np.abs(A_ext @ x - cp.b).max()) if cp.m else 0.0
    if residual > tol:
        raise NumericalFailure(
            f"row residual {residual:.3g} exceeds {tol:.3g}", _condition(A_ext, basis)
        )
    below = np.maximum(lower_ext - x, 0.0)
    above = np.maximum(x - upper_ext, 0.0)
    bound_err = float(np.maximum(below, above).max())
    if bound_err > tol:
        raise NumericalFailure(
            f"bound violation {bound_err:.3g} exceeds {tol:.3g}", _condition(A_ext, basis)
        )
    d = c2 - y @ A_ext
    nonbasic = vstat != 2
    dual_obj = float(y @ cp.b + d[nonbasic] @ x[nonbasic])
    gap = abs(objective - dual_obj)
    if gap > AUDIT_TOL * (1.0 + abs(objective)):
        raise NumericalFailure(
            f"duality identity violated by {gap:.3g}", _condition(A_ext, basis)
        )


def _condition(A_ext: np.ndarray, basis: np.ndarray) -> float:
    try:
        return float(np.linalg.cond(A_ext[:, basis]))
    except Exception:  # pragma: no cover
        return math.nan


def solve_lp_arrays(p: MilpProblem, fixed: dict[str, float] | None = None) -> LpResult:
    """Compile and solve one LP; ``fixed`` pins named columns to values."""
    cp = compile_problem(p)
    overrides = []
    if fixed:
        for name, v in fixed.items():
            j = p.column_index(name)
            overrides.append((j, float(v), float(v)))
    return solve_compiled(cp, overrides)
