"""Container for mixed-integer linear programs in sparse row form."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Column:
    name: str
    lower: float
    upper: float
    cost: float = 0.0
    is_binary: bool = False


@dataclass(frozen=True)
class Row:
    """Linear constraint: sum(coef * col) SENSE rhs, coeffs as (col index, coef)."""

    name: str
    coeffs: tuple[tuple[int, float], ...]
    sense: str  # "<=", ">=", "=="
    rhs: float


@dataclass(frozen=True)
class ProblemStats:
    rows: int
    columns: int
    binaries: int
    nonzeros: int


SENSES = ("<=", ">=", "==")


class MilpProblem:
    """Minimisation MILP built incrementally by name.

    Columns and rows keep insertion order; exports sort rows by name so
    emitted files are stable regardless of build order.
    """

    def __init__(self, name: str = "problem", metadata: dict | None = None) -> None:
        self.name = name
        self.metadata: dict = metadata or {}
        self.columns: list[Column] = []
        self.rows: list[Row] = []
        self._col_index: dict[str, int] = {}
        self._row_names: set[str] = set()

    def add_column(
        self,
        name: str,
        lower: float = 0.0,
        upper: float = math.inf,
        cost: float = 0.0,
        binary: bool = False,
    ) -> int:
        if name in self._col_index:
            raise ValueError(f"duplicate column {name!r}")
        if lower > upper:
            raise ValueError(f"column {name!r}: lower {lower} > upper {upper}")
        idx = len(self.columns)
        self.columns.append(Column(name, float(lower), float(upper), float(cost), binary))
        self._col_index[name] = idx
        return idx

    def add_row(
        self,
        name: str,
        terms: list[tuple[str, float]],
        sense: str,
        rhs: float,
    ) -> int:
        if name in self._row_names:
            raise ValueError(f"duplicate row {name!r}")
        if sense not in SENSES:
            raise ValueError(f"row {name!r}: unknown sense {sense!r}")
        acc: dict[int, float] = {}
        for col_name, coef in terms:
            if coef == 0.0:
                continue
            j = self._col_index.get(col_name)
            if j is None:
                raise KeyError(f"row {name!r} references unknown column {col_name!r}")
            acc[j] = acc.get(j, 0.0) + float(coef)
        self.rows.append(Row(name, tuple(sorted(acc.items())), sense, float(rhs)))
        self._row_names.add(name)
        return len(self.rows) - 1

    def column_index(self, name: str) -> int:
        return self._col_index[name]

    def has_column(self, name: str) -> bool:
        return name in self._col_index

    @property
    def binary_columns(self) -> list[int]:
        return [k for k, c in enumerate(self.columns) if c.is_binary]

    def sorted_rows(self) -> list[Row]:
        return sorted(self.rows, key=lambda r: r.name)

    def nonzeros(self) -> int:
        return sum(len(r.coeffs) for r in self.rows)

    def coefficient_range(self) -> tuple[float, float]:
        """Smallest and largest absolute nonzero matrix coefficient."""
        lo, hi = math.inf, 0.0
        for r in self.rows:
            for _, a in r.coeffs:
                v = abs(a)
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
        if hi == 0.0:
            return (0.0, 0.0)
        return (lo, hi)

    def stats(self) -> ProblemStats:
        return ProblemStats(
            rows=len(self.rows),
            columns=len(self.columns),
            binaries=len(self.binary_columns),
            nonzeros=self.nonzeros(),
        )

    def row_activity(self, values: dict[str, float]) -> dict[str, float]:
        """Constraint left-hand sides at the given point."""
        out: dict[str, float] = {}
        for r in self.rows:
            out[r.name] = sum(a * values[self.columns[j].name] for j, a in r.coeffs)
        return out

    def __repr__(self) -> str:  # pragma: no cover
        s = self.stats()
        return (
            f"MilpProblem({self.name!r}, rows={s.rows}, cols={s.columns}, "
            f"bin={s.binaries}, nnz={s.nonzeros})"
        )
