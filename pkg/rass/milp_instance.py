"""Generic bounded-variable MILP instances and their text dump."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np
import numpy.typing as npt

from .errors import ParameterError, ShapeError


class Sense(StrEnum):
    LE = "<="
    EQ = "="
    GE = ">="


@dataclass(frozen=True)
class Column:
    name: str
    lb: float
    ub: float
    cost: float
    integral: bool = False


@dataclass(frozen=True)
class Row:
    name: str
    coeffs: tuple[tuple[int, float], ...]
    sense: Sense
    rhs: float


@dataclass(frozen=True, eq=False)
class LpArrays:
    """Dense view of an instance, the form the solvers work on."""

    cost: npt.NDArray[np.float64]
    matrix: npt.NDArray[np.float64]
    rhs: npt.NDArray[np.float64]
    senses: tuple[Sense, ...]
    lb: npt.NDArray[np.float64]
    ub: npt.NDArray[np.float64]
    integral: npt.NDArray[np.bool_]


@dataclass(frozen=True, eq=False)
class MilpInstance:
    """Minimization problem: columns with bounds/costs, sparse rows, named roles."""

    columns: tuple[Column, ...]
    rows: tuple[Row, ...]
    roles: Mapping[str, int]

    @property
    def n_columns(self) -> int:
        return len(self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column(self, role: str) -> int:
        try:
            return self.roles[role]
        except KeyError:
            raise KeyError(f"unknown column role {role!r}") from None

    @property
    def integral_columns(self) -> list[int]:
        return [j for j, col in enumerate(self.columns) if col.integral]

    @cached_property
    def arrays(self) -> LpArrays:
        n, m = self.n_columns, self.n_rows
        matrix = np.zeros((m, n))
        for i, row in enumerate(self.rows):
            for j, a in row.coeffs:
                matrix[i, j] += a
        arrays = LpArrays(
            cost=np.array([c.cost for c in self.columns], dtype=np.float64),
            matrix=matrix,
            rhs=np.array([r.rhs for r in self.rows], dtype=np.float64),
            senses=tuple(r.sense for r in self.rows),
            lb=np.array([c.lb for c in self.columns], dtype=np.float64),
            ub=np.array([c.ub for c in self.columns], dtype=np.float64),
            integral=np.array([c.integral for c in self.columns], dtype=np.bool_),
        )
        for arr in (arrays.cost, arrays.matrix, arrays.rhs, arrays.lb, arrays.ub, arrays.integral):
            arr.setflags(write=False)
        return arrays


class MilpBuilder:
    """Incremental construction of a MilpInstance; role names must be unique."""

    def __init__(self) -> None:
        self._columns: list[Column] = []
        self._rows: list[Row] = []
        self._roles: dict[str, int] = {}

    def add_column(
        self,
        name: str,
        lb: float = 0.0,
        ub: float = math.inf,
        cost: float = 0.0,
        integral: bool = False,
    ) -> int:
        if name in self._roles:
            raise ParameterError(f"duplicate column role {name!r}")
        if lb > ub:
            raise ParameterError(f"column {name!r} has lb={lb} > ub={ub}")
        if math.isnan(cost) or math.isinf(cost):
            raise ParameterError(f"column {name!r} has non-finite cost {cost}")
        self._roles[name] = len(self._columns)
        self._columns.append(Column(name, float(lb), float(ub), float(cost), integral))
        return self._roles[name]

    def add_row(
        self, name: str, coeffs: Iterable[tuple[int, float]], sense: Sense, rhs: float
    ) -> int:
        merged: dict[int, float] = {}
        for j, a in coeffs:
            if not 0 <= j < len(self._columns):
                raise ShapeError(f"row {name!r} references unknown column {j}")
            merged[j] = merged.get(j, 0.0) + float(a)
        packed = tuple((j, a) for j, a in sorted(merged.items()) if a != 0.0)
        self._rows.append(Row(name, packed, Sense(sense), float(rhs)))
        return len(self._rows) - 1

    def build(self) -> MilpInstance:
        return MilpInstance(
            columns=tuple(self._columns),
            rows=tuple(self._rows),
            roles=MappingProxyType(dict(self._roles)),
        )


def _num(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.12g}"


def dump_instance(instance: MilpInstance) -> str:
    """Fixed-format listing; two equal instances dump to identical text."""

    lines = [
        "MILP minimize",
        f"COLUMNS {instance.n_columns}",
    ]
    for j, col in enumerate(instance.columns):
        kind = "I" if col.integral else "C"
        lines.append(
            f"{j:6d} {col.name:<16} lb={_num(col.lb)} ub={_num(col.ub)} obj={_num(col.cost)} {kind}"
        )
    lines.append(f"ROWS {instance.n_rows}")
    for i, row in enumerate(instance.rows):
        terms = " ".join(f"{j}:{_num(a)}" for j, a in row.coeffs)
        lines.append(f"{i:6d} {row.name:<16} {row.sense.value:>2} {_num(row.rhs)} : {terms}")
    return "\n".join(lines) + "\n"
