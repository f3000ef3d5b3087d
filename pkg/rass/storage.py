"""Physical storage description and static feasibility checks."""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import StrEnum
from typing import Any, Mapping, Sequence

from .errors import ParameterError, ShapeError
from .time_market import TimeGrid


@dataclass(frozen=True)
class StorageSpec:
    p_c_max: float
    p_d_max: float
    eta: float
    e_min: float
    e_max: float
    e_init: float

    def __post_init__(self) -> None:
        if not 0.0 < self.eta <= 1.0:
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")
        if self.p_c_max < 0 or self.p_d_max < 0:
            raise ParameterError(
                f"power limits must be non-negative, got p_c_max={self.p_c_max}, p_d_max={self.p_d_max}"
            )
        if not 0.0 <= self.e_min <= self.e_init <= self.e_max:
            raise ParameterError(
                "energy values must satisfy 0 <= e_min <= e_init <= e_max, got "
                f"e_min={self.e_min}, e_init={self.e_init}, e_max={self.e_max}"
            )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "StorageSpec":
        missing = [k for k in ("p_c_max", "p_d_max", "eta", "e_min", "e_max") if k not in data]
        if missing:
            raise ParameterError(f"storage spec is missing {', '.join(missing)}")
        e_min = float(data["e_min"])
        e_init = data.get("e_init")
        return cls(
            p_c_max=float(data["p_c_max"]),
            p_d_max=float(data["p_d_max"]),
            eta=float(data["eta"]),
            e_min=e_min,
            e_max=float(data["e_max"]),
            # an omitted initial charge starts the day empty
            e_init=e_min if e_init is None else float(e_init),
        )

    def as_dict(self) -> dict[str, float]:
        return {
            "p_c_max": self.p_c_max,
            "p_d_max": self.p_d_max,
            "eta": self.eta,
            "e_min": self.e_min,
            "e_max": self.e_max,
            "e_init": self.e_init,
        }

    def with_e_init(self, e_init: float) -> "StorageSpec":
        return replace(self, e_init=e_init)

    def with_e_max(self, e_max: float) -> "StorageSpec":
        return replace(self, e_max=e_max)


VICTORIAN_BIG_BATTERY = StorageSpec(p_c_max=300.0, p_d_max=300.0, eta=0.85, e_min=0.0, e_max=450.0, e_init=0.0)
ESCRI = StorageSpec(p_c_max=30.0, p_d_max=30.0, eta=0.85, e_min=0.0, e_max=8.0, e_init=0.0)

PRESETS: dict[str, StorageSpec] = {
    "vbb": VICTORIAN_BIG_BATTERY,
    "escri": ESCRI,
}


@dataclass(frozen=True)
class DispatchPoint:
    p_c: float
    p_d: float
    u: int
    e_end: float

    @property
    def net_discharge(self) -> float:
        return self.p_d - self.p_c


class ConstraintKind(StrEnum):
    DISCHARGE_LIMIT = "discharge_limit"
    CHARGE_LIMIT = "charge_limit"
    EXCLUSIVITY = "exclusivity"
    DOMAIN = "domain"
    ENERGY_BALANCE = "energy_balance"
    ENERGY_BOUNDS = "energy_bounds"


@dataclass(frozen=True)
class Violation:
    kind: ConstraintKind
    period: int
    magnitude: float

    def __str__(self) -> str:
        return f"{self.kind.value} at k={self.period} by {self.magnitude:.3g}"


def energy_step(spec: StorageSpec, grid: TimeGrid, e_prev: float, p_c: float, p_d: float) -> float:
    """Stored energy after one interval of charging ``p_c`` / discharging ``p_d``."""

    h = grid.hour_factor()
    return e_prev - (1.0 / spec.eta) * p_d * h + spec.eta * p_c * h


def check_feasible(
    spec: StorageSpec, grid: TimeGrid, points: Sequence[DispatchPoint], tol: float = 1e-6
) -> list[Violation]:
    """Every violated storage constraint, in period order; empty means feasible."""

    if len(points) != grid.K:
        raise ShapeError(f"dispatch has {len(points)} points, grid has K={grid.K}")
    if tol < 0:
        raise ParameterError(f"tolerance must be non-negative, got {tol}")

    found: list[Violation] = []

    def flag(kind: ConstraintKind, k: int, excess: float) -> None:
        if excess > tol:
            found.append(Violation(kind, k, excess))

    e_prev = spec.e_init
    for k, pt in zip(grid.periods, points):
        flag(ConstraintKind.DOMAIN, k, -pt.p_c)
        flag(ConstraintKind.DOMAIN, k, -pt.p_d)
        flag(ConstraintKind.DOMAIN, k, min(abs(pt.u), abs(pt.u - 1)))
        flag(ConstraintKind.DISCHARGE_LIMIT, k, pt.p_d - spec.p_d_max * pt.u)
        flag(ConstraintKind.CHARGE_LIMIT, k, pt.p_c - spec.p_c_max * (1 - pt.u))
        flag(ConstraintKind.EXCLUSIVITY, k, min(pt.p_c, pt.p_d))
        flag(ConstraintKind.ENERGY_BALANCE, k, abs(pt.e_end - energy_step(spec, grid, e_prev, pt.p_c, pt.p_d)))
        flag(ConstraintKind.ENERGY_BOUNDS, k, spec.e_min - pt.e_end)
        flag(ConstraintKind.ENERGY_BOUNDS, k, pt.e_end - spec.e_max)
        e_prev = pt.e_end
    return found
