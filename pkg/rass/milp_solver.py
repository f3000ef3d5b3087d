"""Exact MILP solving at desk scale: LP relaxation plus depth-first branch-and-bound.

The ``external`` backend hands the same instance to HiGHS through scipy and
maps the result back onto the MilpSolution contract.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from enum import StrEnum
from typing import Any, Mapping

import numpy as np
import numpy.typing as npt

from .errors import ParameterError, SolverError
from .milp_instance import LpArrays, MilpInstance, Sense
from .simplex import LpResult, LpStatus, solve_bounded_lp

FloatArray = npt.NDArray[np.float64]

MAX_ORACLE_BINARIES = 20


class Backend(StrEnum):
    NATIVE = "native"
    EXTERNAL = "external"


class SolveStatus(StrEnum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NODE_LIMIT = "node_limit"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class SolverConfig:
    feas_tol: float = 1e-7
    int_tol: float = 1e-6
    abs_gap: float = 1e-6
    rel_gap: float = 1e-6
    node_limit: int = 1_000_000
    time_limit: float | None = None
    backend: Backend = Backend.NATIVE

    def __post_init__(self) -> None:
        for name in ("feas_tol", "int_tol", "abs_gap", "rel_gap"):
            value = getattr(self, name)
            if not value > 0:
                raise ParameterError(f"solver {name} must be positive, got {value}")
        if self.node_limit < 1:
            raise ParameterError(f"solver node_limit must be at least 1, got {self.node_limit}")
        if self.time_limit is not None and not self.time_limit > 0:
            raise ParameterError(f"solver time_limit must be positive, got {self.time_limit}")
        object.__setattr__(self, "backend", Backend(self.backend))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SolverConfig":
        defaults = cls()
        time_limit = data.get("time_limit")
        try:
            backend = Backend(str(data.get("backend", defaults.backend.value)))
        except ValueError:
            raise ParameterError(
                f"unknown solver backend {data.get('backend')!r} (choose 'native' or 'external')"
            ) from None
        return cls(
            feas_tol=float(data.get("feas_tol", defaults.feas_tol)),
            int_tol=float(data.get("int_tol", defaults.int_tol)),
            abs_gap=float(data.get("abs_gap", defaults.abs_gap)),
            rel_gap=float(data.get("rel_gap", defaults.rel_gap)),
            node_limit=int(data.get("node_limit", defaults.node_limit)),
            time_limit=None if time_limit is None else float(time_limit),
            backend=backend,
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "feas_tol": self.feas_tol,
            "int_tol": self.int_tol,
            "abs_gap": self.abs_gap,
            "rel_gap": self.rel_gap,
            "node_limit": self.node_limit,
            "time_limit": self.time_limit,
            "backend": self.backend.value,
        }

    def gap(self, objective: float) -> float:
        if math.isinf(objective):
            return 0.0
        return max(self.abs_gap, self.rel_gap * abs(objective))


@dataclass(frozen=True, eq=False)
class MilpSolution:
    status: SolveStatus
    values: FloatArray | None
    objective: float
    bound: float
    nodes: int

    @property
    def has_solution(self) -> bool:
        return self.values is not None

    def value(self, instance: MilpInstance, role: str) -> float:
        if self.values is None:
            raise SolverError(f"no solution available ({self.status.value})")
        return float(self.values[instance.column(role)])


def _relax(arrays: LpArrays, lb: FloatArray, ub: FloatArray, config: SolverConfig) -> LpResult:
    return solve_bounded_lp(
        arrays.cost,
        arrays.matrix,
        arrays.rhs,
        arrays.senses,
        lb,
        ub,
        feas_tol=config.feas_tol,
    )


def solve_lp(instance: MilpInstance, config: SolverConfig = SolverConfig()) -> MilpSolution:
    """Solve the continuous relaxation (integrality flags ignored)."""

    if config.backend is Backend.EXTERNAL:
        return _solve_external(instance, config, relax=True)
    arrays = instance.arrays
    result = _relax(arrays, arrays.lb.copy(), arrays.ub.copy(), config)
    if result.status is LpStatus.INFEASIBLE:
        return MilpSolution(SolveStatus.INFEASIBLE, None, math.inf, math.inf, 1)
    return MilpSolution(SolveStatus.OPTIMAL, result.x, result.objective, result.objective, 1)


def _row_slack_ok(
    activity: FloatArray, arrays: LpArrays, rows: npt.NDArray[np.intp], tol: float
) -> bool:
    for i in rows:
        a = float(activity[i])
        b = float(arrays.rhs[i])
        allowance = tol * (1.0 + abs(b))
        sense = arrays.senses[i]
        if sense is Sense.LE and a > b + allowance:
            return False
        if sense is Sense.GE and a < b - allowance:
            return False
        if sense is Sense.EQ and abs(a - b) > allowance:
            return False
    return True


def _round_repair(
    arrays: LpArrays,
    x: FloatArray,
    integral: npt.NDArray[np.intp],
    lb: FloatArray,
    ub: FloatArray,
    config: SolverConfig,
) -> FloatArray | None:
    """Round integral columns one at a time, keeping every touched row satisfied."""

    candidate = x.copy()
    activity = arrays.matrix @ candidate
    for j in integral:
        v = float(candidate[j])
        nearest = float(round(v))
        if abs(v - nearest) <= config.int_tol:
            options = [nearest]
        else:
            lower, upper = float(math.floor(v)), float(math.ceil(v))
            options = [lower, upper] if nearest == lower else [upper, lower]
        touched = np.flatnonzero(arrays.matrix[:, j])
        for value in options:
            if not lb[j] <= value <= ub[j]:
                continue
            trial = activity + arrays.matrix[:, j] * (value - candidate[j])
            if _row_slack_ok(trial, arrays, touched, config.feas_tol):
                activity = trial
                candidate[j] = value
                break
        else:
            return None
    return candidate


def _fractionality(values: FloatArray) -> FloatArray:
    frac = values - np.floor(values)
    result: FloatArray = np.minimum(frac, 1.0 - frac)
    return result


def solve_milp(instance: MilpInstance, config: SolverConfig = SolverConfig()) -> MilpSolution:
    """Depth-first branch-and-bound over the integral columns.

    Branches on the most fractional column (lowest index on ties), explores the
    floor child first and prunes by bound against the incumbent. Identical
    input and config give bit-identical output unless a time limit fires.
    """

    if config.backend is Backend.EXTERNAL:
        return _solve_external(instance, config, relax=False)

    arrays = instance.arrays
    integral = np.flatnonzero(arrays.integral)
    started = time.perf_counter()

    incumbent: FloatArray | None = None
    incumbent_obj = math.inf
    pruned_bound = math.inf
    stack: list[tuple[float, FloatArray, FloatArray]] = [(-math.inf, arrays.lb.copy(), arrays.ub.copy())]
    nodes = 0
    status = SolveStatus.OPTIMAL

    while stack:
        if nodes >= config.node_limit:
            status = SolveStatus.NODE_LIMIT
            break
        if config.time_limit is not None and time.perf_counter() - started > config.time_limit:
            status = SolveStatus.TIME_LIMIT
            break
        parent_bound, lb, ub = stack.pop()
        if parent_bound >= incumbent_obj - config.gap(incumbent_obj):
            pruned_bound = min(pruned_bound, parent_bound)
            continue

        nodes += 1
        relaxed = _relax(arrays, lb, ub, config)
        if relaxed.status is LpStatus.INFEASIBLE:
            continue
        node_obj = relaxed.objective
        if node_obj >= incumbent_obj - config.gap(incumbent_obj):
            pruned_bound = min(pruned_bound, node_obj)
            continue

        frac = _fractionality(relaxed.x[integral])
        if integral.size == 0 or float(frac.max()) <= config.int_tol:
            snapped = relaxed.x.copy()
            snapped[integral] = np.round(snapped[integral])
            incumbent, incumbent_obj = snapped, float(arrays.cost @ snapped)
            continue

        repaired = _round_repair(arrays, relaxed.x, integral, lb, ub, config)
        if repaired is not None:
            repaired_obj = float(arrays.cost @ repaired)
            if repaired_obj < incumbent_obj:
                incumbent, incumbent_obj = repaired, repaired_obj
            if node_obj >= incumbent_obj - config.gap(incumbent_obj):
                pruned_bound = min(pruned_bound, node_obj)
                continue

        j = int(integral[int(np.argmax(frac))])
        v = float(relaxed.x[j])
        ceil_lb = lb.copy()
        ceil_lb[j] = math.ceil(v)
        floor_ub = ub.copy()
        floor_ub[j] = math.floor(v)
        stack.append((node_obj, ceil_lb, ub))
        stack.append((node_obj, lb, floor_ub))

    if status is SolveStatus.OPTIMAL:
        if incumbent is None:
            return MilpSolution(SolveStatus.INFEASIBLE, None, math.inf, math.inf, nodes)
        bound = min(incumbent_obj, pruned_bound)
    else:
        bound = min([pb for pb, _, _ in stack] + [pruned_bound, incumbent_obj])
    return MilpSolution(status, incumbent, incumbent_obj, bound, nodes)


def enumerate_oracle(instance: MilpInstance, config: SolverConfig = SolverConfig()) -> MilpSolution:
    """Fix every 0/1 pattern of the integral columns and keep the best LP.

    Test oracle only; refuses more than ``MAX_ORACLE_BINARIES`` integral columns.
    """

    arrays = instance.arrays
    integral = np.flatnonzero(arrays.integral)
    if integral.size > MAX_ORACLE_BINARIES:
        raise ParameterError(
            f"enumeration oracle supports at most {MAX_ORACLE_BINARIES} binaries, got {integral.size}"
        )
    best: FloatArray | None = None
    best_obj = math.inf
    solved = 0
    for pattern in itertools.product((0.0, 1.0), repeat=int(integral.size)):
        lb = arrays.lb.copy()
        ub = arrays.ub.copy()
        lb[integral] = np.maximum(lb[integral], pattern)
        ub[integral] = np.minimum(ub[integral], pattern)
        solved += 1
        relaxed = _relax(arrays, lb, ub, config)
        if relaxed.status is LpStatus.OPTIMAL and relaxed.objective < best_obj:
            best, best_obj = relaxed.x, relaxed.objective
    if best is None:
        return MilpSolution(SolveStatus.INFEASIBLE, None, math.inf, math.inf, solved)
    return MilpSolution(SolveStatus.OPTIMAL, best, best_obj, best_obj, solved)


def _limit_status(message: str) -> SolveStatus:
    # HiGHS reports both stops as scipy status 1; only the message tells them apart
    return SolveStatus.TIME_LIMIT if "time" in message.lower() else SolveStatus.NODE_LIMIT


def _solve_external(instance: MilpInstance, config: SolverConfig, relax: bool) -> MilpSolution:
    try:
        from scipy.optimize import Bounds, LinearConstraint, milp
    except ImportError as exc:
        raise SolverError(
            "external solver backend requires 'scipy'.\n"
            "Install with: pip install 'rass[external]'"
        ) from exc

    arrays = instance.arrays
    row_lb = np.array(
        [b if s is not Sense.LE else -np.inf for s, b in zip(arrays.senses, arrays.rhs)], dtype=np.float64
    )
    row_ub = np.array(
        [b if s is not Sense.GE else np.inf for s, b in zip(arrays.senses, arrays.rhs)], dtype=np.float64
    )
    constraints = [LinearConstraint(arrays.matrix, row_lb, row_ub)] if instance.n_rows else []
    bounds = Bounds(arrays.lb, arrays.ub)

    def run(integrality: FloatArray, rel_gap: float) -> Any:
        options: dict[str, Any] = {"mip_rel_gap": rel_gap, "node_limit": config.node_limit}
        if config.time_limit is not None:
            options["time_limit"] = config.time_limit
        res = milp(arrays.cost, constraints=constraints, integrality=integrality, bounds=bounds, options=options)
        if res.status in (3, 4) or (res.status not in (0, 2) and res.x is None):
            raise SolverError(f"external backend failed: {res.message}")
        return res

    if relax or not arrays.integral.any():
        res = run(np.zeros(instance.n_columns), config.rel_gap)
    else:
        # HiGHS only takes a relative gap; widen it so abs_gap is honoured at the
        # relaxation's scale, and fall back to rel_gap if that proves too loose
        lp = run(np.zeros(instance.n_columns), config.rel_gap)
        if lp.status == 2:
            return MilpSolution(SolveStatus.INFEASIBLE, None, math.inf, math.inf, 0)
        scale = abs(float(arrays.cost @ np.asarray(lp.x, dtype=np.float64)))
        widened = max(config.rel_gap, config.abs_gap / scale) if scale > 0.0 else config.rel_gap
        integrality = arrays.integral.astype(np.float64)
        res = run(integrality, min(widened, 1.0))
        if res.status == 0 and widened > config.rel_gap and res.x is not None:
            objective = float(arrays.cost @ np.asarray(res.x, dtype=np.float64))
            dual_bound = getattr(res, "mip_dual_bound", None)
            if dual_bound is not None and objective - float(dual_bound) > config.gap(objective):
                res = run(integrality, config.rel_gap)

    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    if res.status == 2:
        return MilpSolution(SolveStatus.INFEASIBLE, None, math.inf, math.inf, nodes)
    x = np.asarray(res.x, dtype=np.float64)
    objective = float(arrays.cost @ x)
    dual_bound = getattr(res, "mip_dual_bound", None)
    bound = objective if dual_bound is None or relax else float(dual_bound)
    status = SolveStatus.OPTIMAL if res.status == 0 else _limit_status(str(res.message))
    return MilpSolution(status, x, objective, bound, nodes)


def _lp_name(name: str) -> str:
    return name.replace("[", "(").replace("]", ")")


def _lp_terms(terms: list[tuple[str, float]]) -> str:
    if not terms:
        return "0"
    return " ".join(f"{a:+.12g} {name}" for name, a in terms)


def export_lp(instance: MilpInstance) -> str:
    """CPLEX LP text for cross-checking with external MILP tools."""

    names = [_lp_name(c.name) for c in instance.columns]
    lines = ["\\ rass instance", "Minimize"]
    objective = [(names[j], c.cost) for j, c in enumerate(instance.columns) if c.cost != 0.0]
    lines.append(f" obj: {_lp_terms(objective)}")
    lines.append("Subject To")
    for row in instance.rows:
        sense = {Sense.LE: "<=", Sense.GE: ">=", Sense.EQ: "="}[row.sense]
        terms = [(names[j], a) for j, a in row.coeffs]
        lines.append(f" {_lp_name(row.name)}: {_lp_terms(terms)} {sense} {row.rhs:.12g}")
    lines.append("Bounds")
    for name, col in zip(names, instance.columns):
        if math.isinf(col.lb) and math.isinf(col.ub):
            lines.append(f" {name} free")
        elif math.isinf(col.ub):
            lines.append(f" {name} >= {col.lb:.12g}")
        elif math.isinf(col.lb):
            lines.append(f" -inf <= {name} <= {col.ub:.12g}")
        else:
            lines.append(f" {col.lb:.12g} <= {name} <= {col.ub:.12g}")
    binaries = [n for n, c in zip(names, instance.columns) if c.integral and c.lb >= 0 and c.ub <= 1]
    generals = [n for n, c in zip(names, instance.columns) if c.integral and not (c.lb >= 0 and c.ub <= 1)]
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(binaries))
    if generals:
        lines.append("Generals")
        lines.append(" " + " ".join(generals))
    lines.append("End")
    return "\n".join(lines) + "\n"
