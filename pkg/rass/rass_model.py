"""CVaR machinery, expected profit and assembly of the risk-averse self-scheduling MILP.

Money terms are true currency: every price-times-power product is scaled by
the grid's hour factor, both in the expected profit and in the charging cost
the CVaR is taken of.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt

from .errors import ParameterError, ShapeError, SolverError
from .milp_instance import MilpBuilder, MilpInstance, Sense
from .milp_solver import MilpSolution, SolverConfig, SolveStatus, solve_milp
from .storage import DispatchPoint, StorageSpec
from .time_market import ScenarioSet, TimeGrid

__all__ = [
    "CvarResult",
    "MilpInstance",
    "RassSolution",
    "RiskParams",
    "assemble_cvar_lp",
    "assemble_rass",
    "charging_costs",
    "cvar_discrete",
    "expected_profit",
    "solve_rass",
]

FloatArray = npt.NDArray[np.float64]

DISTRIBUTION_TOL = 1e-9
SNAP_TOL = 1e-9


@dataclass(frozen=True)
class RiskParams:
    alpha: float = 0.95
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not self.beta >= 0.0:
            raise ParameterError(f"beta must be non-negative, got {self.beta}")

    @property
    def tail_factor(self) -> float:
        return 1.0 / (1.0 - self.alpha)


@dataclass(frozen=True)
class CvarResult:
    value: float
    var: float


def _check_distribution(costs: FloatArray, probs: FloatArray) -> None:
    if costs.ndim != 1 or costs.shape != probs.shape or costs.size == 0:
        raise ShapeError(f"costs {costs.shape} and probabilities {probs.shape} must be equal, non-empty vectors")
    if np.any(probs < 0.0) or abs(float(probs.sum()) - 1.0) > DISTRIBUTION_TOL:
        raise ParameterError("probabilities must be non-negative and sum to 1")


def cvar_discrete(costs: npt.ArrayLike, probs: npt.ArrayLike, alpha: float) -> CvarResult:
    """Rockafellar-Uryasev CVaR of a discrete cost distribution.

    The piecewise-linear objective in zeta attains its minimum at a support
    point, so only the costs themselves are tried. ``var`` is the smallest
    minimizing support point.
    """

    if not 0.0 <= alpha < 1.0:
        raise ParameterError(f"alpha must lie in [0, 1), got {alpha}")
    c = np.asarray(costs, dtype=np.float64)
    p = np.asarray(probs, dtype=np.float64)
    _check_distribution(c, p)

    support = np.unique(c)
    excess = np.maximum(c[None, :] - support[:, None], 0.0)
    values = support + (excess @ p) / (1.0 - alpha)
    best = float(values.min())
    tol = 1e-12 * (1.0 + abs(best))
    first = int(np.flatnonzero(values <= best + tol)[0])
    return CvarResult(value=best, var=float(support[first]))


def _dispatch_arrays(dispatch: Sequence[DispatchPoint], K: int) -> tuple[FloatArray, FloatArray]:
    if len(dispatch) != K:
        raise ShapeError(f"dispatch has {len(dispatch)} points, scenarios cover K={K}")
    p_c = np.array([pt.p_c for pt in dispatch], dtype=np.float64)
    p_d = np.array([pt.p_d for pt in dispatch], dtype=np.float64)
    return p_c, p_d


def charging_costs(dispatch: Sequence[DispatchPoint], scenarios: ScenarioSet, grid: TimeGrid) -> FloatArray:
    """Per-scenario charging cost; the random variable the CVaR is taken of."""

    if grid.K != scenarios.K:
        raise ShapeError(f"grid has K={grid.K}, scenarios cover K={scenarios.K}")
    p_c, _ = _dispatch_arrays(dispatch, scenarios.K)
    costs: FloatArray = (scenarios.prices @ p_c) * grid.hour_factor()
    return costs


def expected_profit(dispatch: Sequence[DispatchPoint], scenarios: ScenarioSet, grid: TimeGrid) -> float:
    if grid.K != scenarios.K:
        raise ShapeError(f"grid has K={grid.K}, scenarios cover K={scenarios.K}")
    p_c, p_d = _dispatch_arrays(dispatch, scenarios.K)
    return float(scenarios.expected_prices() @ (p_d - p_c)) * grid.hour_factor()


def assemble_rass(
    spec: StorageSpec, grid: TimeGrid, scenarios: ScenarioSet, risk: RiskParams
) -> MilpInstance:
    """Minimize -expected profit + beta * CVaR(charging cost) over one horizon.

    Column blocks: p_c[k], p_d[k], e[k], u[k] for k = 1..K, then z[w] for each
    scenario, then zeta. Rows: per interval the discharge then charge power
    limit, then the K energy balances, then one CVaR row per scenario.
    """

    if grid.K != scenarios.K:
        raise ShapeError(f"grid has K={grid.K}, scenarios cover K={scenarios.K}")
    h = grid.hour_factor()
    pi = scenarios.probabilities
    mean = scenarios.expected_prices()
    b = MilpBuilder()

    p_c = [b.add_column(f"p_c[{k}]", 0.0, spec.p_c_max, float(mean[k - 1]) * h) for k in grid.periods]
    p_d = [b.add_column(f"p_d[{k}]", 0.0, spec.p_d_max, -float(mean[k - 1]) * h) for k in grid.periods]
    e = [b.add_column(f"e[{k}]", spec.e_min, spec.e_max) for k in grid.periods]
    u = [b.add_column(f"u[{k}]", 0.0, 1.0, integral=True) for k in grid.periods]
    z = [
        b.add_column(f"z[{w}]", 0.0, math.inf, risk.beta * float(pi[w - 1]) * risk.tail_factor)
        for w in range(1, scenarios.n_scenarios + 1)
    ]
    zeta = b.add_column("zeta", -math.inf, math.inf, risk.beta)

    for i, k in enumerate(grid.periods):
        b.add_row(f"plim_d[{k}]", [(p_d[i], 1.0), (u[i], -spec.p_d_max)], Sense.LE, 0.0)
        b.add_row(f"plim_c[{k}]", [(p_c[i], 1.0), (u[i], spec.p_c_max)], Sense.LE, spec.p_c_max)

    for i, k in enumerate(grid.periods):
        terms = [(e[i], 1.0), (p_d[i], h / spec.eta), (p_c[i], -spec.eta * h)]
        if i == 0:
            b.add_row(f"balance[{k}]", terms, Sense.EQ, spec.e_init)
        else:
            b.add_row(f"balance[{k}]", [*terms, (e[i - 1], -1.0)], Sense.EQ, 0.0)

    for w in range(scenarios.n_scenarios):
        terms = [(p_c[i], float(scenarios.prices[w, i]) * h) for i in range(grid.K)]
        b.add_row(f"cvar[{w + 1}]", [*terms, (zeta, -1.0), (z[w], -1.0)], Sense.LE, 0.0)

    return b.build()


def assemble_cvar_lp(costs: npt.ArrayLike, probs: npt.ArrayLike, alpha: float) -> MilpInstance:
    """CVaR of a fixed cost vector as the zeta / z LP, for cross-checking cvar_discrete."""

    risk = RiskParams(alpha=alpha, beta=1.0)
    c = np.asarray(costs, dtype=np.float64)
    p = np.asarray(probs, dtype=np.float64)
    _check_distribution(c, p)
    b = MilpBuilder()
    z = [b.add_column(f"z[{w + 1}]", 0.0, math.inf, float(p[w]) * risk.tail_factor) for w in range(c.size)]
    zeta = b.add_column("zeta", -math.inf, math.inf, 1.0)
    for w in range(c.size):
        b.add_row(f"cvar[{w + 1}]", [(zeta, -1.0), (z[w], -1.0)], Sense.LE, -float(c[w]))
    return b.build()


@dataclass(frozen=True, eq=False)
class RassSolution:
    dispatch: tuple[DispatchPoint, ...]
    zeta: float
    z: FloatArray
    objective: float
    expected_profit: float
    cvar_cost: float
    var: float
    bound: float
    nodes: int
    status: SolveStatus

    @property
    def net_discharge(self) -> list[float]:
        return [pt.net_discharge for pt in self.dispatch]

    @property
    def energy(self) -> list[float]:
        return [pt.e_end for pt in self.dispatch]


def _snap(value: float, upper: float) -> float:
    if abs(value) <= SNAP_TOL:
        return 0.0
    return min(max(value, 0.0), upper)


def _extract_dispatch(
    spec: StorageSpec, grid: TimeGrid, instance: MilpInstance, values: FloatArray
) -> tuple[DispatchPoint, ...]:
    points = []
    for k in grid.periods:
        e_end = float(values[instance.column(f"e[{k}]")])
        points.append(
            DispatchPoint(
                p_c=_snap(float(values[instance.column(f"p_c[{k}]")]), spec.p_c_max),
                p_d=_snap(float(values[instance.column(f"p_d[{k}]")]), spec.p_d_max),
                u=int(round(float(values[instance.column(f"u[{k}]")]))),
                e_end=min(max(e_end, spec.e_min), spec.e_max),
            )
        )
    return tuple(points)


def solve_rass(
    spec: StorageSpec,
    grid: TimeGrid,
    scenarios: ScenarioSet,
    risk: RiskParams,
    config: SolverConfig = SolverConfig(),
) -> RassSolution:
    """Assemble and solve one horizon; profit and CVaR are recomputed from the dispatch."""

    instance = assemble_rass(spec, grid, scenarios, risk)
    solution: MilpSolution = solve_milp(instance, config)
    if solution.values is None:
        raise SolverError(f"RASS instance has no feasible schedule ({solution.status.value})")
    values = solution.values
    dispatch = _extract_dispatch(spec, grid, instance, values)
    risk_value = cvar_discrete(charging_costs(dispatch, scenarios, grid), scenarios.probabilities, risk.alpha)
    z = np.array(
        [values[instance.column(f"z[{w}]")] for w in range(1, scenarios.n_scenarios + 1)], dtype=np.float64
    )
    return RassSolution(
        dispatch=dispatch,
        zeta=float(values[instance.column("zeta")]),
        z=z,
        objective=solution.objective,
        expected_profit=expected_profit(dispatch, scenarios, grid),
        cvar_cost=risk_value.value,
        var=risk_value.var,
        bound=solution.bound,
        nodes=solution.nodes,
        status=solution.status,
    )
