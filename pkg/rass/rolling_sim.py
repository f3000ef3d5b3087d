"""Shrinking-horizon simulation: solve t..K, commit interval t, settle, carry energy forward."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import RassError, ShapeError, SimulationError
from .milp_solver import SolverConfig, SolveStatus
from .rass_model import RiskParams, solve_rass
from .storage import DispatchPoint, StorageSpec, energy_step
from .time_market import ErrorPool, PriceVector, ScenarioSampler, ScenarioSet, TimeGrid, window_view


@dataclass(frozen=True)
class TraceRow:
    period: int
    p_c: float
    p_d: float
    u: int
    e_start: float
    e_end: float
    realized_price: float
    cashflow: float
    objective: float
    expected_profit: float
    cvar_cost: float
    var: float
    nodes: int
    status: SolveStatus = SolveStatus.OPTIMAL

    @property
    def point(self) -> DispatchPoint:
        return DispatchPoint(self.p_c, self.p_d, self.u, self.e_end)


@dataclass(frozen=True)
class DispatchTrace:
    grid: TimeGrid
    rows: tuple[TraceRow, ...]

    @property
    def points(self) -> list[DispatchPoint]:
        return [row.point for row in self.rows]

    @property
    def first_window(self) -> TraceRow:
        return self.rows[0]

    def csv_rows(self) -> list[tuple[int, float, float, float, float, float]]:
        return [(r.period, r.p_c, r.p_d, r.e_end, r.realized_price, r.cashflow) for r in self.rows]


TRACE_HEADER = ("period", "p_charge_mw", "p_discharge_mw", "e_end_mwh", "realized_price", "cashflow")


def trace_net_discharge(trace: DispatchTrace) -> list[float]:
    return [row.p_d - row.p_c for row in trace.rows]


def simulate(
    spec: StorageSpec,
    grid: TimeGrid,
    predispatch: PriceVector,
    pool: ErrorPool | ScenarioSet,
    realized: PriceVector,
    risk: RiskParams,
    n_scenarios: int,
    seed: int,
    config: SolverConfig = SolverConfig(),
    *,
    reseed_per_window: bool = False,
) -> DispatchTrace:
    """Run windows t = 1..K; each window's risk covers its remaining horizon only.

    ``pool`` may also be a fixed ScenarioSet, in which case ``n_scenarios`` and
    ``seed`` are ignored and every window re-anchors that set's errors.
    """

    predispatch.check_grid(grid)
    if len(realized) != grid.K:
        raise ShapeError(f"realized prices have {len(realized)} entries, grid has K={grid.K}")
    source: ScenarioSampler | ScenarioSet
    if isinstance(pool, ScenarioSet):
        source = pool
    else:
        source = ScenarioSampler(pool, n_scenarios, seed, reseed_per_window)

    h = grid.hour_factor()
    carried = spec.e_init
    rows: list[TraceRow] = []
    for t in grid.periods:
        window_grid = grid.window(t)
        try:
            scenarios = window_view(source, predispatch, t)
            solution = solve_rass(spec.with_e_init(carried), window_grid, scenarios, risk, config)
        except RassError as exc:
            raise SimulationError(str(exc), t) from exc
        first = solution.dispatch[0]
        e_end = energy_step(spec, grid, carried, first.p_c, first.p_d)
        e_end = min(max(e_end, spec.e_min), spec.e_max)
        price = float(realized.values[t - 1])
        rows.append(
            TraceRow(
                period=t,
                p_c=first.p_c,
                p_d=first.p_d,
                u=first.u,
                e_start=carried,
                e_end=e_end,
                realized_price=price,
                cashflow=price * (first.p_d - first.p_c) * h,
                objective=solution.objective,
                expected_profit=solution.expected_profit,
                cvar_cost=solution.cvar_cost,
                var=solution.var,
                nodes=solution.nodes,
                status=solution.status,
            )
        )
        carried = e_end
    return DispatchTrace(grid, tuple(rows))


def settlement_total(trace: DispatchTrace | Sequence[TraceRow]) -> float:
    rows = trace.rows if isinstance(trace, DispatchTrace) else trace
    return float(sum(row.cashflow for row in rows))
