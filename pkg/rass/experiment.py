"""Parameter sweeps over (beta, alpha, e_max) cells, static or rolling."""
from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional

from .benchmark import make_benchmark_case
from .config import ExperimentConfig, Mode
from .errors import ConfigError, RassError, ShapeError, SolverError
from .loader import read_error_csv, read_price_csv
from .milp_instance import MilpInstance
from .milp_solver import SolveStatus
from .rass_model import RassSolution, RiskParams, assemble_rass, solve_rass
from .rolling_sim import DispatchTrace, settlement_total, simulate
from .storage import DispatchPoint, StorageSpec
from .time_market import ErrorPool, PriceVector, ScenarioSet, TimeGrid, build_scenarios
from .utils import format_label


@dataclass(frozen=True)
class CaseData:
    grid: TimeGrid
    predispatch: PriceVector
    pool: ErrorPool
    realized: Optional[PriceVector] = None


@dataclass(frozen=True)
class Cell:
    beta: float
    alpha: float
    # None when the sweep keeps the storage spec's own capacity
    e_max: Optional[float] = None

    @property
    def label(self) -> str:
        text = f"beta={format_label(self.beta)}_alpha={format_label(self.alpha)}"
        if self.e_max is not None:
            text += f"_emax={format_label(self.e_max)}"
        return text

    @property
    def risk(self) -> RiskParams:
        return RiskParams(alpha=self.alpha, beta=self.beta)

    def storage(self, base: StorageSpec) -> StorageSpec:
        return base if self.e_max is None else base.with_e_max(self.e_max)


@dataclass(frozen=True, eq=False)
class CellResult:
    cell: Cell
    solution: Optional[RassSolution] = None
    trace: Optional[DispatchTrace] = None
    elapsed: float = 0.0

    @property
    def dispatch(self) -> list[DispatchPoint]:
        if self.trace is not None:
            return self.trace.points
        assert self.solution is not None
        return list(self.solution.dispatch)

    @property
    def expected_profit(self) -> float:
        """Ex-ante expected profit: the full-horizon solve, or the first rolling window."""

        if self.trace is not None:
            return self.trace.first_window.expected_profit
        assert self.solution is not None
        return self.solution.expected_profit

    @property
    def cvar_cost(self) -> float:
        if self.trace is not None:
            return self.trace.first_window.cvar_cost
        assert self.solution is not None
        return self.solution.cvar_cost

    @property
    def var(self) -> float:
        if self.trace is not None:
            return self.trace.first_window.var
        assert self.solution is not None
        return self.solution.var

    @property
    def objective(self) -> float:
        if self.trace is not None:
            return self.trace.first_window.objective
        assert self.solution is not None
        return self.solution.objective

    @property
    def realized(self) -> Optional[float]:
        return None if self.trace is None else settlement_total(self.trace)

    @property
    def nodes(self) -> int:
        if self.trace is not None:
            return sum(row.nodes for row in self.trace.rows)
        assert self.solution is not None
        return self.solution.nodes

    @property
    def status(self) -> SolveStatus:
        if self.trace is not None:
            # the first window that stopped early, if any
            stopped = [row.status for row in self.trace.rows if row.status is not SolveStatus.OPTIMAL]
            return stopped[0] if stopped else SolveStatus.OPTIMAL
        assert self.solution is not None
        return self.solution.status


@dataclass(frozen=True)
class SweepResult:
    mode: Mode
    grid: TimeGrid
    cells: tuple[CellResult, ...]
    e_max_swept: bool = False

    @property
    def betas(self) -> list[float]:
        return sorted({r.cell.beta for r in self.cells})

    @property
    def alphas(self) -> list[float]:
        return sorted({r.cell.alpha for r in self.cells})

    @property
    def e_maxes(self) -> list[Optional[float]]:
        return sorted({r.cell.e_max for r in self.cells}, key=lambda v: -1.0 if v is None else v)

    def find(self, beta: float, alpha: float, e_max: Optional[float] = None) -> CellResult:
        for r in self.cells:
            if r.cell == Cell(beta, alpha, e_max):
                return r
        raise KeyError(f"no cell beta={beta}, alpha={alpha}, e_max={e_max}")

    def records(self) -> list[dict[str, Any]]:
        out = []
        for r in self.cells:
            out.append(
                {
                    "beta": r.cell.beta,
                    "alpha": r.cell.alpha,
                    "e_max": r.cell.e_max,
                    "expected_profit": r.expected_profit,
                    "cvar_cost": r.cvar_cost,
                    "var": r.var,
                    "objective": r.objective,
                    "realized": r.realized,
                    "nodes": r.nodes,
                    "status": r.status.value,
                }
            )
        return out


@dataclass(frozen=True)
class _CellTask:
    cell: Cell
    mode: Mode
    config: ExperimentConfig
    case: CaseData
    scenarios: Optional[ScenarioSet]


def sweep_cells(config: ExperimentConfig) -> list[Cell]:
    """Cartesian grid ordered by (beta, alpha, e_max); grids hold no duplicates."""

    e_maxes: list[Optional[float]] = list(config.e_max_grid) or [None]
    cells = [Cell(b, a, e) for b in config.beta_grid for a in config.alpha_grid for e in e_maxes]
    return sorted(cells, key=lambda c: (c.beta, c.alpha, -1.0 if c.e_max is None else c.e_max))


def load_case(config: ExperimentConfig) -> CaseData:
    if config.synthetic is not None:
        s = config.synthetic
        bench = make_benchmark_case(config.grid.K, config.grid.kappa_minutes, s.obs, s.sigma0, s.gamma, s.seed)
        return CaseData(bench.grid, bench.predispatch, bench.pool, bench.realized)
    assert config.data is not None
    predispatch = read_price_csv(config.data.predispatch)
    pool = read_error_csv(config.data.errors)
    realized = None if config.data.realized is None else read_price_csv(config.data.realized)
    try:
        predispatch.check_grid(config.grid)
        if realized is not None:
            realized.check_grid(config.grid)
        if pool.H < config.grid.K:
            raise ShapeError(f"error pool has {pool.H} look-ahead columns, horizon needs {config.grid.K}")
    except ShapeError as exc:
        raise ConfigError(str(exc)) from exc
    return CaseData(config.grid, predispatch, pool, realized)


def resolve_workers() -> int:
    raw = os.environ.get("RASS_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"RASS_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"RASS_THREADS must be a positive integer, got {raw!r}")
    return value


def _run_cell(task: _CellTask) -> CellResult:
    cell, config, case = task.cell, task.config, task.case
    started = time.perf_counter()
    try:
        storage = cell.storage(config.storage)
        if task.mode is Mode.STATIC:
            assert task.scenarios is not None
            solution = solve_rass(storage, case.grid, task.scenarios, cell.risk, config.solver)
            return CellResult(cell, solution=solution, elapsed=time.perf_counter() - started)
        assert case.realized is not None
        trace = simulate(
            storage,
            case.grid,
            case.predispatch,
            case.pool,
            case.realized,
            cell.risk,
            config.n_scenarios,
            config.seed,
            config.solver,
            reseed_per_window=config.reseed_per_window,
        )
        return CellResult(cell, trace=trace, elapsed=time.perf_counter() - started)
    except SolverError as exc:
        raise SolverError(f"cell {cell.label}: {exc}") from exc
    except RassError as exc:
        raise ConfigError(f"cell {cell.label}: {exc}") from exc


def _execute(tasks: list[_CellTask]) -> list[CellResult]:
    workers = min(resolve_workers(), len(tasks))
    if workers <= 1:
        return [_run_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps grid order regardless of completion order
        return list(pool.map(_run_cell, tasks))


def _static_scenarios(config: ExperimentConfig, case: CaseData) -> ScenarioSet:
    try:
        return build_scenarios(case.predispatch, case.pool, config.n_scenarios, config.seed)
    except RassError as exc:
        raise ConfigError(str(exc)) from exc


def _sweep(config: ExperimentConfig, mode: Mode, case: CaseData) -> SweepResult:
    scenarios = _static_scenarios(config, case) if mode is Mode.STATIC else None
    cells = sweep_cells(config)
    print(f"[rass] {mode.value} sweep: {len(cells)} cells, K={case.grid.K}, scenarios={config.n_scenarios}")
    tasks = [_CellTask(c, mode, config, case, scenarios) for c in cells]
    results = _execute(tasks)
    for r in results:
        line = f"[rass] cell {r.cell.label}: expected_profit={r.expected_profit:.3f} cvar={r.cvar_cost:.3f}"
        if r.realized is not None:
            line += f" realized={r.realized:.3f}"
        print(f"{line} nodes={r.nodes} ({r.elapsed:.2f}s)")
        if r.status is not SolveStatus.OPTIMAL:
            print(f"[rass] WARNING: cell {r.cell.label} stopped at {r.status.value}; best incumbent reported")
    return SweepResult(mode, case.grid, tuple(results), e_max_swept=bool(config.e_max_grid))


def run_static(config: ExperimentConfig, case: Optional[CaseData] = None) -> SweepResult:
    """One full-horizon solve per cell against the same scenario draw."""

    return _sweep(config, Mode.STATIC, case or load_case(config))


def run_rolling(config: ExperimentConfig, case: Optional[CaseData] = None) -> SweepResult:
    case = case or load_case(config)
    if case.realized is None:
        raise ConfigError("rolling mode needs realized prices (data.realized)")
    return _sweep(config, Mode.ROLLING, case)


def run_sweep(config: ExperimentConfig) -> SweepResult:
    if config.mode is Mode.ROLLING:
        return run_rolling(config)
    return run_static(config)


def static_instances(config: ExperimentConfig, case: Optional[CaseData] = None) -> list[tuple[Cell, MilpInstance]]:
    """The MILP each static cell solves, for export and inspection."""

    case = case or load_case(config)
    scenarios = _static_scenarios(config, case)
    out = []
    for cell in sweep_cells(config):
        try:
            instance = assemble_rass(cell.storage(config.storage), case.grid, scenarios, cell.risk)
        except RassError as exc:
            raise ConfigError(f"cell {cell.label}: {exc}") from exc
        out.append((cell, instance))
    return out
