"""Random and hand-built RASS cases shared by the solver, model and simulation tests."""
from __future__ import annotations

import numpy as np

from rass.milp_solver import SolverConfig
from rass.rass_model import RiskParams
from rass.storage import StorageSpec
from rass.time_market import ScenarioSet, TimeGrid

TIGHT = SolverConfig(abs_gap=1e-9, rel_gap=1e-9)


def unit_spec(eta: float = 1.0) -> StorageSpec:
    return StorageSpec(p_c_max=1.0, p_d_max=1.0, eta=eta, e_min=0.0, e_max=1.0, e_init=0.0)


def single(prices: list[float]) -> ScenarioSet:
    return ScenarioSet([prices], [1.0])


def random_spec(rng: np.random.Generator) -> StorageSpec:
    e_min = float(rng.uniform(0.0, 1.0))
    e_max = e_min + float(rng.uniform(0.5, 10.0))
    return StorageSpec(
        p_c_max=float(rng.uniform(0.5, 5.0)),
        p_d_max=float(rng.uniform(0.5, 5.0)),
        eta=float(rng.uniform(0.7, 1.0)),
        e_min=e_min,
        e_max=e_max,
        e_init=float(rng.uniform(e_min, e_max)),
    )


def random_scenarios(rng: np.random.Generator, K: int, n: int, low: float = -20.0) -> ScenarioSet:
    base = rng.uniform(low, 100.0, K)
    prices = base + rng.normal(0.0, 10.0, (n, K))
    probs = rng.uniform(0.1, 1.0, n)
    return ScenarioSet(prices, probs / probs.sum())


def random_case(
    rng: np.random.Generator, K: int, n: int
) -> tuple[StorageSpec, TimeGrid, ScenarioSet, RiskParams]:
    grid = TimeGrid(int(rng.choice([15, 30, 60])), K)
    risk = RiskParams(alpha=float(rng.choice([0.0, 0.5, 0.9, 0.95])), beta=float(rng.uniform(0.0, 1.0)))
    return random_spec(rng), grid, random_scenarios(rng, K, n), risk
