"""Deterministic synthetic market day used by examples, tests and ``rass synth``."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ReportError
from .report import write_csv
from .storage import ESCRI, StorageSpec
from .time_market import ErrorPool, PriceVector, TimeGrid, synth_pool
from .utils import ensure_dir

# (fraction of the day, price) knots: a morning plateau sliding into a noon
# trough, then an evening spike. Prices never rise before the trough, so a
# risk-neutral schedule has no morning cycle and charges at the trough only.
_KNOTS: tuple[tuple[float, float], ...] = (
    (0.0, 70.0),
    (0.25, 60.0),
    (0.50, 20.0),
    (0.62, 45.0),
    (0.78, 110.0),
    (0.85, 245.0),
    (0.92, 110.0),
    (1.0, 60.0),
)
# error spread sigma0 * h**gamma
SIGMA0 = 6.0
GAMMA = 1.0


@dataclass(frozen=True)
class BenchmarkCase:
    grid: TimeGrid
    predispatch: PriceVector
    pool: ErrorPool
    realized: PriceVector


def benchmark_predispatch(K: int) -> PriceVector:
    s = (np.arange(1, K + 1, dtype=np.float64) - 0.5) / K
    xs, ys = zip(*_KNOTS)
    return PriceVector(np.round(np.interp(s, xs, ys), 2))


def make_benchmark_case(
    K: int = 48,
    kappa: int = 30,
    obs: int = 2000,
    sigma0: float = SIGMA0,
    gamma: float = GAMMA,
    seed: int = 42,
) -> BenchmarkCase:
    """Pre-dispatch profile, error pool from ``seed`` and a realized path from ``seed + 1``."""

    grid = TimeGrid(kappa, K)
    predispatch = benchmark_predispatch(K)
    pool = synth_pool(K, obs, sigma0, gamma, seed)
    path = synth_pool(K, 1, sigma0, gamma, seed + 1).observations[0]
    realized = PriceVector(np.round(predispatch.values + path, 2))
    return BenchmarkCase(grid, predispatch, pool, realized)


def write_benchmark_case(case: BenchmarkCase, out_dir: Path, storage: StorageSpec = ESCRI) -> Path:
    """Write a self-contained rolling-mode case directory; returns the config path."""

    ensure_dir(out_dir)
    periods = list(case.grid.periods)
    write_csv(out_dir / "predispatch.csv", ("period", "price"), zip(periods, case.predispatch.values))
    write_csv(out_dir / "realized.csv", ("period", "price"), zip(periods, case.realized.values))
    header = tuple(f"h{h}" for h in range(1, case.pool.H + 1))
    write_csv(out_dir / "errors.csv", header, case.pool.observations.tolist())

    config = {
        "grid": {"kappa_minutes": case.grid.kappa_minutes, "K": case.grid.K},
        "storage": "storage.json",
        "data": {"predispatch": "predispatch.csv", "errors": "errors.csv", "realized": "realized.csv"},
        "mode": "rolling",
        "beta_grid": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
        "alpha_grid": [0.95],
        "n_scenarios": min(100, case.pool.N),
        "seed": 42,
        "out_dir": "out",
    }
    config_path = out_dir / "config.json"
    for path, payload in ((out_dir / "storage.json", storage.as_dict()), (config_path, config)):
        try:
            path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as exc:
            raise ReportError(str(exc), path) from exc
        print(f"[rass:synth] wrote {path}")
    return config_path
