from __future__ import annotations

import json
import tomllib
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from .errors import ConfigError, RassError
from .loader import load_storage_spec
from .milp_solver import SolverConfig
from .storage import PRESETS, StorageSpec
from .time_market import TimeGrid


class Mode(StrEnum):
    STATIC = "static"
    ROLLING = "rolling"


@dataclass(frozen=True)
class DataPaths:
    predispatch: Path
    errors: Path
    # only rolling runs settle against realized prices
    realized: Optional[Path] = None


@dataclass(frozen=True)
class SyntheticData:
    obs: int = 2000
    sigma0: float = 6.0
    gamma: float = 1.0
    seed: int = 42


@dataclass(frozen=True)
class ExperimentConfig:
    root: Path
    grid: TimeGrid
    storage: StorageSpec
    data: Optional[DataPaths] = None
    synthetic: Optional[SyntheticData] = None
    beta_grid: tuple[float, ...] = (0.0,)
    alpha_grid: tuple[float, ...] = (0.95,)
    # empty means "use the storage spec's own e_max"
    e_max_grid: tuple[float, ...] = ()
    n_scenarios: int = 100
    seed: int = 42
    reseed_per_window: bool = False
    mode: Mode = Mode.STATIC
    out_dir: Path = field(default_factory=lambda: Path("out"))
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self) -> None:
        if (self.data is None) == (self.synthetic is None):
            raise ConfigError("exactly one of 'data' or 'synthetic' must be given")
        for name in ("beta_grid", "alpha_grid"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        for name in ("beta_grid", "alpha_grid", "e_max_grid"):
            values = getattr(self, name)
            repeated = sorted({v for v in values if values.count(v) > 1})
            if repeated:
                raise ConfigError(f"{name} lists {', '.join(f'{v:g}' for v in repeated)} more than once")
        if self.n_scenarios < 1:
            raise ConfigError(f"n_scenarios must be positive, got {self.n_scenarios}")


def _float_list(value: Any, key: str) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ConfigError(f"{key} must be a list of numbers")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a list of numbers") from None


def _resolve(root: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else (root / p).resolve()


def _parse_storage(value: Any, root: Path) -> StorageSpec:
    if isinstance(value, dict):
        try:
            return StorageSpec.from_dict(value)
        except (RassError, TypeError, ValueError) as exc:
            raise ConfigError(f"storage: {exc}") from exc
    if isinstance(value, str):
        if value in PRESETS:
            return PRESETS[value]
        return load_storage_spec(_resolve(root, value))
    raise ConfigError("storage must be a preset name, a path or an object")


def parse_experiment_config(data: Mapping[str, Any], root: Path) -> ExperimentConfig:
    """Build an ExperimentConfig from already-decoded JSON/TOML data."""

    grid_data: Dict[str, Any] = data.get("grid", {}) or {}
    if "storage" not in data:
        raise ConfigError("missing 'storage'")

    paths: Optional[DataPaths] = None
    if data.get("data") is not None:
        d: Dict[str, Any] = data["data"]
        missing = [k for k in ("predispatch", "errors") if k not in d]
        if missing:
            raise ConfigError(f"data is missing {', '.join(missing)}")
        realized = d.get("realized")
        paths = DataPaths(
            predispatch=_resolve(root, d["predispatch"]),
            errors=_resolve(root, d["errors"]),
            realized=None if realized is None else _resolve(root, realized),
        )

    synthetic: Optional[SyntheticData] = None
    if data.get("synthetic") is not None:
        s: Dict[str, Any] = data["synthetic"]
        synthetic = SyntheticData(
            obs=int(s.get("obs", 2000)),
            sigma0=float(s.get("sigma0", 6.0)),
            gamma=float(s.get("gamma", 1.0)),
            seed=int(s.get("seed", 42)),
        )

    try:
        mode = Mode(str(data.get("mode", "static")))
    except ValueError:
        raise ConfigError(f"mode must be 'static' or 'rolling', got {data.get('mode')!r}") from None

    try:
        grid = TimeGrid(
            kappa_minutes=int(grid_data.get("kappa_minutes", 30)),
            K=int(grid_data.get("K", 48)),
        )
        solver = SolverConfig.from_dict(data.get("solver", {}) or {})
    except (RassError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    e_max_raw: List[Any] = data.get("e_max_grid", []) or []
    return ExperimentConfig(
        root=root,
        grid=grid,
        storage=_parse_storage(data["storage"], root),
        data=paths,
        synthetic=synthetic,
        beta_grid=_float_list(data.get("beta_grid", [0.0]), "beta_grid"),
        alpha_grid=_float_list(data.get("alpha_grid", [0.95]), "alpha_grid"),
        e_max_grid=_float_list(e_max_raw, "e_max_grid"),
        n_scenarios=int(data.get("n_scenarios", 100)),
        seed=int(data.get("seed", 42)),
        reseed_per_window=bool(data.get("reseed_per_window", False)),
        mode=mode,
        out_dir=_resolve(root, str(data.get("out_dir", "out"))),
        solver=solver,
    )


def load_experiment_config(path: Path) -> ExperimentConfig:
    """Load ``.json`` or ``.toml`` experiment config; paths resolve against its directory."""

    if not path.is_file():
        raise ConfigError("config file not found", path)
    try:
        if path.suffix == ".toml":
            with path.open("rb") as f:
                data = tomllib.load(f)
        else:
            data = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config: {exc}", path) from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be an object", path)
    try:
        return parse_experiment_config(data, path.parent.resolve())
    except ConfigError as exc:
        if exc.path is None:
            raise ConfigError(str(exc), path) from exc
        raise
    except (RassError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path) from exc


def config_to_dict(config: ExperimentConfig) -> Dict[str, Any]:
    """Replayable form: absolute paths and the storage spec written inline."""

    out: Dict[str, Any] = {
        "grid": {"kappa_minutes": config.grid.kappa_minutes, "K": config.grid.K},
        "storage": config.storage.as_dict(),
        "beta_grid": list(config.beta_grid),
        "alpha_grid": list(config.alpha_grid),
        "e_max_grid": list(config.e_max_grid),
        "n_scenarios": config.n_scenarios,
        "seed": config.seed,
        "reseed_per_window": config.reseed_per_window,
        "mode": config.mode.value,
        "out_dir": str(config.out_dir),
        "solver": config.solver.as_dict(),
    }
    if config.data is not None:
        out["data"] = {
            "predispatch": str(config.data.predispatch),
            "errors": str(config.data.errors),
        }
        if config.data.realized is not None:
            out["data"]["realized"] = str(config.data.realized)
    if config.synthetic is not None:
        s = config.synthetic
        out["synthetic"] = {"obs": s.obs, "sigma0": s.sigma0, "gamma": s.gamma, "seed": s.seed}
    return out
