"""Entry point for the rass command line interface."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Iterable

from .benchmark import make_benchmark_case, write_benchmark_case
from .config import ExperimentConfig, Mode, load_experiment_config
from .errors import ConfigError, ReportError, SolverError
from .experiment import run_rolling, run_static, run_sweep, static_instances
from .loader import load_storage_spec
from .milp_solver import export_lp
from .report import emit_report
from .storage import PRESETS, StorageSpec
from .utils import ensure_dir

EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_REPORT = 1


def _load(args: argparse.Namespace) -> ExperimentConfig:
    config = load_experiment_config(Path(args.config))
    if args.out:
        config = replace(config, out_dir=Path(args.out).resolve())
    return config


def _dump_lp(config: ExperimentConfig) -> None:
    lp_dir = config.out_dir / "lp"
    ensure_dir(lp_dir)
    for cell, instance in static_instances(config):
        path = lp_dir / f"rass_{cell.label}.lp"
        try:
            path.write_text(export_lp(instance), encoding="utf-8")
        except OSError as exc:
            raise ReportError(str(exc), path) from exc
        print(f"[rass] wrote {path}")


def handle_solve(args: argparse.Namespace) -> None:
    config = _load(args)
    if args.dump_lp:
        _dump_lp(config)
    result = run_static(config)
    emit_report(result, config.out_dir, replace(config, mode=Mode.STATIC))


def handle_simulate(args: argparse.Namespace) -> None:
    config = _load(args)
    result = run_rolling(config)
    emit_report(result, config.out_dir, replace(config, mode=Mode.ROLLING))


def handle_sweep(args: argparse.Namespace) -> None:
    config = _load(args)
    result = run_sweep(config)
    emit_report(result, config.out_dir, config)


def _storage_arg(value: str) -> StorageSpec:
    if value in PRESETS:
        return PRESETS[value]
    return load_storage_spec(Path(value))


def handle_synth(args: argparse.Namespace) -> None:
    case = make_benchmark_case(args.K, args.kappa, args.obs, args.sigma0, args.gamma, args.seed)
    config_path = write_benchmark_case(case, Path(args.out), _storage_arg(args.storage))
    print(f"[rass:synth] case ready; run: rass sweep --config {config_path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rass",
        description="Risk-averse self-scheduling of energy storage.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    solve_parser = subparsers.add_parser("solve", help="Static full-horizon solve per sweep cell.")
    solve_parser.add_argument("--config", required=True, help="experiment config (.json or .toml)")
    solve_parser.add_argument("--out", help="output directory (overrides out_dir)")
    solve_parser.add_argument("--dump-lp", action="store_true", help="also write each cell's MILP in LP format")
    solve_parser.set_defaults(func=handle_solve)

    simulate_parser = subparsers.add_parser("simulate", help="Rolling shrinking-horizon simulation per cell.")
    simulate_parser.add_argument("--config", required=True, help="experiment config (.json or .toml)")
    simulate_parser.add_argument("--out", help="output directory (overrides out_dir)")
    simulate_parser.set_defaults(func=handle_simulate)

    sweep_parser = subparsers.add_parser("sweep", help="Run the config's mode; accepts a manifest for replay.")
    sweep_parser.add_argument("--config", required=True, help="experiment config or manifest.json")
    sweep_parser.add_argument("--out", help="output directory (overrides out_dir)")
    sweep_parser.set_defaults(func=handle_sweep)

    synth_parser = subparsers.add_parser("synth", help="Write the synthetic benchmark case.")
    synth_parser.add_argument("--K", type=int, default=48, help="intervals per horizon")
    synth_parser.add_argument("--kappa", type=int, default=30, help="interval length in minutes")
    synth_parser.add_argument("--obs", type=int, default=2000, help="error observations in the pool")
    synth_parser.add_argument("--sigma0", type=float, default=6.0, help="one-step error standard deviation")
    synth_parser.add_argument("--gamma", type=float, default=1.0, help="growth exponent of the error spread")
    synth_parser.add_argument("--seed", type=int, default=42, help="random seed")
    synth_parser.add_argument("--storage", default="escri", help="preset name (vbb, escri) or storage.json path")
    synth_parser.add_argument("--out", required=True, help="case directory to write")
    synth_parser.set_defaults(func=handle_synth)

    return parser


def main(argv: Iterable[str] | None = None) -> None:
    parser = build_parser()
    args = parser.parse_args(None if argv is None else list(argv))
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"[rass] ERROR: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG) from exc
    except SolverError as exc:
        print(f"[rass] ERROR: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_SOLVER) from exc
    except ReportError as exc:
        print(f"[rass] ERROR: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_REPORT) from exc


if __name__ == "__main__":
    main()
