"""CSV tables, per-cell traces and the replay manifest for a finished sweep."""
from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable, Optional, Sequence

import duckdb

from . import __version__
from .config import Mode, config_to_dict
from .errors import ReportError
from .rolling_sim import TRACE_HEADER
from .utils import ensure_dir, format_fixed, format_label, source_fingerprint

if TYPE_CHECKING:
    from .config import ExperimentConfig
    from .experiment import CellResult, SweepResult


def _cell_text(value: object) -> str | None:
    # NULL is written as an empty field
    if value is None:
        return None
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_fixed(value)
    if hasattr(value, "item"):
        return _cell_text(value.item())
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    """Write ``rows`` under ``header``; floats get 6 decimal places."""

    text_rows = [[_cell_text(v) for v in row] for row in rows]
    for row in text_rows:
        if len(row) != len(header):
            raise ReportError(f"row has {len(row)} values for {len(header)} columns", path)
    con = duckdb.connect()
    try:
        ensure_dir(path.parent)
        cols_sql = ", ".join(f'"{name}" VARCHAR' for name in header)
        con.execute(f"CREATE TABLE out ({cols_sql})")
        if text_rows:
            placeholders = ", ".join("?" for _ in header)
            con.executemany(f"INSERT INTO out VALUES ({placeholders})", text_rows)
        target = str(path).replace("'", "''")
        con.execute(f"COPY out TO '{target}' (HEADER, DELIMITER ',')")
    except (OSError, duckdb.Error) as exc:
        raise ReportError(str(exc), path) from exc
    finally:
        con.close()
    return path


def early_charging_table(result: "SweepResult", quartile: Optional[int] = None) -> list[tuple[str, float]]:
    """Per cell, the share of charged energy that falls in the first ``quartile`` intervals."""

    first = quartile if quartile is not None else max(1, result.grid.K // 4)
    h = result.grid.hour_factor()
    out = []
    for r in result.cells:
        charged = [pt.p_c * h for pt in r.dispatch]
        total = sum(charged)
        out.append((r.cell.label, sum(charged[:first]) / total if total > 0 else 0.0))
    return out


def _column_key(result: "SweepResult", r: "CellResult") -> str:
    parts = []
    if len(result.alphas) > 1 or not result.e_max_swept:
        parts.append(f"alpha_{format_label(r.cell.alpha)}")
    if result.e_max_swept and r.cell.e_max is not None:
        parts.append(f"e_max_{format_label(r.cell.e_max)}")
    return "_".join(parts)


def _series_key(result: "SweepResult", r: "CellResult") -> str:
    if len(result.alphas) == 1 and not result.e_max_swept:
        return f"beta_{format_label(r.cell.beta)}"
    return r.cell.label


def _pivot(result: "SweepResult", value: str) -> tuple[list[str], list[list[object]]]:
    columns: list[str] = []
    for r in result.cells:
        key = _column_key(result, r)
        if key not in columns:
            columns.append(key)
    rows = []
    for beta in result.betas:
        by_key = {_column_key(result, r): getattr(r, value) for r in result.cells if r.cell.beta == beta}
        rows.append([beta, *(by_key.get(c) for c in columns)])
    return ["beta", *columns], rows


def _series(result: "SweepResult", values: str) -> tuple[list[str], list[list[object]]]:
    header = ["period"] + [_series_key(result, r) for r in result.cells]
    series = []
    for r in result.cells:
        points = r.dispatch
        series.append([pt.net_discharge for pt in points] if values == "net" else [pt.e_end for pt in points])
    rows = [[k, *(s[k - 1] for s in series)] for k in result.grid.periods]
    return header, rows


def _summary(result: "SweepResult") -> tuple[list[str], list[list[object]]]:
    rolling = result.mode is Mode.ROLLING
    header = ["beta", "alpha"]
    if result.e_max_swept:
        header.append("e_max")
    header += ["expected_profit", "cvar_cost", "var", "objective"]
    if rolling:
        header.append("realized")
    header += ["nodes", "status"]
    rows = []
    for rec in result.records():
        rows.append([rec[name] for name in header])
    return header, rows


def write_manifest(path: Path, config: "ExperimentConfig") -> Path:
    data: dict[str, Any] = config_to_dict(config)
    fingerprint = source_fingerprint(Path(__file__).parent)
    data["code_version"] = f"{__version__}+{fingerprint[:12]}"
    try:
        ensure_dir(path.parent)
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ReportError(str(exc), path) from exc
    return path


def emit_report(
    result: "SweepResult", out_dir: Path, config: Optional["ExperimentConfig"] = None
) -> list[Path]:
    """Write every table for ``result`` under ``out_dir``; returns the files written."""

    written: list[Path] = []
    written.append(write_csv(out_dir / "summary.csv", *_summary(result)))
    written.append(write_csv(out_dir / "profit_table.csv", *_pivot(result, "expected_profit")))
    if result.mode is Mode.ROLLING:
        written.append(write_csv(out_dir / "realized_table.csv", *_pivot(result, "realized")))
    written.append(write_csv(out_dir / "netdischarge.csv", *_series(result, "net")))
    written.append(write_csv(out_dir / "energy.csv", *_series(result, "energy")))

    early = early_charging_table(result)
    written.append(
        write_csv(
            out_dir / "early_charging.csv",
            ("cell", "beta", "alpha", "e_max", "first_quartile_share"),
            [
                (label, r.cell.beta, r.cell.alpha, r.cell.e_max, share)
                for (label, share), r in zip(early, result.cells)
            ],
        )
    )

    for r in result.cells:
        if r.trace is not None:
            path = out_dir / "traces" / f"trace_{r.cell.label}.csv"
            written.append(write_csv(path, TRACE_HEADER, r.trace.csv_rows()))

    if config is not None:
        written.append(write_manifest(out_dir / "manifest.json", config))

    for path in written:
        print(f"[rass] wrote {path}")
    return written
