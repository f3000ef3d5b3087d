"""Reading price, error-pool and storage inputs from disk."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import duckdb

from .errors import ConfigError, RassError
from .storage import StorageSpec
from .time_market import ErrorPool, PriceVector


def _sql_path(path: Path) -> str:
    return str(path).replace("'", "''")


def _read_table(path: Path) -> tuple[list[str], list[tuple[Any, ...]]]:
    if not path.is_file():
        raise ConfigError("input file not found", path)
    con = duckdb.connect()
    try:
        cursor = con.execute(f"SELECT * FROM read_csv_auto('{_sql_path(path)}', HEADER=TRUE)")
        columns = [str(d[0]).strip().lower() for d in cursor.description]
        return columns, cursor.fetchall()
    except duckdb.Error as exc:
        raise ConfigError(f"unreadable CSV: {exc}", path) from exc
    finally:
        con.close()


def _floats(values: list[Any], what: str, path: Path) -> list[float]:
    try:
        return [float(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be numeric", path) from None


def read_price_csv(path: Path) -> PriceVector:
    """``period,price`` rows with periods 1..K (any row order)."""

    columns, rows = _read_table(path)
    if "period" not in columns or "price" not in columns:
        raise ConfigError(f"expected columns period,price, found {','.join(columns)}", path)
    if not rows:
        raise ConfigError("price file has no rows", path)
    p_idx, v_idx = columns.index("period"), columns.index("price")
    periods = _floats([r[p_idx] for r in rows], "period", path)
    prices = _floats([r[v_idx] for r in rows], "price", path)
    ordered = sorted(zip(periods, prices))
    if [p for p, _ in ordered] != [float(k) for k in range(1, len(ordered) + 1)]:
        raise ConfigError("periods must be exactly 1..K", path)
    try:
        return PriceVector([v for _, v in ordered])
    except RassError as exc:
        raise ConfigError(str(exc), path) from exc


def read_error_csv(path: Path) -> ErrorPool:
    """One observation per row, columns ``h1..hH`` by look-ahead distance."""

    columns, rows = _read_table(path)
    expected = [f"h{h}" for h in range(1, len(columns) + 1)]
    if columns != expected:
        raise ConfigError(f"expected columns h1..h{len(columns)}, found {','.join(columns)}", path)
    if not rows:
        raise ConfigError("error pool file has no rows", path)
    matrix = [_floats(list(r), "forecast errors", path) for r in rows]
    try:
        return ErrorPool(matrix)
    except RassError as exc:
        raise ConfigError(str(exc), path) from exc


def load_storage_spec(path: Path) -> StorageSpec:
    if not path.is_file():
        raise ConfigError("storage spec not found", path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", path) from exc
    if not isinstance(data, dict):
        raise ConfigError("storage spec must be a JSON object", path)
    try:
        return StorageSpec.from_dict(data)
    except (RassError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path) from exc
