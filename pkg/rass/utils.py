from __future__ import annotations
import hashlib
from pathlib import Path
from typing import Iterable


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_list(items: Iterable[str]) -> str:
    h = hashlib.sha256()
    for it in sorted(items):
        h.update(it.encode("utf-8"))
    return h.hexdigest()


def ensure_dir(p: Path) -> None:
    p.mkdir(parents=True, exist_ok=True)


def source_fingerprint(package_dir: Path) -> str:
    """Hash of every module in ``package_dir``; changes whenever the code does."""

    entries = [
        f"{p.relative_to(package_dir).as_posix()}:{sha256_text(p.read_text(encoding='utf-8'))}"
        for p in package_dir.rglob("*.py")
    ]
    return sha256_list(entries)


def format_fixed(value: float, digits: int = 6) -> str:
    """Fixed-point text for CSV output; never emits a negative zero."""

    text = f"{value:.{digits}f}"
    if text.startswith("-") and float(text) == 0.0:
        return text[1:]
    return text


def format_label(value: float) -> str:
    return f"{value:g}"
