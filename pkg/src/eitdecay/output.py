"""CSV tables: fixed column order, a schema comment line, shortest round-trip numbers."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def format_number(x) -> str:
    """Shortest decimal that round-trips; scientific above 1e6 or below 1e-4."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    if x != 0 and (abs(x) >= 1e6 or abs(x) < 1e-4):
        return np.format_float_scientific(x, unique=True, trim="-")
    return np.format_float_positional(x, unique=True, trim="-")


class Table:
    """Rows collected in order, rendered to text in one pass."""

    def __init__(self, command: str, columns: list[str]):
        self.command = command
        self.columns = columns
        self.rows: list[list] = []
        self.footer: list[tuple[str, object]] = []

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))

    def note(self, key: str, value) -> None:
        self.footer.append((key, value))

    def render(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema_version={SCHEMA_VERSION} command={self.command}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if v is None else format_number(v) for v in row])
        for key, value in self.footer:
            buf.write(f"# {key}={format_number(value)}\n")
        return buf.getvalue()

    def write(self, path: str | Path | None) -> str:
        text = self.render()
        if path is None or str(path) == "-":
            return text
        Path(path).write_text(text, encoding="utf-8", newline="")
        return text


class CsvFormatError(ValueError):
    pass


def read_table(path: str | Path) -> tuple[list[str], list[dict[str, str]]]:
    """Read a CSV written by :class:`Table`; returns (columns, rows)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CsvFormatError(f"cannot read {path}: {exc}") from None
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    if not lines:
        raise CsvFormatError(f"{path}: no header row")
    reader = csv.reader(lines)
    columns = next(reader)
    rows = []
    for lineno, record in enumerate(reader, 2):
        if len(record) != len(columns):
            raise CsvFormatError(f"{path}: row {lineno} has {len(record)} fields, header has {len(columns)}")
        rows.append(dict(zip(columns, record)))
    return columns, rows
