"""CSV ingestion with per-column kind inference, and column mapping."""

from __future__ import annotations

import csv
import io
import math

from ..errors import CsvParseError, MappingError, RaggedRows
from ..ir import ColumnKind, Dataset


def _parse_number(cell: str) -> float | None:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def ingest_csv(data: bytes | str) -> Dataset:
    """Header row required. A column is Number iff every non-empty cell
    parses as a finite real; empty cells in Number columns are rejected."""
    text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]  # blank lines are not data rows
    if not rows:
        raise CsvParseError("empty CSV: a header row is required")
    header = [h.strip() for h in rows[0]]
    if any(not h for h in header):
        raise CsvParseError("header row has an empty column name", row=1)
    width = len(header)
    body = rows[1:]
    for i, row in enumerate(body):
        if len(row) != width:
            raise RaggedRows(
                f"row {i + 2} has {len(row)} cells, expected {width}", row=i + 2
            )

    kinds = []
    for j in range(width):
        cells = [row[j].strip() for row in body]
        numeric = all(_parse_number(c) is not None for c in cells if c)
        kinds.append(ColumnKind.NUMBER if numeric and cells else ColumnKind.STRING)

    out_rows = []
    for i, row in enumerate(body):
        converted = []
        for j, cell in enumerate(row):
            cell = cell.strip()
            if kinds[j] is ColumnKind.NUMBER:
                if not cell:
                    raise CsvParseError(
                        f"empty cell in Number column {header[j]!r}", row=i + 2, col=j
                    )
                converted.append(_parse_number(cell))
            else:
                converted.append(cell)
        out_rows.append(tuple(converted))
    dataset = Dataset(list(zip(header, kinds)), out_rows)
    dataset.check()
    return dataset


def apply_mapping(dataset: Dataset, mapping: dict[str, str],
                  required_schema: list[tuple[str, ColumnKind]]) -> Dataset:
    """Rename/reorder user columns onto the schema.

    ``mapping``: user column name -> schema column name. Must cover the
    whole schema; kinds must match.
    """
    user_kinds = dict(dataset.columns)
    reverse: dict[str, str] = {}
    for user_col, schema_col in mapping.items():
        if user_col not in user_kinds:
            raise MappingError(f"unknown column {user_col!r} in mapping")
        if schema_col in reverse:
            raise MappingError(f"two columns mapped to {schema_col!r}")
        reverse[schema_col] = user_col

    indices = []
    for name, kind in required_schema:
        user_col = reverse.get(name)
        if user_col is None:
            raise MappingError(f"mapping omits required column {name!r}")
        if user_kinds[user_col] is not kind:
            raise MappingError(
                f"column {user_col!r} has kind {user_kinds[user_col].value}, "
                f"schema needs {kind.value} for {name!r}"
            )
        indices.append(dataset.column_index(user_col))
    rows = [tuple(row[i] for i in indices) for row in dataset.rows]
    return Dataset(list(required_schema), rows)
