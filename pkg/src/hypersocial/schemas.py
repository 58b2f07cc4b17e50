"""Schema-checked CSV emission. Every output table is validated against data/schemas.json before writing."""

from __future__ import annotations

import csv
import json
import math
import numbers
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Tuple, Union

import numpy as np

from .errors import SchemaMismatch

Column = Tuple[str, str, bool]


@lru_cache(maxsize=None)
def load_schemas() -> Dict[str, Tuple[Column, ...]]:
    raw = json.loads(resources.files("hypersocial").joinpath("data/schemas.json").read_text())
    return {name: tuple((c, t, bool(n)) for c, t, n in cols) for name, cols in raw.items()}


def header(table: str) -> List[str]:
    return [c for c, _, _ in load_schemas()[table]]


def _is_null(v) -> bool:
    return v is None or (isinstance(v, float) and math.isnan(v))


def format_value(v, kind: str) -> str:
    if _is_null(v):
        return ""
    if kind == "float":
        return repr(float(v))
    if kind == "bool":
        return "true" if v else "false"
    if kind == "int":
        return str(int(v))
    return str(v)


def validate_row(table: str, row: Mapping) -> None:
    cols = load_schemas()[table]
    names = [c for c, _, _ in cols]
    if list(row.keys()) != names:
        raise SchemaMismatch(f"{table}: columns {list(row.keys())} != schema {names}")
    for name, kind, nullable in cols:
        v = row[name]
        if _is_null(v):
            if not nullable:
                raise SchemaMismatch(f"{table}.{name}: null in non-nullable column")
            continue
        if kind == "int":
            ok = isinstance(v, numbers.Integral) and not isinstance(v, bool)
        elif kind == "float":
            ok = isinstance(v, numbers.Real) and not isinstance(v, bool) and math.isfinite(float(v))
        elif kind == "bool":
            ok = isinstance(v, (bool, np.bool_))
        else:
            ok = isinstance(v, (str, numbers.Integral)) and not isinstance(v, bool)
        if not ok:
            raise SchemaMismatch(f"{table}.{name}: {v!r} is not a valid {kind}")


def write_rows(path: Union[str, Path], table: str, rows: Iterable[Mapping]) -> int:
    """Validate every row, then write; nothing is written if any row fails."""
    cols = load_schemas()[table]
    rows = list(rows)
    for row in rows:
        validate_row(table, row)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([c for c, _, _ in cols])
        for row in rows:
            w.writerow([format_value(row[c], k) for c, k, _ in cols])
    return len(rows)


def read_rows(path: Union[str, Path], table: str) -> List[Dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != header(table):
            raise SchemaMismatch(f"{path}: header {reader.fieldnames} != schema {header(table)}")
        return list(reader)
