"""Readers for the simulator's documented CSV/JSON schemas.

All readers validate the columns they need and fail with the missing names;
no science happens here.
"""

from __future__ import annotations

import csv
import json

import numpy as np

__all__ = ["SchemaError", "read_columns", "read_stats_json"]


class SchemaError(ValueError):
    """Input file does not match the declared schema."""


def read_columns(path, required, numeric=None):
    """Read a CSV into {column: list}; checks required columns exist.

    Columns named in `numeric` (default: all required) are converted to
    float arrays; the rest stay strings.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, expected a CSV header")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise SchemaError(
                f"{path}: missing columns {', '.join(missing)} "
                f"(found {', '.join(reader.fieldnames)})")
        rows = list(reader)
    out = {}
    numeric = set(required if numeric is None else numeric)
    for col in reader.fieldnames:
        values = [row[col] for row in rows]
        if col in numeric:
            try:
                out[col] = np.array([float(v) for v in values])
            except ValueError as err:
                raise SchemaError(f"{path}: column {col} is not numeric: {err}")
        else:
            out[col] = values
    return out


def read_stats_json(path, required=("sigma_y_corr", "stderr")):
    with open(path, encoding="utf-8") as fh:
        stats = json.load(fh)
    missing = [k for k in required if stats.get(k) is None]
    if missing:
        raise SchemaError(f"{path}: missing keys {', '.join(missing)}")
    return stats
