"""Tabular output: CSV with '#' metadata header lines, or one JSON object.

Floats are written with ``repr`` (shortest round-trip form), so the same
inputs always produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__

SCHEMA_VERSION = 1


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(values)

    def column(self, name):
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _json_cell(v):
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if not math.isfinite(v) else v
    return str(v)


def _full_metadata(table):
    meta = {"tool": f"retarded-qed {__version__}", "schema": SCHEMA_VERSION}
    meta.update(table.metadata)
    return meta


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    for key, value in _full_metadata(table).items():
        text = str(value).replace("\n", " ")
        buf.write(f"# {key}: {text}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def to_json(table: Table) -> str:
    payload = {
        "metadata": {k: _json_cell(v) if not isinstance(v, str) else v
                     for k, v in _full_metadata(table).items()},
        "columns": list(table.columns),
        "rows": [[_json_cell(v) for v in row] for row in table.rows],
    }
    return json.dumps(payload, indent=1, sort_keys=False, allow_nan=False) + "\n"


def render(table: Table, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(table)
    if fmt == "json":
        return to_json(table)
    raise ValueError(f"unknown format {fmt!r}")


def read_csv(text: str):
    """(metadata, columns, rows-as-strings); the inverse of :func:`to_csv`."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = value
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]
