"""CSV and schema ingestion.

Two CSV layouts are read:

* cell counts: one column per variable plus a ``count`` column;
* records: one row per subject, one column per variable (or per raw
  column that a schema rule bins into a variable).

A schema is a JSON object ``{"variables": [...]}``; each entry has a
``name`` and either ``levels`` or a binning rule::

    {"name": "A", "column": "age", "cutoff": 60, "labels": ["0", "1"]}

Values below the (first) cutoff get the first label, values at or above
the last cutoff the last label; ``cutoff`` may be a list of increasing
cutoffs with one more label than cutoffs.  Without a schema, levels are
inferred from the data in sorted order.
"""

from __future__ import annotations

import bisect
import csv
import itertools
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import DomainError, SchemaError
from .table import ContingencyTable, VariableSpec, from_cell_counts

__all__ = ["BinningRule", "Schema", "load_schema", "read_cells", "read_records", "read_table", "write_cells"]


@dataclass(frozen=True)
class BinningRule:
    column: str
    cutoffs: tuple
    labels: tuple

    def __post_init__(self):
        if len(self.labels) != len(self.cutoffs) + 1:
            raise SchemaError(f"binning of {self.column!r} needs {len(self.cutoffs) + 1} labels")
        if list(self.cutoffs) != sorted(self.cutoffs):
            raise SchemaError(f"binning cutoffs of {self.column!r} must increase")

    def apply(self, raw: str):
        value = float(raw)
        return self.labels[bisect.bisect_right(self.cutoffs, value)]


@dataclass(frozen=True)
class Schema:
    variables: tuple
    rules: dict

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def source_column(self, name: str) -> str:
        rule = self.rules.get(name)
        return rule.column if rule else name


def _sort_key(x):
    try:
        return (0, float(x), "")
    except ValueError:
        return (1, 0.0, x)


def load_schema(path) -> Schema:
    """Read a JSON schema file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    entries = raw.get("variables") if isinstance(raw, dict) else raw
    if not isinstance(entries, list) or not entries:
        raise SchemaError(f"{path}: schema needs a nonempty 'variables' list")
    variables, rules = [], {}
    for i, e in enumerate(entries):
        where = f"{path}: variable #{i + 1}"
        if not isinstance(e, dict) or "name" not in e:
            raise SchemaError(f"{where}: each variable needs a 'name'")
        name = str(e["name"])
        if "cutoff" in e or "column" in e:
            cut = e.get("cutoff")
            if cut is None or "labels" not in e:
                raise SchemaError(f"{where} ({name}): binning needs 'cutoff' and 'labels'")
            cuts = tuple(float(c) for c in (cut if isinstance(cut, list) else [cut]))
            labels = tuple(str(x) for x in e["labels"])
            try:
                rules[name] = BinningRule(str(e.get("column", name)), cuts, labels)
            except SchemaError as exc:
                raise SchemaError(f"{where}: {exc}") from None
            levels = e.get("levels", labels)
        elif "levels" in e:
            levels = e["levels"]
        else:
            raise SchemaError(f"{where} ({name}): give 'levels' or a binning rule")
        try:
            variables.append(VariableSpec(name, tuple(str(x) for x in levels)))
        except SchemaError as exc:
            raise SchemaError(f"{where}: {exc}") from None
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        raise SchemaError(f"{path}: duplicate variable names")
    return Schema(tuple(variables), rules)


def _read_rows(path):
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}:1: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise SchemaError(f"{path}:1: duplicate column names in header")
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}")
            rows.append((reader.line_num, [c.strip() for c in row]))
    return path, header, rows


def _infer_schema(header, rows, names) -> Schema:
    variables = []
    for n in names:
        j = header.index(n)
        levels = sorted({r[j] for _, r in rows}, key=_sort_key)
        if len(levels) < 2:
            levels = levels + [f"{n}_unobserved"] if levels else ["0", "1"]
        variables.append(VariableSpec(n, tuple(levels)))
    return Schema(tuple(variables), {})


def _assignments(path, header, rows, schema: Schema):
    missing = [schema.source_column(n) for n in schema.names if schema.source_column(n) not in header]
    if missing:
        raise SchemaError(f"{path}:1: header lacks column(s) {missing}")
    cols = {n: header.index(schema.source_column(n)) for n in schema.names}
    for line, row in rows:
        a = {}
        for n in schema.names:
            raw = row[cols[n]]
            if raw == "":
                raise SchemaError(f"{path}:{line}: missing value for {n!r}")
            rule = schema.rules.get(n)
            if rule is not None:
                try:
                    raw = rule.apply(raw)
                except ValueError:
                    raise SchemaError(f"{path}:{line}: non-numeric value {raw!r} in binned column {rule.column!r}") from None
            a[n] = raw
        yield line, a


def _tally(path, pairs, schema):
    try:
        return from_cell_counts(((a, c) for _, a, c in pairs), schema.variables)
    except (SchemaError, DomainError) as exc:
        raise SchemaError(f"{path}: {exc}") from None


def read_cells(path, schema: Schema | None = None) -> ContingencyTable:
    """Cell-count CSV with a ``count`` column."""
    path, header, rows = _read_rows(path)
    if "count" not in header:
        raise SchemaError(f"{path}:1: cell-count files need a 'count' column")
    k = header.index("count")
    if schema is None:
        schema = _infer_schema(header, rows, [h for h in header if h != "count"])
    out = []
    for (line, row), (_, a) in zip(rows, _assignments(path, header, rows, schema)):
        try:
            c = float(row[k])
        except ValueError:
            raise SchemaError(f"{path}:{line}: count {row[k]!r} is not a number") from None
        if c < 0:
            raise SchemaError(f"{path}:{line}: negative count {row[k]}")
        _check_levels(path, line, a, schema)
        out.append((line, a, c))
    return _tally(path, out, schema)


def _check_levels(path, line, a, schema):
    for v in schema.variables:
        try:
            v.index(a[v.name])
        except SchemaError as exc:
            raise SchemaError(f"{path}:{line}: {exc}") from None


def read_records(path, schema: Schema | None = None) -> ContingencyTable:
    """Subject-level CSV, one row per subject."""
    path, header, rows = _read_rows(path)
    if schema is None:
        schema = _infer_schema(header, rows, header)
    out = []
    for line, a in _assignments(path, header, rows, schema):
        _check_levels(path, line, a, schema)
        out.append((line, a, 1))
    return _tally(path, out, schema)


def read_table(path, kind: str = "cells", schema_path=None) -> ContingencyTable:
    schema = load_schema(schema_path) if schema_path else None
    if kind == "cells":
        return read_cells(path, schema)
    if kind == "records":
        return read_records(path, schema)
    raise SchemaError(f"unknown input kind {kind!r}; use 'cells' or 'records'")


def write_cells(table: ContingencyTable, path) -> None:
    """Write a table as a cell-count CSV (last variable fastest)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(table.names) + ["count"])
        for idx in itertools.product(*[range(v.cardinality) for v in table.variables]):
            c = table.counts[idx]
            w.writerow([v.levels[i] for v, i in zip(table.variables, idx)] + [int(c) if c == int(c) else c])
