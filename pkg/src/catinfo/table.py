"""Dense multi-way contingency tables.

Cells are stored as a C-ordered numpy array whose axes follow the order of
``ContingencyTable.variables``; the last-listed variable varies fastest in
the flattened cell vector.  Tables are immutable: the cell array is marked
read-only on construction and every operation returns a new table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateTableError, DomainError, SchemaError

__all__ = [
    "VariableSpec",
    "ContingencyTable",
    "ProbabilityTable",
    "from_cell_counts",
    "from_records",
    "from_array",
    "marginalize",
    "compound",
    "to_pdf",
]


@dataclass(frozen=True)
class VariableSpec:
    """A categorical variable with ordered level labels."""

    name: str
    levels: tuple

    def __post_init__(self):
        levels = tuple(self.levels)
        object.__setattr__(self, "levels", levels)
        if not self.name:
            raise SchemaError("variable name must be non-empty")
        if len(levels) < 2:
            raise SchemaError(f"variable {self.name!r} needs at least 2 levels, got {len(levels)}")
        if len(set(levels)) != len(levels):
            raise SchemaError(f"variable {self.name!r} has duplicate level labels")

    @property
    def cardinality(self) -> int:
        return len(self.levels)

    def index(self, level) -> int:
        try:
            return self.levels.index(level)
        except ValueError:
            # CSV input yields strings; tolerate "1" vs 1 mismatches
            for i, lab in enumerate(self.levels):
                if str(lab) == str(level):
                    return i
            raise SchemaError(f"level {level!r} is not declared for variable {self.name!r}") from None


def _check_schema(variables: Sequence[VariableSpec]) -> tuple[VariableSpec, ...]:
    variables = tuple(variables)
    if not variables:
        raise SchemaError("a table needs at least one variable")
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        raise SchemaError(f"duplicate variable names in schema: {names}")
    return variables


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Multi-way table of nonnegative cell weights.

    Parameters
    ----------
    variables : tuple of VariableSpec
        Ordered variables; axis ``i`` of ``counts`` belongs to ``variables[i]``.
    counts : ndarray
        Cell weights with shape ``tuple(v.cardinality for v in variables)``.
    observed : bool
        True for raw observed tallies (integer valued), False for fitted or
        otherwise derived tables that may carry fractional cells.
    """

    variables: tuple
    counts: np.ndarray
    observed: bool = True
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        variables = _check_schema(self.variables)
        object.__setattr__(self, "variables", variables)
        shape = tuple(v.cardinality for v in variables)
        counts = np.array(self.counts, dtype=float)
        if counts.size != int(np.prod(shape)):
            raise SchemaError(f"cell array has {counts.size} cells, schema implies {int(np.prod(shape))}")
        counts = counts.reshape(shape)
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise DomainError("cell weights must be finite and nonnegative")
        if self.observed and not np.all(counts == np.round(counts)):
            raise DomainError("observed tables must carry integer-valued cells")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "_index", {v.name: i for i, v in enumerate(variables)})

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts.shape

    @property
    def cells(self) -> np.ndarray:
        """Flattened cell vector in row-major order (last variable fastest)."""
        return self.counts.ravel()

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def n_cells(self) -> int:
        return self.counts.size

    def variable(self, name: str) -> VariableSpec:
        return self.variables[self.axis(name)]

    def axis(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"unknown variable {name!r}; table has {list(self.names)}") from None

    def axes(self, names: Iterable[str]) -> list[int]:
        return [self.axis(n) for n in names]

    def cardinality(self, names: Iterable[str]) -> int:
        """Joint cardinality of a set of variables (1 for the empty set)."""
        return int(np.prod([self.variables[a].cardinality for a in self.axes(names)], dtype=np.int64))

    def ordered(self, names: Iterable[str]) -> tuple[str, ...]:
        """Return ``names`` sorted into table declaration order."""
        names = set(names)
        for n in names:
            self.axis(n)
        return tuple(n for n in self.names if n in names)

    def marginalize(self, keep) -> "ContingencyTable":
        return marginalize(self, keep)

    def compound(self, group, new_name: str | None = None) -> "ContingencyTable":
        return compound(self, group, new_name)

    def to_pdf(self) -> "ProbabilityTable":
        return to_pdf(self)

    def with_counts(self, counts, observed: bool | None = None) -> "ContingencyTable":
        return ContingencyTable(self.variables, counts, self.observed if observed is None else observed)

    def __eq__(self, other):
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        return self.variables == other.variables and np.array_equal(self.counts, other.counts)

    def __hash__(self):
        return hash((self.variables, self.counts.tobytes()))

    def __repr__(self):
        dims = "x".join(str(s) for s in self.shape)
        return f"ContingencyTable({','.join(self.names)}; {dims}; N={self.total:g})"


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
    """Joint probability mass over the cells of a table."""

    variables: tuple
    probs: np.ndarray

    def __post_init__(self):
        variables = _check_schema(self.variables)
        probs = np.array(self.probs, dtype=float).reshape(tuple(v.cardinality for v in variables))
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise DomainError("probabilities must be nonnegative and sum to 1")
        probs.setflags(write=False)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "probs", probs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def marginal(self, keep) -> np.ndarray:
        """Marginal probability array over ``keep`` (axes in declaration order)."""
        keep = set(keep)
        unknown = keep - set(self.names)
        if unknown or not keep:
            raise DomainError(f"invalid marginal subset {sorted(keep)}")
        drop = tuple(i for i, n in enumerate(self.names) if n not in keep)
        return self.probs.sum(axis=drop)


def from_array(counts, names: Sequence[str], levels: Sequence[Sequence] | None = None, observed: bool = True):
    """Build a table from an array, naming axes and (optionally) levels.

    Levels default to ``0..k-1`` for each axis.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != len(names):
        raise SchemaError(f"array has {counts.ndim} axes but {len(names)} names were given")
    if levels is None:
        levels = [tuple(range(k)) for k in counts.shape]
    variables = [VariableSpec(n, tuple(lv)) for n, lv in zip(names, levels)]
    return ContingencyTable(tuple(variables), counts, observed)


def _cell_index(assignment: Mapping, schema: Sequence[VariableSpec]) -> tuple[int, ...]:
    names = {v.name for v in schema}
    extra = set(assignment) - names
    if extra:
        raise SchemaError(f"unknown variable(s) {sorted(extra)} in assignment")
    idx = []
    for v in schema:
        if v.name not in assignment:
            raise SchemaError(f"assignment does not give a level for {v.name!r}")
        idx.append(v.index(assignment[v.name]))
    return tuple(idx)


def from_cell_counts(rows: Iterable[tuple[Mapping, float]], schema: Sequence[VariableSpec]) -> ContingencyTable:
    """Tally ``(assignment, count)`` rows into a table.

    Unmentioned cells are zero; repeated assignments are summed.
    """
    schema = _check_schema(schema)
    counts = np.zeros(tuple(v.cardinality for v in schema))
    for assignment, count in rows:
        if count < 0:
            raise DomainError(f"negative count {count} for cell {dict(assignment)}")
        counts[_cell_index(assignment, schema)] += count
    observed = bool(np.all(counts == np.round(counts)))
    return ContingencyTable(schema, counts, observed)


def from_records(records: Iterable[Mapping], schema: Sequence[VariableSpec]) -> ContingencyTable:
    """Cross-tabulate subject-level records (one level per variable each)."""
    return from_cell_counts(((r, 1) for r in records), schema)


def _resolve_subset(table: ContingencyTable, subset) -> tuple[str, ...]:
    if isinstance(subset, str):
        subset = (subset,)
    subset = tuple(subset)
    if len(set(subset)) != len(subset):
        raise DomainError(f"repeated variable in {subset}")
    for n in subset:
        if n not in table._index:
            raise DomainError(f"unknown variable {n!r}; table has {list(table.names)}")
    return subset


def marginalize(table: ContingencyTable, keep) -> ContingencyTable:
    """Sum out every variable not in ``keep``; variable order is preserved."""
    keep = _resolve_subset(table, keep)
    if not keep:
        raise DomainError("marginalize needs a nonempty keep set")
    keep = set(keep)
    drop = tuple(i for i, n in enumerate(table.names) if n not in keep)
    variables = tuple(v for v in table.variables if v.name in keep)
    counts = table.counts.sum(axis=drop) if drop else table.counts
    return ContingencyTable(variables, counts, table.observed)


def compound(table: ContingencyTable, group, new_name: str | None = None) -> ContingencyTable:
    """Replace a group of variables by a single product variable.

    The compound variable takes the place of the group's first member and
    its levels are tuples of constituent levels, ordered with the last group
    member varying fastest.  Cell values are only re-indexed.
    """
    group = _resolve_subset(table, group)
    if len(group) < 2:
        raise DomainError("compound needs a group of at least two variables")
    group = table.ordered(group)
    if new_name is None:
        new_name = "".join(group) if all(len(g) == 1 for g in group) else "*".join(group)
    others = [n for n in table.names if n not in group]
    if new_name in others:
        raise SchemaError(f"compound name {new_name!r} collides with an existing variable")
    first = table.axis(group[0])
    pos = sum(1 for n in table.names[:first] if n not in group)
    order = others[:pos] + list(group) + others[pos:]
    arr = np.transpose(table.counts, table.axes(order))
    gvars = [table.variable(n) for n in group]
    shape = arr.shape[:pos] + (int(np.prod([v.cardinality for v in gvars])),) + arr.shape[pos + len(group):]
    levels = tuple(np.ndindex(*[v.cardinality for v in gvars]))
    levels = tuple(tuple(v.levels[i] for v, i in zip(gvars, idx)) for idx in levels)
    newvar = VariableSpec(new_name, levels)
    variables = [table.variable(n) for n in others]
    variables.insert(pos, newvar)
    return ContingencyTable(tuple(variables), arr.reshape(shape), table.observed)


def to_pdf(table: ContingencyTable) -> ProbabilityTable:
    total = table.total
    if total <= 0:
        raise DegenerateTableError("cannot normalize a table with zero total")
    return ProbabilityTable(table.variables, table.counts / total)
