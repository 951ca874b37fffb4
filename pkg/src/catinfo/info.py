"""Sample entropies, mutual information and conditional mutual information.

Every MI-type statistic is reported on the ``2N`` log-likelihood-ratio scale
(natural log), so it is directly referred to a chi-square distribution.
Cells with zero mass contribute nothing (``0 log 0 = 0``) and degrees of
freedom always use nominal cardinalities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chisq import chi_square_sf, format_p
from .errors import DegenerateTableError, DomainError
from .table import ContingencyTable, ProbabilityTable

__all__ = [
    "InfoStat",
    "GroupPartition",
    "CMITerm",
    "DecompositionReport",
    "entropy",
    "mutual_information",
    "conditional_mutual_information",
    "chain_decompose",
    "three_way_array",
    "format_set",
]


@dataclass(frozen=True)
class InfoStat:
    """A likelihood-ratio statistic with its chi-square reference.

    ``converged`` is False when the statistic came from an iterative fit
    that stopped before reaching its tolerance.
    """

    value: float
    df: int
    p_value: float
    converged: bool = True

    @classmethod
    def from_value(cls, value: float, df: int, converged: bool = True) -> "InfoStat":
        df = int(df)
        value = float(value)
        p = 1.0 if df == 0 else chi_square_sf(max(value, 0.0), df)
        return cls(value, df, p, converged)

    def significant(self, alpha: float) -> bool:
        return self.p_value <= alpha

    def to_dict(self) -> dict:
        return {"value": self.value, "df": self.df, "p": self.p_value, "converged": self.converged}

    def __str__(self):
        return f"{self.value:.3f} (df = {self.df}, p {_p_text(self.p_value)})"


def _p_text(p):
    s = format_p(p)
    return s if s.startswith("<") else f"= {s}"


@dataclass(frozen=True)
class GroupPartition:
    """Disjoint nonempty groups of variables; each group acts as one compound variable."""

    groups: tuple

    def __post_init__(self):
        groups = tuple(tuple([g]) if isinstance(g, str) else tuple(g) for g in self.groups)
        seen = set()
        for g in groups:
            if not g:
                raise DomainError("partition groups must be nonempty")
            if seen & set(g):
                raise DomainError(f"partition groups overlap: {groups}")
            seen |= set(g)
        object.__setattr__(self, "groups", groups)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for g in self.groups for v in g)

    def check_covers(self, names: Sequence[str]) -> None:
        if set(self.variables) != set(names):
            raise DomainError(f"partition {self.groups} does not cover {tuple(names)}")


def format_set(names: Sequence[str]) -> str:
    names = tuple(names)
    if len(names) == 1:
        return names[0]
    return "{" + ", ".join(names) + "}"


def _as_tuple(subset) -> tuple[str, ...]:
    if isinstance(subset, str):
        return (subset,)
    return tuple(subset)


def _grouped_array(table: ContingencyTable, groups: Sequence[Sequence[str]]) -> np.ndarray:
    """Marginal over the union of ``groups``, one axis per group (empty group -> size-1 axis)."""
    groups = [table.ordered(g) for g in groups]
    flat = [v for g in groups for v in g]
    if len(set(flat)) != len(flat):
        raise DomainError(f"variable groups must be disjoint: {groups}")
    if not flat:
        raise DomainError("no variables selected")
    marg = table.marginalize(flat)
    arr = np.transpose(marg.counts, marg.axes(flat))
    shape = tuple(table.cardinality(g) for g in groups)
    return arr.reshape(shape)


def three_way_array(table: ContingencyTable, a, b, c=()) -> np.ndarray:
    """Counts reshaped to ``(|A|, |B|, |C|)`` with each group compounded."""
    return _grouped_array(table, [_as_tuple(a), _as_tuple(b), _as_tuple(c)])


def entropy(pdf: ProbabilityTable, subset=None) -> float:
    """Shannon entropy (nats) of the marginal over ``subset`` (all variables by default)."""
    if subset is None:
        p = pdf.probs
    else:
        subset = _as_tuple(subset)
        if not subset:
            raise DomainError("entropy needs a nonempty subset")
        p = pdf.marginal(subset)
    p = p[p > 0]
    return float(max(-(p * np.log(p)).sum(), 0.0))


def _xlogx_ratio_sum(n: np.ndarray, log_expected: np.ndarray) -> float:
    mask = n > 0
    return float((n[mask] * (np.log(n[mask]) - log_expected[mask])).sum())


def mutual_information(table: ContingencyTable, partition) -> InfoStat:
    """Multi-way sample MI between the groups of ``partition``.

    ``value = 2 sum n log(n N^(k-1) / prod_g n_g)`` and
    ``df = prod(c_g) - 1 - sum(c_g - 1)`` with ``c_g`` the joint group cardinalities.
    """
    if not isinstance(partition, GroupPartition):
        partition = GroupPartition(tuple(partition))
    groups = partition.groups
    if len(groups) < 2:
        raise DomainError("mutual information needs at least two groups")
    arr = _grouped_array(table, groups)
    n_total = arr.sum()
    if n_total <= 0:
        raise DegenerateTableError("mutual information of an empty table")
    k = arr.ndim
    with np.errstate(divide="ignore", invalid="ignore"):
        # log expected count under independence: sum_g log n_g - (k-1) log N
        log_exp = -(k - 1) * np.log(n_total) * np.ones_like(arr)
        for ax in range(k):
            other = tuple(i for i in range(k) if i != ax)
            log_exp = log_exp + np.log(arr.sum(axis=other, keepdims=True))
    value = 2.0 * _xlogx_ratio_sum(arr, log_exp)
    cards = arr.shape
    df = int(np.prod(cards)) - 1 - sum(c - 1 for c in cards)
    return InfoStat.from_value(value, df)


def _cmi_from_array(arr: np.ndarray) -> float:
    n_ac = arr.sum(axis=1, keepdims=True)
    n_bc = arr.sum(axis=0, keepdims=True)
    n_c = arr.sum(axis=(0, 1), keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_exp = np.log(n_ac) + np.log(n_bc) - np.log(n_c)
    return 2.0 * _xlogx_ratio_sum(arr, log_exp)


def conditional_mutual_information(table: ContingencyTable, a, b, c=()) -> InfoStat:
    """Sample CMI ``I(A;B|C)`` with ``df = (|A|-1)(|B|-1)|C|``.

    Empty ``C`` reduces to the two-group MI.  Conditioning slices with zero
    total contribute nothing to the value.
    """
    a, b, c = _as_tuple(a), _as_tuple(b), _as_tuple(c)
    if not a or not b:
        raise DomainError("CMI needs nonempty A and B")
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise DomainError(f"CMI arguments overlap: {a}, {b}, {c}")
    arr = three_way_array(table, a, b, c)
    if arr.sum() <= 0:
        raise DegenerateTableError("conditional mutual information of an empty table")
    value = _cmi_from_array(arr)
    df = (arr.shape[0] - 1) * (arr.shape[1] - 1) * arr.shape[2]
    return InfoStat.from_value(value, df)


def empty_slice_fraction(table: ContingencyTable, c) -> float:
    """Fraction of conditioner levels whose slice of the table is empty."""
    c = _as_tuple(c)
    if not c:
        return 0.0
    marg = _grouped_array(table, [c]).ravel()
    return float(np.mean(marg == 0))


@dataclass
class CMITerm:
    """One chain-rule term ``I(lhs; rhs | conditioner)`` of an information identity.

    ``split`` holds the interaction/partial-association breakdown when it
    has been computed, ``modifiers`` the resolved interaction structure
    (sets of conditioner variables that modify the lhs-rhs association).
    """

    lhs: tuple
    rhs: tuple
    conditioner: tuple
    stat: InfoStat
    flagged: bool = False
    sparse: bool = False
    split: object = None
    modifiers: tuple = ()

    @property
    def label(self) -> str:
        s = f"I({format_set(self.lhs)}; {format_set(self.rhs)}"
        if self.conditioner:
            s += f"|{format_set(self.conditioner)}"
        return s + ")"

    def to_dict(self) -> dict:
        d = {
            "lhs": list(self.lhs),
            "rhs": list(self.rhs),
            "conditioner": list(self.conditioner),
            "value": self.stat.value,
            "df": self.stat.df,
            "p": self.stat.p_value,
            "flagged": self.flagged,
            "sparse": self.sparse,
        }
        if self.split is not None:
            d["split"] = self.split.to_dict()
        if self.modifiers:
            d["modifiers"] = [list(m) for m in self.modifiers]
        return d

    def text(self) -> str:
        star = "*" if self.flagged else " "
        line = f"{self.label}{star} = {self.stat}"
        if self.sparse:
            line += "  [sparse]"
        return line


@dataclass
class DecompositionReport:
    """Ordered chain-rule terms together with the total they decompose."""

    terms: list
    total: InfoStat | None = None
    title: str = ""
    dropped: list = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return np.array([t.stat.value for t in self.terms])

    @property
    def dfs(self) -> list[int]:
        return [t.stat.df for t in self.terms]

    def to_dict(self) -> dict:
        d = {"title": self.title, "terms": [t.to_dict() for t in self.terms]}
        if self.total is not None:
            d["total"] = self.total.to_dict()
        if self.dropped:
            d["dropped"] = [t.to_dict() for t in self.dropped]
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def text(self) -> str:
        lines = [self.title] if self.title else []
        for i, t in enumerate(self.terms):
            lead = "  = " if i == 0 else "  + "
            lines.append(lead + t.text())
        if self.total is not None:
            lines.append(f"  total: {self.total}")
        return "\n".join(lines)


def make_term(table: ContingencyTable, lhs, rhs, conditioner, alpha: float) -> CMITerm:
    lhs, rhs, conditioner = _as_tuple(lhs), _as_tuple(rhs), table.ordered(_as_tuple(conditioner))
    stat = conditional_mutual_information(table, lhs, rhs, conditioner)
    return CMITerm(
        lhs,
        rhs,
        conditioner,
        stat,
        flagged=stat.p_value > alpha,
        sparse=empty_slice_fraction(table, conditioner) > 0.5,
    )


def chain_decompose(table: ContingencyTable, target, predictors: Sequence, alpha: float = 0.05) -> DecompositionReport:
    """Chain-rule split of ``I(target; predictors)``.

    ``predictors`` is listed in peel order: the first predictor is
    conditioned on all the others, the last enters unconditionally.  Terms
    are emitted in that same order.
    """
    target = _as_tuple(target)
    preds = [_as_tuple(p) for p in predictors]
    if not preds:
        raise DomainError("chain decomposition needs at least one predictor")
    flat = [v for p in preds for v in p]
    if len(set(flat)) != len(flat) or set(flat) & set(target):
        raise DomainError("predictors must be pairwise disjoint and disjoint from the target")
    terms = []
    for i, p in enumerate(preds):
        rest = [v for q in preds[i + 1:] for v in q]
        terms.append(make_term(table, target, p, rest, alpha))
    total = mutual_information(table, GroupPartition((target, tuple(flat))))
    title = f"I({format_set(target)}; {format_set(table.ordered(flat))})"
    return DecompositionReport(terms, total, title)
