"""Hierarchical log-linear models fitted by iterative proportional fitting.

Also hosts the split of a conditional mutual information into its
interaction (heterogeneous association) and partial association
(homogeneous association) components, and the gated two-step test built on
that split.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateTableError, DomainError, FormulaError
from .info import InfoStat, conditional_mutual_information, three_way_array
from .kernels import ipf_loop
from .table import ContingencyTable, from_array

__all__ = [
    "ModelFormula",
    "LoglinearFit",
    "TwoStepResult",
    "parse_formula",
    "closure_and_params",
    "ipf_fit",
    "interaction_stat",
    "partial_association",
    "two_step_test",
    "resolve_interaction",
]


def _maximal(generators: Iterable[Sequence[str]]) -> tuple[tuple[str, ...], ...]:
    gens = []
    for g in generators:
        g = tuple(dict.fromkeys(g))
        if g and all(set(g) != set(h) for h in gens):
            gens.append(g)
    return tuple(g for g in gens if not any(set(g) < set(h) for h in gens))


@dataclass(frozen=True, eq=False)
class ModelFormula:
    """Hierarchical log-linear model given by its maximal generators.

    Non-maximal and repeated generators are dropped on construction, so
    ``ModelFormula([("A", "B"), ("A",)])`` is the model ``{AB}``.
    """

    generators: tuple

    def __post_init__(self):
        gens = _maximal(self.generators)
        if not gens:
            raise DomainError("a model formula needs at least one generator")
        object.__setattr__(self, "generators", gens)

    @property
    def generator_sets(self) -> frozenset:
        return frozenset(frozenset(g) for g in self.generators)

    @property
    def closure(self) -> frozenset:
        """All nonempty subsets of some generator."""
        out = set()
        for g in self.generators:
            for r in range(1, len(g) + 1):
                out.update(frozenset(s) for s in itertools.combinations(g, r))
        return frozenset(out)

    @property
    def variables(self) -> frozenset:
        return frozenset(v for g in self.generators for v in g)

    def ordered(self, names: Sequence[str]) -> "ModelFormula":
        """Same model with generators and their members in ``names`` order."""
        pos = {n: i for i, n in enumerate(names)}
        gens = [tuple(sorted(g, key=pos.__getitem__)) for g in self.generators]
        gens.sort(key=lambda g: (-len(g), [pos[v] for v in g]))
        return ModelFormula(tuple(gens))

    def text(self) -> str:
        if all(len(v) == 1 for v in self.variables):
            return ",".join("".join(g) for g in self.generators)
        return ", ".join("*".join(g) for g in self.generators)

    def __eq__(self, other):
        if not isinstance(other, ModelFormula):
            return NotImplemented
        return self.generator_sets == other.generator_sets

    def __hash__(self):
        return hash(self.generator_sets)

    def __repr__(self):
        return f"ModelFormula({{{self.text()}}})"


def parse_formula(text: str, names: Sequence[str] | None = None) -> ModelFormula:
    """Parse ``"ACS,ADG,GM"`` or ``"age*sex, sex*smoke"`` into a formula.

    Without ``*`` a generator token is read as a run of single-letter
    variable names, unless the whole token is itself a known name.
    """
    known = set(names) if names is not None else None
    gens = []
    pos = 0
    for token in text.split(","):
        start = pos + len(token) - len(token.lstrip())
        pos += len(token) + 1
        tok = token.strip()
        if not tok:
            raise FormulaError("empty generator", start)
        if "*" in tok:
            parts = [p.strip() for p in tok.split("*")]
            if any(not p for p in parts):
                raise FormulaError(f"empty factor in {tok!r}", start)
        elif known is not None and tok in known:
            parts = [tok]
        else:
            parts = list(tok)
        for p in parts:
            if known is not None and p not in known:
                raise FormulaError(f"unknown variable {p!r} in generator {tok!r}", start + tok.find(p))
        if len(set(parts)) != len(parts):
            raise FormulaError(f"repeated variable in generator {tok!r}", start)
        gens.append(tuple(parts))
    if not gens:
        raise FormulaError("empty formula", 0)
    return ModelFormula(tuple(gens))


def closure_and_params(generators, cardinalities) -> tuple[frozenset, int]:
    """Closure of a generator set and its free-parameter count.

    ``n_params = 1 + sum over closure terms s of prod_{v in s} (card(v) - 1)``.
    ``cardinalities`` maps variable names to level counts (a table also works).
    """
    formula = generators if isinstance(generators, ModelFormula) else ModelFormula(tuple(generators))
    if isinstance(cardinalities, ContingencyTable):
        cardinalities = {v.name: v.cardinality for v in cardinalities.variables}
    missing = formula.variables - set(cardinalities)
    if missing:
        raise DomainError(f"generators mention unknown variables {sorted(missing)}")
    closure = formula.closure
    n_params = 1 + sum(int(np.prod([cardinalities[v] - 1 for v in s])) for s in closure)
    return closure, n_params


@dataclass(frozen=True)
class LoglinearFit:
    formula: ModelFormula
    fitted: ContingencyTable
    deviance: InfoStat
    n_params: int
    aic: float
    converged: bool
    iterations: int
    max_discrepancy: float

    def to_dict(self) -> dict:
        return {
            "formula": self.formula.text(),
            "deviance": self.deviance.value,
            "df": self.deviance.df,
            "p": self.deviance.p_value,
            "n_params": self.n_params,
            "aic": self.aic,
            "converged": self.converged,
            "iterations": self.iterations,
        }


@lru_cache(maxsize=4096)
def _margin_index(shape: tuple, axes: tuple) -> tuple[np.ndarray, int]:
    grids = np.indices(shape).reshape(len(shape), -1)
    sub = tuple(shape[a] for a in axes)
    idx = np.ravel_multi_index(tuple(grids[a] for a in axes), sub).astype(np.int64)
    idx.setflags(write=False)
    return idx, int(np.prod(sub))


def deviance_value(observed: np.ndarray, fitted: np.ndarray) -> float:
    """``2 sum n log(n / m)`` over cells with ``n > 0``."""
    n = observed.ravel()
    m = fitted.ravel()
    mask = n > 0
    if np.any(m[mask] <= 0):
        return float("inf")
    return float(2.0 * (n[mask] * np.log(n[mask] / m[mask])).sum())


def ipf_fit(table: ContingencyTable, formula, tol: float = 1e-8, max_iter: int = 1000) -> LoglinearFit:
    """Maximum-likelihood fit of a hierarchical log-linear model by IPF.

    Generator margins are matched cyclically in the order given until the
    largest absolute margin discrepancy drops below ``tol``.  A fit that
    runs out of cycles is returned with ``converged=False``.
    """
    if isinstance(formula, str):
        formula = parse_formula(formula, table.names)
    if tol <= 0:
        raise DomainError("tol must be positive")
    total = table.total
    if total <= 0:
        raise DegenerateTableError("cannot fit a model to an empty table")
    _, n_params = closure_and_params(formula, table)

    shape = table.shape
    idx_rows, targets, offsets = [], [], [0]
    for g in formula.generators:
        axes = tuple(sorted(table.axes(g)))
        idx, size = _margin_index(shape, axes)
        drop = tuple(a for a in range(len(shape)) if a not in axes)
        idx_rows.append(idx)
        targets.append(table.counts.sum(axis=drop).ravel() if drop else table.cells)
        offsets.append(offsets[-1] + size)
    idx = np.ascontiguousarray(np.vstack(idx_rows))
    target = np.ascontiguousarray(np.concatenate(targets), dtype=float)
    offsets = np.asarray(offsets, dtype=np.int64)
    fitted = np.full(table.n_cells, total / table.n_cells)
    iterations, converged, dev = ipf_loop(fitted, idx, target, offsets, float(tol), int(max_iter))

    df = table.n_cells - n_params
    g2 = deviance_value(table.counts, fitted)
    deviance = InfoStat.from_value(g2, df, converged)
    return LoglinearFit(
        formula=formula,
        fitted=ContingencyTable(table.variables, fitted.reshape(shape), observed=False),
        deviance=deviance,
        n_params=n_params,
        aic=g2 + 2 * n_params,
        converged=converged,
        iterations=iterations,
        max_discrepancy=dev,
    )


def _as_tuple(x):
    return (x,) if isinstance(x, str) else tuple(x)


def _three_way_table(table: ContingencyTable, a, b, c) -> ContingencyTable:
    arr = three_way_array(table, a, b, c)
    return from_array(arr, ("a", "b", "c"), observed=False)


def _check_abc(a, b, c):
    a, b, c = _as_tuple(a), _as_tuple(b), _as_tuple(c)
    if not a or not b or not c:
        raise DomainError("interaction needs nonempty A, B and C")
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise DomainError(f"arguments overlap: {a}, {b}, {c}")
    return a, b, c


_NO_THREE_WAY = ModelFormula((("a", "b"), ("a", "c"), ("b", "c")))


def interaction_stat(table: ContingencyTable, a, b, c, tol: float = 1e-10, max_iter: int = 5000) -> InfoStat:
    """Interaction component ``Int(A; B; C)``.

    Deviance of the no-three-factor-interaction model ``{AB, AC, BC}`` on the
    table with A, B and C each compounded into one variable, with
    ``df = (|A|-1)(|B|-1)(|C|-1)``.
    """
    a, b, c = _check_abc(a, b, c)
    t3 = _three_way_table(table, a, b, c)
    fit = ipf_fit(t3, _NO_THREE_WAY, tol=tol, max_iter=max_iter)
    ka, kb, kc = t3.shape
    df = (ka - 1) * (kb - 1) * (kc - 1)
    return InfoStat.from_value(fit.deviance.value, df, fit.converged)


def partial_association(table: ContingencyTable, a, b, c, interaction: InfoStat | None = None, cmi: InfoStat | None = None) -> InfoStat:
    """Partial association ``Par(A; B | C) = I(A; B | C) - Int(A; B; C)``.

    Tiny negative differences from rounding are clamped to zero.
    """
    a, b, c = _check_abc(a, b, c)
    if cmi is None:
        cmi = conditional_mutual_information(table, a, b, c)
    if interaction is None:
        interaction = interaction_stat(table, a, b, c)
    value = cmi.value - interaction.value
    if value < 0 and value > -1e-6 * max(1.0, cmi.value):
        value = 0.0
    df = cmi.df - interaction.df
    return InfoStat.from_value(value, df, interaction.converged)


@dataclass(frozen=True)
class TwoStepResult:
    """Gated test of ``I(A;B|C) = Int + Par``.

    ``partial_significant`` is None when the interaction was significant,
    in which case the partial association is reported but not tested.
    """

    cmi: InfoStat
    interaction: InfoStat
    partial: InfoStat
    interaction_significant: bool
    partial_significant: bool | None

    def to_dict(self) -> dict:
        return {
            "cmi": self.cmi.to_dict(),
            "interaction": self.interaction.to_dict(),
            "partial": self.partial.to_dict(),
            "interaction_significant": self.interaction_significant,
            "partial_significant": self.partial_significant,
        }


def two_step_test(table: ContingencyTable, a, b, c, alpha_int: float = 0.05, alpha_par: float = 0.05) -> TwoStepResult:
    """Test no-interaction first; test uniform association only if that is accepted."""
    for al in (alpha_int, alpha_par):
        if not 0 < al < 1:
            raise DomainError(f"significance levels must lie in (0, 1), got {al}")
    a, b, c = _check_abc(a, b, c)
    cmi = conditional_mutual_information(table, a, b, c)
    inter = interaction_stat(table, a, b, c)
    par = partial_association(table, a, b, c, interaction=inter, cmi=cmi)
    int_sig = inter.p_value <= alpha_int
    par_sig = None if int_sig else par.p_value <= alpha_par
    return TwoStepResult(cmi, inter, par, int_sig, par_sig)


def resolve_interaction(table: ContingencyTable, a: str, b: str, c: Sequence[str], alpha: float = 0.05) -> tuple:
    """Lowest-order structure that explains a significant ``Int(a; b; C)``.

    On the marginal table over ``{a, b} + C`` the a-b association is allowed
    to vary with a family of conditioner subsets on top of the base model
    ``{aC, bC, ab}``.  Families are searched by increasing order (single
    modifiers first, then pairs, ...) and, within an order, by increasing
    number of conditioners involved; the first level with a family whose
    model fits at ``alpha`` wins (ties broken by the larger p-value).
    Returns the modifier sets, each in table order.  The full conditioner
    set is the fallback and always fits.
    """
    c = table.ordered(c)
    if len(c) == 0:
        return ()
    if len(c) == 1:
        return (c,)
    names = table.ordered((a, b) + tuple(c))
    marg = table.marginalize(names)
    base = [(a,) + c, (b,) + c]
    for order in range(1, len(c)):
        for width in range(order, len(c) + 1):
            best = None
            for involved in itertools.combinations(c, width):
                family = tuple(itertools.combinations(involved, order))
                gens = base + [(a, b) + m for m in family]
                fit = ipf_fit(marg, ModelFormula(tuple(gens)), tol=1e-8, max_iter=2000)
                p = fit.deviance.p_value
                if p >= alpha and (best is None or p > best[0]):
                    best = (p, family)
            if best is not None:
                return tuple(tuple(m) for m in best[1])
    return (tuple(c),)
