"""Grouped binary logistic regression on contingency tables.

A logit model for a binary target is fitted to the counts of each
covariate pattern (joint level combination of the predictors).  Predictor
levels use 0/1 dummy coding against the first level and interactions are
products of dummies, so for binary predictors each term carries a single
coefficient.

The module also builds the information-based logit model from a chain
decomposition of ``I(target; predictors)``, runs a minimum-AIC neighbourhood
search around a base model and checks the logit fit against the equivalent
log-linear model.
"""

from __future__ import annotations

import itertools
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .chisq import format_p
from .errors import DomainError, FormulaError, RankDeficiencyError
from .info import DecompositionReport, InfoStat
from .loglinear import ModelFormula, ipf_fit, resolve_interaction, two_step_test
from .selection import peel_decompose
from .table import ContingencyTable

__all__ = [
    "LogitModel",
    "LogitFit",
    "parse_logit",
    "fit_logit",
    "mi_logit_construct",
    "aic_neighborhood_search",
    "loglinear_equivalence_check",
    "design_matrix",
    "aic_from_loglik",
]

SEPARATION_BOUND = 30.0


def _close(terms) -> tuple[tuple[str, ...], ...]:
    """Hierarchical closure; missing lower-order terms go right before the term needing them."""
    out, seen = [], set()
    for t in terms:
        t = tuple(dict.fromkeys(t))
        for r in range(1, len(t) + 1):
            for s in itertools.combinations(t, r):
                if frozenset(s) not in seen:
                    seen.add(frozenset(s))
                    out.append(s)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class LogitModel:
    """Hierarchical logit model ``logit P(target = 1 | x) = b0 + sum_t b_t x_t``.

    ``terms`` excludes the intercept, which is always present.  Missing
    lower-order terms of an interaction are added on construction, so
    ``LogitModel("S", [("D", "A")])`` is the model ``S ~ D + A + D:A``.
    """

    target: str
    terms: tuple = ()

    def __post_init__(self):
        terms = _close(self.terms)
        for t in terms:
            if self.target in t:
                raise DomainError(f"term {':'.join(t)} contains the target {self.target!r}")
        object.__setattr__(self, "terms", terms)

    @property
    def term_sets(self) -> frozenset:
        return frozenset(frozenset(t) for t in self.terms)

    @property
    def predictors(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(v for t in self.terms for v in t))

    @property
    def n_terms(self) -> int:
        """Terms including the intercept."""
        return len(self.terms) + 1

    def contains(self, term) -> bool:
        return frozenset(term) in self.term_sets

    def add(self, term) -> "LogitModel":
        return LogitModel(self.target, self.terms + (tuple(term),))

    def remove(self, term) -> "LogitModel":
        term = frozenset(term)
        if any(term < frozenset(t) for t in self.terms):
            raise DomainError(f"{':'.join(sorted(term))} supports a higher-order term")
        return LogitModel(self.target, tuple(t for t in self.terms if frozenset(t) != term))

    def removable(self) -> list[tuple[str, ...]]:
        """Terms not contained in any other term."""
        sets = [frozenset(t) for t in self.terms]
        return [t for t, s in zip(self.terms, sets) if not any(s < o for o in sets)]

    def ordered(self, names: Sequence[str]) -> "LogitModel":
        """Members of each term in ``names`` order; terms by order, then position."""
        pos = {n: i for i, n in enumerate(names)}
        terms = [tuple(sorted(t, key=pos.__getitem__)) for t in self.terms]
        terms.sort(key=lambda t: (len(t), [pos[v] for v in t]))
        return LogitModel(self.target, tuple(terms))

    def text(self) -> str:
        rhs = " + ".join(":".join(t) for t in self.terms) or "1"
        return f"{self.target} ~ {rhs}"

    def __eq__(self, other):
        if not isinstance(other, LogitModel):
            return NotImplemented
        return self.target == other.target and self.term_sets == other.term_sets

    def __hash__(self):
        return hash((self.target, self.term_sets))

    def __repr__(self):
        return f"LogitModel({self.text()})"


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")


def parse_logit(text: str, names: Sequence[str] | None = None) -> LogitModel:
    """Parse ``"S ~ D + A + D:A"``.

    ``D*A`` expands to ``D + A + D:A`` and ``1`` is the intercept-only
    right-hand side.  Unknown names raise ``FormulaError`` when ``names`` is
    given.
    """
    known = set(names) if names is not None else None
    if text.count("~") != 1:
        raise FormulaError("expected exactly one '~'", text.find("~") if "~" in text else 0)
    lhs, rhs = text.split("~")
    target = lhs.strip()
    if not _NAME.fullmatch(target):
        raise FormulaError(f"invalid target {target!r}", 0)
    if known is not None and target not in known:
        raise FormulaError(f"unknown target {target!r}", text.find(target))

    def check(name, at):
        if not _NAME.fullmatch(name):
            raise FormulaError(f"invalid variable name {name!r}", at)
        if known is not None and name not in known:
            raise FormulaError(f"unknown variable {name!r}", at)

    terms = []
    pos = len(lhs) + 1
    for token in rhs.split("+"):
        start = pos + len(token) - len(token.lstrip())
        pos += len(token) + 1
        tok = token.strip()
        if not tok:
            raise FormulaError("empty term", start)
        if tok in ("1", "0"):
            if tok == "0":
                raise FormulaError("models without an intercept are not supported", start)
            continue
        if "*" in tok:
            parts = [p.strip() for p in tok.split("*")]
            for p in parts:
                check(p, start + tok.find(p))
            terms.extend(s for r in range(1, len(parts) + 1) for s in itertools.combinations(parts, r))
            continue
        parts = [p.strip() for p in tok.split(":")]
        for p in parts:
            check(p, start + tok.find(p))
        if len(set(parts)) != len(parts):
            raise FormulaError(f"repeated variable in term {tok!r}", start)
        terms.append(tuple(parts))
    try:
        return LogitModel(target, tuple(terms))
    except DomainError as exc:
        raise FormulaError(str(exc), len(lhs) + 1) from None


# ---------------------------------------------------------------------------
# design and grouped data


def _term_columns(term, cards) -> list[tuple[str, tuple]]:
    """Dummy columns of a term: one per combination of non-reference levels."""
    ranges = [range(1, cards[v]) for v in term]
    cols = []
    for lv in itertools.product(*ranges):
        if all(cards[v] == 2 for v in term):
            label = ":".join(term)
        else:
            label = ":".join(f"{v}[{k}]" for v, k in zip(term, lv))
        cols.append((label, lv))
    return cols


def design_matrix(model: LogitModel, predictors: Sequence[str], cards: dict) -> tuple[np.ndarray, list[str], list[tuple]]:
    """Design over the full predictor grid (C order, last predictor fastest).

    Returns the matrix, its column labels and the term owning each column.
    """
    predictors = list(predictors)
    shape = [cards[p] for p in predictors]
    grid = np.indices(shape).reshape(len(shape), -1)
    col_of = {p: grid[i] for i, p in enumerate(predictors)}
    cols, labels, owners = [np.ones(grid.shape[1])], ["(intercept)"], [()]
    for term in model.terms:
        for label, lv in _term_columns(term, cards):
            x = np.ones(grid.shape[1])
            for v, k in zip(term, lv):
                x = x * (col_of[v] == k)
            cols.append(x)
            labels.append(label)
            owners.append(term)
    return np.column_stack(cols), labels, owners


def _grouped(table: ContingencyTable, target: str, predictors: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Per-pattern totals and target successes over the predictor grid."""
    tv = table.variable(target)
    if tv.cardinality != 2:
        raise DomainError(f"target {target!r} must be binary, it has {tv.cardinality} levels")
    names = list(predictors) + [target]
    marg = table.marginalize(names)
    arr = np.transpose(marg.counts, marg.axes(names))
    arr = arr.reshape(-1, 2)
    return arr.sum(axis=1), arr[:, 1]


def _default_predictors(table: ContingencyTable, model: LogitModel) -> tuple[str, ...]:
    return tuple(n for n in table.names if n != model.target)


def aic_from_loglik(log_likelihood: float, n_params: int) -> float:
    """``-2 log L + 2 k``."""
    return -2.0 * log_likelihood + 2 * n_params


def _loglik(eta, n, y):
    # y log p + (n - y) log(1 - p) with p = expit(eta), written stably
    return float(np.sum(y * eta - n * np.logaddexp(0.0, eta)))


@dataclass(frozen=True)
class LogitFit:
    """Maximum-likelihood fit of a grouped logit model.

    ``log_likelihood`` is the grouped binomial log-likelihood including the
    ``log C(n, y)`` constants; ``kernel_log_likelihood`` omits them (for a
    single pattern this is the Bernoulli log-likelihood of the subjects).
    ``deviance`` is referred to the saturated model over the observed
    covariate patterns.
    """

    model: LogitModel
    predictors: tuple
    labels: tuple
    coefficients: np.ndarray
    std_errors: np.ndarray
    log_likelihood: float
    kernel_log_likelihood: float
    deviance: InfoStat
    n_params: int
    aic: float
    converged: bool
    iterations: int
    separated: bool = False
    loglik_trace: tuple = field(default=(), repr=False)
    n_patterns: int = 0
    cards: dict = field(default_factory=dict, repr=False)

    def coef(self, term) -> float:
        """Coefficient of a term with binary variables (``()`` for the intercept)."""
        if isinstance(term, str):
            term = tuple(term.split(":")) if term != "(intercept)" else ()
        if not term:
            return float(self.coefficients[0])
        want = frozenset(term)
        X, labels, owners = design_matrix(self.model, self.predictors, self.cards)
        hits = [i for i, o in enumerate(owners) if frozenset(o) == want]
        if len(hits) != 1:
            raise DomainError(f"term {':'.join(term)} has {len(hits)} coefficients; index coefficients directly")
        return float(self.coefficients[hits[0]])

    def probabilities(self) -> np.ndarray:
        """Fitted ``P(target = second level)`` over the full predictor grid."""
        X, _, _ = design_matrix(self.model, self.predictors, self.cards)
        return special.expit(X @ self.coefficients)

    def to_dict(self) -> dict:
        return {
            "model": self.model.text(),
            "predictors": list(self.predictors),
            "coefficients": {lab: float(b) for lab, b in zip(self.labels, self.coefficients)},
            "std_errors": {lab: float(s) for lab, s in zip(self.labels, self.std_errors)},
            "log_likelihood": self.log_likelihood,
            "deviance": self.deviance.value,
            "df": self.deviance.df,
            "p": self.deviance.p_value,
            "n_params": self.n_params,
            "aic": self.aic,
            "converged": self.converged,
            "separated": self.separated,
            "iterations": self.iterations,
        }

    def text(self) -> str:
        lines = [f"logit model: {self.model.text()}"]
        width = max(len(lab) for lab in self.labels)
        lines.append(f"  {'term':<{width}}  {'estimate':>9}  {'s.e.':>7}  {'z':>7}")
        for lab, b, s in zip(self.labels, self.coefficients, self.std_errors):
            z = b / s if s > 0 else float("nan")
            lines.append(f"  {lab:<{width}}  {b:9.3f}  {s:7.3f}  {z:7.2f}")
        d = self.deviance
        lines.append(f"  log-likelihood {self.log_likelihood:.3f}; deviance {d.value:.3f} (df = {d.df}, p "
                     f"{'' if format_p(d.p_value).startswith('<') else '= '}{format_p(d.p_value)}); AIC {self.aic:.3f}")
        if not self.converged:
            lines.append("  WARNING: " + ("separation detected, estimates diverge" if self.separated else "did not converge"))
        return "\n".join(lines)


def _collinear_labels(X: np.ndarray, labels: Sequence[str]) -> list[str]:
    kept, bad = [], []
    rank = 0
    for j in range(X.shape[1]):
        r = np.linalg.matrix_rank(X[:, kept + [j]])
        if r > rank:
            kept.append(j)
            rank = r
        else:
            bad.append(labels[j])
    return bad


def fit_logit(table: ContingencyTable, model: LogitModel | str, predictors: Sequence[str] | None = None,
              tol: float = 1e-10, max_iter: int = 100) -> LogitFit:
    """Newton-Raphson fit with step-halving.

    Parameters
    ----------
    table : ContingencyTable
        Counts over the target and the predictors.
    model : LogitModel or str
        Model or its text form ``"S ~ D + A + D:A"``.
    predictors : sequence of str, optional
        Variables defining covariate patterns (default: every non-target
        variable of the table).  Must include every model variable.
    tol : float
        Stop when the log-likelihood gain of a step, or the largest score
        component, falls below ``tol``.

    Raises
    ------
    RankDeficiencyError
        If the design over the observed patterns is not of full column rank.
    """
    if isinstance(model, str):
        model = parse_logit(model, table.names)
    table.axis(model.target)
    predictors = tuple(_default_predictors(table, model) if predictors is None else predictors)
    missing = set(model.predictors) - set(predictors)
    if missing:
        raise DomainError(f"model variables {sorted(missing)} are not among the pattern predictors")
    if model.target in predictors:
        raise DomainError("the target cannot be a predictor")
    cards = {p: table.variable(p).cardinality for p in predictors}
    n_all, y_all = _grouped(table, model.target, predictors) if predictors else (
        np.array([table.total]), np.array([table.marginalize([model.target]).counts[1]]))
    if predictors:
        X_all, labels, _ = design_matrix(model, predictors, cards)
    else:
        X_all, labels = np.ones((1, 1)), ["(intercept)"]
    obs = n_all > 0
    if not obs.any():
        raise DomainError("no observations")
    X, n, y = X_all[obs], n_all[obs], y_all[obs]
    k = X.shape[1]
    if np.linalg.matrix_rank(X) < k:
        bad = _collinear_labels(X, labels)
        raise RankDeficiencyError(f"design is rank deficient; collinear terms: {', '.join(bad)}", bad)

    beta = np.zeros(k)
    ybar = y.sum() / n.sum()
    if 0 < ybar < 1:
        beta[0] = np.log(ybar / (1 - ybar))
    ll = _loglik(X @ beta, n, y)
    trace = [ll]
    converged = separated = False
    it = 0
    for it in range(1, max_iter + 1):
        p = special.expit(X @ beta)
        grad = X.T @ (y - n * p)
        if np.max(np.abs(grad)) < tol:
            converged = True
            it -= 1
            break
        w = n * p * (1 - p)
        H = X.T @ (X * w[:, None])
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        t = 1.0
        for _ in range(60):
            cand = beta + t * step
            ll_new = _loglik(X @ cand, n, y)
            if ll_new >= ll - 1e-12 * max(1.0, abs(ll)):
                break
            t *= 0.5
        else:
            break
        gain = ll_new - ll
        beta, ll = cand, max(ll_new, ll)
        trace.append(ll)
        if np.max(np.abs(beta)) > SEPARATION_BOUND:
            separated = True
            break
        if gain < tol:
            converged = True
            break

    p = special.expit(X @ beta)
    w = n * p * (1 - p)
    H = X.T @ (X * w[:, None])
    try:
        se = np.sqrt(np.clip(np.diag(np.linalg.inv(H)), 0, None))
    except np.linalg.LinAlgError:
        se = np.full(k, np.nan)
    const = float(np.sum(special.gammaln(n + 1) - special.gammaln(y + 1) - special.gammaln(n - y + 1)))
    eta = X @ beta
    kernel = _loglik(eta, n, y)
    ll_full = kernel + const
    mu = n * p
    with np.errstate(divide="ignore", invalid="ignore"):
        dev_terms = np.where(y > 0, y * np.log(y / mu), 0.0) + np.where(n - y > 0, (n - y) * np.log((n - y) / (n - mu)), 0.0)
    dev = float(2 * dev_terms.sum())
    df = int(obs.sum()) - k
    if df < 0:
        raise RankDeficiencyError(f"{k} parameters exceed {int(obs.sum())} observed covariate patterns")
    return LogitFit(
        model=model,
        predictors=predictors,
        labels=tuple(labels),
        coefficients=beta,
        std_errors=se,
        log_likelihood=ll_full,
        kernel_log_likelihood=kernel,
        deviance=InfoStat.from_value(dev, df, converged and not separated),
        n_params=k,
        aic=aic_from_loglik(ll_full, k),
        converged=converged and not separated,
        iterations=it,
        separated=separated,
        loglik_trace=tuple(trace),
        n_patterns=int(obs.sum()),
        cards=cards,
    )


# ---------------------------------------------------------------------------
# information-based construction


@dataclass
class LogitConstruction:
    """Outcome of ``mi_logit_construct``."""

    model: LogitModel
    report: DecompositionReport
    screening: list
    dropped: list
    survivors: list
    redundant: list

    def to_dict(self) -> dict:
        return {
            "model": self.model.text(),
            "survivors": list(self.survivors),
            "dropped": list(self.dropped),
            "redundant": [":".join(t) for t in self.redundant],
            "screening": [r.to_dict() for r in self.screening],
            "decomposition": self.report.to_dict(),
        }

    def text(self) -> str:
        lines = []
        for r in self.screening:
            lines.append(r.text())
        if self.dropped:
            lines.append("Dropped predictors: " + ", ".join(self.dropped))
        lines.append("")
        lines.append(partition_table(self.report))
        if self.redundant:
            lines.append("Redundant interactions removed: " + ", ".join(":".join(t) for t in self.redundant))
        lines.append("MI logit model: " + self.model.text())
        return "\n".join(lines)


def partition_table(report: DecompositionReport) -> str:
    """CMI terms with their interaction / partial association columns."""

    def cell(s):
        return f"{s.value:9.3f} {s.df:3d} {format_p(s.p_value):>8}"

    labels = [t.label for t in report.terms]
    w = max(len(x) for x in labels) + 1
    lines = [f"{'term':<{w}} {'CMI':>9} {'df':>3} {'p':>8} | {'Int':>9} {'df':>3} {'p':>8} | {'Par':>9} {'df':>3} {'p':>8}"]
    for t, lab in zip(report.terms, labels):
        row = f"{lab:<{w}} {cell(t.stat)}"
        if t.split is not None:
            sp = t.split
            istar = "" if sp.interaction_significant else "*"
            row += f" | {cell(sp.interaction)}{istar} | {cell(sp.partial)}"
        lines.append(row)
    return "\n".join(lines)


def _lr_drop(table, model, term, predictors) -> float:
    full = fit_logit(table, model, predictors)
    red = fit_logit(table, model.remove(term), predictors)
    stat = InfoStat.from_value(max(red.deviance.value - full.deviance.value, 0.0), full.n_params - red.n_params)
    return stat.p_value


def mi_logit_construct(table: ContingencyTable, target: str, alpha: float = 0.05,
                       alpha_int: float | None = None, predictors: Sequence[str] | None = None) -> LogitConstruction:
    """Build a logit model from the chain decomposition of ``I(target; predictors)``.

    1. Screening: peel the predictors greedily; while the leading
       (highest-order) term is insignificant its predictor is dropped,
       unless its partial association is significant with the interaction
       accepted, then screening stops.
    2. The survivors are peeled again and each term is split into its
       interaction and partial association components.
    3. A main effect enters for each survivor whose term carries a
       significant partial association or interaction (or, for the
       unconditioned last term, a significant MI).  A significant
       interaction is resolved into its lowest-order modifiers, each
       giving an interaction term.  Interaction terms of three or more
       predictors whose removal is not significant at ``alpha`` are
       dropped as redundant.
    """
    alpha_int = alpha if alpha_int is None else alpha_int
    if table.variable(target).cardinality != 2:
        raise DomainError(f"target {target!r} must be binary")
    preds = [n for n in (table.names if predictors is None else predictors) if n != target]
    if not preds:
        raise DomainError("no predictors")
    pattern_preds = tuple(preds)

    screening, dropped = [], []
    while preds:
        rep = peel_decompose(table, target, preds, alpha)
        screening.append(rep)
        lead = rep.terms[0]
        if not lead.flagged:
            break
        (u,) = lead.rhs
        if lead.conditioner:
            sp = two_step_test(table, target, u, lead.conditioner, alpha_int, alpha)
            lead.split = sp
            if sp.partial_significant:
                break
        dropped.append(u)
        preds.remove(u)

    survivors = list(table.ordered(preds))
    if not survivors:
        report = DecompositionReport([], None, f"I({target}; -)")
        return LogitConstruction(LogitModel(target), report, screening, dropped, [], [])

    report = peel_decompose(table, target, survivors, alpha)
    terms = []
    for t in report.terms:
        (u,) = t.rhs
        if not t.conditioner:
            if not t.flagged:
                terms.append((u,))
            continue
        t.split = two_step_test(table, target, u, t.conditioner, alpha_int, alpha)
        if t.split.interaction_significant:
            t.modifiers = resolve_interaction(table, target, u, t.conditioner, alpha_int)
            terms.append((u,))
            terms.extend((u,) + tuple(m) for m in t.modifiers)
        elif t.split.partial_significant:
            terms.append((u,))
    model = LogitModel(target, tuple(terms)).ordered(table.names)

    redundant = []
    for term in sorted(model.removable(), key=len, reverse=True):
        if len(term) < 3 or not model.contains(term):
            continue
        if _lr_drop(table, model, term, pattern_preds) > alpha:
            model = model.remove(term)
            redundant.append(term)
    report.title = f"I({target}; {{{', '.join(survivors)}}})"
    return LogitConstruction(model, report, screening, dropped, survivors, redundant)


# ---------------------------------------------------------------------------
# AIC neighbourhood search


@dataclass
class SearchStep:
    move: str
    term: tuple
    aic: float


def _try_fit(table, model, predictors):
    try:
        return fit_logit(table, model, predictors), ""
    except (RankDeficiencyError, DomainError, np.linalg.LinAlgError) as exc:
        return None, str(exc)


def aic_neighborhood_search(table: ContingencyTable, base: LogitModel | str, candidate_terms: Sequence,
                            predictors: Sequence[str] | None = None, workers: int | None = None,
                            max_steps: int = 50, trace: list | None = None) -> LogitFit:
    """Greedy best-first AIC search over single-term additions and removals.

    Additions are drawn from ``candidate_terms`` (two-way terms among the
    base predictors); any term not supporting a higher-order term may be
    removed.  Neighbours are fitted concurrently when ``workers`` > 1 and
    the lowest-AIC move (ties: additions before removals, then listing
    order) is applied while it improves the AIC.  Neighbours that fail to
    fit, or separate, are skipped and recorded in ``trace``.
    """
    if isinstance(base, str):
        base = parse_logit(base, table.names)
    cands = []
    for t in candidate_terms:
        t = tuple(t.split(":")) if isinstance(t, str) else tuple(t)
        if len(t) != 2:
            raise DomainError(f"candidate terms must be two-way, got {':'.join(t)}")
        if not set(t) <= set(base.predictors):
            raise DomainError(f"candidate term {':'.join(t)} uses variables outside the base model")
        cands.append(t)
    current = fit_logit(table, base, predictors)
    predictors = current.predictors
    if trace is not None:
        trace.append(SearchStep("start", (), current.aic))
    pool = ThreadPoolExecutor(max_workers=workers) if workers and workers > 1 else None
    try:
        for _ in range(max_steps):
            model = current.model
            moves = [("add", t, model.add(t)) for t in cands if not model.contains(t)]
            moves += [("remove", t, model.remove(t)) for t in model.removable()]
            if not moves:
                break
            if pool is not None:
                results = list(pool.map(lambda m: _try_fit(table, m[2], predictors), moves))
            else:
                results = [_try_fit(table, m[2], predictors) for m in moves]
            best = None
            for (kind, t, _), (fit, err) in zip(moves, results):
                if fit is None or not fit.converged:
                    if trace is not None:
                        trace.append(SearchStep(f"skip {kind}: {err or 'not converged'}", t, float("nan")))
                    continue
                if best is None or fit.aic < best[2].aic - 1e-12:
                    best = (kind, t, fit)
            if best is None or best[2].aic >= current.aic - 1e-9:
                break
            current = best[2]
            if trace is not None:
                trace.append(SearchStep(best[0], best[1], current.aic))
    finally:
        if pool is not None:
            pool.shutdown()
    return current


# ---------------------------------------------------------------------------
# log-linear bridge


def loglinear_equivalence_check(table: ContingencyTable, logit_model: LogitModel | str,
                                predictors: Sequence[str] | None = None, tol: float = 1e-11) -> float:
    """Largest difference between logit coefficients fitted directly and via IPF.

    The equivalent log-linear model has generator ``t + {target}`` for each
    logit term ``t``, ``{target}`` for the intercept and the saturated
    generator over the predictors.  The implied logits
    ``log m(x, 1) - log m(x, 0)`` are projected onto the logit design.
    """
    if isinstance(logit_model, str):
        logit_model = parse_logit(logit_model, table.names)
    fit = fit_logit(table, logit_model, predictors)
    preds = list(fit.predictors)
    target = logit_model.target
    gens = [tuple(preds)] + [(target,)] + [tuple(t) + (target,) for t in logit_model.terms]
    sub = table.marginalize(preds + [target])
    ll = ipf_fit(sub, ModelFormula(tuple(gens)), tol=tol, max_iter=100000)
    names = preds + [target]
    m = np.transpose(ll.fitted.counts, ll.fitted.axes(names)).reshape(-1, 2)
    ok = (m[:, 0] > 0) & (m[:, 1] > 0)
    eta = np.log(m[ok, 1]) - np.log(m[ok, 0])
    X, _, _ = design_matrix(logit_model, preds, fit.cards)
    beta = np.linalg.lstsq(X[ok], eta, rcond=None)[0]
    return float(np.max(np.abs(beta - fit.coefficients)))
