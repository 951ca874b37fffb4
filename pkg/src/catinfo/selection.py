"""Backward construction of hierarchical log-linear models from CMI chains.

Variables are peeled off one at a time, most dispensable first.  For each
peeled variable the chain of conditional mutual information terms against
the still-active variables is computed greedily (highest-order term first);
insignificant terms are deleted and significant ones are retained together
with their interaction / partial-association split.  Retained terms map to
generators of candidate log-linear models which are then fitted and ranked.

Tie-breaks everywhere fall back to variable declaration order, so results
are deterministic for a given table and configuration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DomainError
from .info import (
    CMITerm,
    DecompositionReport,
    GroupPartition,
    InfoStat,
    format_set,
    make_term,
    mutual_information,
)
from .loglinear import LoglinearFit, ModelFormula, ipf_fit, resolve_interaction, two_step_test
from .table import ContingencyTable

__all__ = [
    "peel_decompose",
    "rank_dispensability",
    "backward_select",
    "terms_to_candidates",
    "InformationModel",
    "CandidateModel",
    "annotate_term",
]


def _standardized(stat: InfoStat) -> float:
    if stat.df == 0:
        return 0.0
    return (stat.value - stat.df) / math.sqrt(2.0 * stat.df)


def peel_decompose(table: ContingencyTable, focus: str, others: Sequence[str], alpha: float = 0.05) -> DecompositionReport:
    """Greedy chain decomposition of ``I(focus; others)``.

    At each step every remaining variable ``u`` is scored by
    ``I(focus; u | remaining - u)`` and the one with the largest p-value is
    peeled (ties: smaller standardized statistic, then the order of
    ``others``).  Terms with ``p > alpha`` are flagged.
    """
    others = list(dict.fromkeys(others))
    if focus in others:
        raise DomainError(f"focus {focus!r} must not be among the conditioners")
    if not others:
        raise DomainError("peel_decompose needs at least one other variable")
    remaining = others[:]
    terms = []
    while remaining:
        cands = [make_term(table, focus, u, [w for w in remaining if w != u], alpha) for u in remaining]
        best = max(range(len(cands)), key=lambda i: (cands[i].stat.p_value, -_standardized(cands[i].stat), -i))
        terms.append(cands[best])
        remaining.pop(best)
    total = mutual_information(table, GroupPartition(((focus,), tuple(table.ordered(others)))))
    title = f"I({format_set(table.ordered(others))}; {focus})"
    return DecompositionReport(terms, total, title)


def _dispensability_score(report: DecompositionReport) -> tuple[int, float]:
    lead = 0
    for t in report.terms:
        if not t.flagged:
            return lead, t.stat.p_value
        lead += 1
    return lead, 1.0


def rank_dispensability(table: ContingencyTable, active: Sequence[str], alpha: float = 0.05) -> list[tuple[str, tuple, DecompositionReport]]:
    """Order ``active`` variables from most to least dispensable.

    The score of ``v`` is ``(number of leading insignificant terms, p-value of
    the first significant term)`` from ``peel_decompose(v, active - v)``,
    compared lexicographically; ties keep declaration order.
    """
    active = list(table.ordered(active))
    if len(active) < 3:
        raise DomainError("ranking needs at least three active variables")
    rows = []
    for v in active:
        rep = peel_decompose(table, v, [w for w in active if w != v], alpha)
        rows.append((v, _dispensability_score(rep), rep))
    # stable sort keeps declaration order among ties
    return sorted(rows, key=lambda r: (-r[1][0], -r[1][1]))


def annotate_term(table: ContingencyTable, term: CMITerm, alpha: float, alpha_int: float) -> CMITerm:
    """Attach the two-step split and, when interaction is significant, its resolved modifiers."""
    if not term.conditioner:
        return term
    (v,), (u,) = term.lhs, term.rhs
    term.split = two_step_test(table, v, u, term.conditioner, alpha_int, alpha)
    if term.split.interaction_significant:
        term.modifiers = resolve_interaction(table, v, u, term.conditioner, alpha_int)
    return term


@dataclass
class PeelStep:
    variable: str
    report: DecompositionReport
    ranking: list = field(default_factory=list)


@dataclass
class InformationModel:
    """Outcome of the backward CMI-deletion scheme."""

    retained: list
    deleted: list
    peel_order: list
    steps: list
    total: InfoStat
    stop_index: int | None
    alpha: float
    alpha_int: float

    def accounted(self) -> float:
        return float(sum(t.stat.value for t in self.retained + self.deleted))

    def accounted_df(self) -> int:
        return sum(t.stat.df for t in self.retained + self.deleted)

    def generators(self, resolved: bool = True) -> list[tuple[str, ...]]:
        """Generators implied by the retained terms.

        With ``resolved`` the lowest-order modifier structure of each
        significant interaction is used; otherwise the whole conditioner
        joins the generator.
        """
        gens = []
        for t in self.retained:
            v, u = t.lhs + t.rhs
            if t.split is not None and t.split.interaction_significant:
                if resolved:
                    gens.extend((v, u) + m for m in t.modifiers)
                else:
                    gens.append((v, u) + t.conditioner)
            else:
                gens.append((v, u))
        return gens

    def identity_text(self) -> str:
        return " + ".join(t.label for t in self.retained) or "(nothing retained)"

    def to_dict(self) -> dict:
        return {
            "peel_order": list(self.peel_order),
            "stop_index": self.stop_index,
            "total": self.total.to_dict(),
            "retained": [t.to_dict() for t in self.retained],
            "deleted": [t.to_dict() for t in self.deleted],
            "steps": [{"variable": s.variable, "decomposition": s.report.to_dict()} for s in self.steps],
        }

    def text(self) -> str:
        lines = [f"Total multi-information: {self.total}"]
        for i, s in enumerate(self.steps, 1):
            marker = "  (all components significant)" if self.stop_index is not None and i - 1 == self.stop_index else ""
            lines.append(f"Step {i}: peel {s.variable}{marker}")
            lines.append(s.report.text())
            for t in s.report.terms:
                if t.split is not None and not t.flagged:
                    sp = t.split
                    lines.append(f"    Int = {sp.interaction}; Par = {sp.partial}")
        lines.append("Retained identity: " + self.identity_text())
        return "\n".join(lines)


def backward_select(table: ContingencyTable, alpha: float = 0.05, alpha_int: float | None = None) -> InformationModel:
    """Peel variables most-dispensable first until one remains.

    Each peeled variable contributes the chain ``I(v; active - v)``; its
    insignificant terms are deleted and the rest retained with their
    two-step annotation.  ``stop_index`` marks the first step whose chain has
    no insignificant term, the point where the scheme's deletions end; later
    steps are still recorded so that retained plus deleted terms account for
    the whole multi-information.
    """
    alpha_int = alpha if alpha_int is None else alpha_int
    names = list(table.names)
    if len(names) < 3:
        raise DomainError("backward selection needs at least three variables")
    active = names[:]
    retained, deleted, steps, order = [], [], [], []
    stop_index = None
    while len(active) >= 2:
        if len(active) >= 3:
            ranking = rank_dispensability(table, active, alpha)
            v, _, report = ranking[0]
        else:
            ranking = []
            v = active[0]
            report = peel_decompose(table, v, active[1:], alpha)
        for t in report.terms:
            if t.flagged:
                deleted.append(t)
            else:
                retained.append(annotate_term(table, t, alpha, alpha_int))
        if stop_index is None and not any(t.flagged for t in report.terms):
            stop_index = len(steps)
        steps.append(PeelStep(v, report, [(r[0], r[1]) for r in ranking]))
        order.append(v)
        active.remove(v)
    order.extend(active)
    total = mutual_information(table, GroupPartition(tuple((n,) for n in names)))
    return InformationModel(retained, deleted, order, steps, total, stop_index, alpha, alpha_int)


@dataclass
class CandidateModel:
    formula: ModelFormula
    fit: LoglinearFit | None
    aic: float
    acceptable: bool
    origin: str
    diagnostic: str = ""

    def to_dict(self) -> dict:
        d = {"formula": self.formula.text(), "origin": self.origin, "acceptable": self.acceptable, "aic": self.aic}
        if self.fit is not None:
            d.update(deviance=self.fit.deviance.value, df=self.fit.deviance.df, p=self.fit.deviance.p_value,
                     n_params=self.fit.n_params, converged=self.fit.converged)
        if self.diagnostic:
            d["diagnostic"] = self.diagnostic
        return d


def _with_main_effects(gens, names) -> ModelFormula:
    covered = {v for g in gens for v in g}
    return ModelFormula(tuple(gens) + tuple((n,) for n in names if n not in covered))


def _replacements(formula: ModelFormula, names) -> list[tuple[tuple, str, ModelFormula]]:
    """Single-generator replacements of ``formula``.

    A generator of three or more variables may be replaced by its two-way
    margins; one of four or more also by its faces of one lower order; a
    two-way generator by its main effects.
    """
    out = []
    for g in formula.generators:
        k = len(g)
        if k < 2:
            continue
        options = []
        if k >= 3:
            options.append(("margins", list(itertools.combinations(g, 2))))
        if k >= 4:
            options.append(("faces", list(itertools.combinations(g, k - 1))))
        if k == 2:
            options.append(("main effects", [(v,) for v in g]))
        rest = [h for h in formula.generators if h != g]
        for kind, parts in options:
            out.append((g, kind, _with_main_effects(rest + parts, names).ordered(names)))
    return out


def _lr_difference(smaller: LoglinearFit, larger: LoglinearFit) -> InfoStat:
    ddf = larger.n_params - smaller.n_params
    dval = max(smaller.deviance.value - larger.deviance.value, 0.0)
    return InfoStat.from_value(dval, max(ddf, 0))


def terms_to_candidates(info_model: InformationModel, table: ContingencyTable, alpha_fit: float = 0.05,
                        max_refinements: int = 40) -> list[CandidateModel]:
    """Map retained terms to log-linear models, refine, fit and rank them.

    Two base models are built: ``resolved`` (each significant interaction
    expressed through its lowest-order modifiers) and ``full`` (the whole
    conditioner joins the generator).  Every single-generator replacement
    of a base model is fitted.  Two refinement paths then start from each
    base: an AIC path that applies the acceptable replacement with the
    lowest AIC while the AIC drops, and a parsimony path that applies the
    acceptable replacement whose likelihood-ratio loss against the current
    model is least significant, while that loss stays insignificant at
    ``alpha_fit``.  The endpoint of each path seeds both paths again until
    no new endpoint appears.  Replacements of every model met on a path
    are fitted as well.  Candidates are sorted acceptable first, then by
    AIC.
    """
    names = table.names
    cache: dict = {}
    origins: dict = {}

    def evaluate(formula, origin):
        origins.setdefault(formula, origin)
        if formula not in cache:
            try:
                fit = ipf_fit(table, formula)
            except (ValueError, FloatingPointError) as exc:
                cache[formula] = CandidateModel(formula, None, float("inf"), False, origin, f"fit failed: {exc}")
            else:
                diag = "" if fit.converged else "IPF did not converge"
                ok = fit.converged and fit.deviance.p_value >= alpha_fit
                cache[formula] = CandidateModel(formula, fit, fit.aic, ok, origin, diag)
        return cache[formula]

    def neighbours(cand):
        label = origins[cand.formula]
        return [evaluate(f, f"{label} / {_gen_text(g)} -> {kind}") for g, kind, f in _replacements(cand.formula, names)]

    def aic_path(current):
        for _ in range(max_refinements):
            better = [c for c in neighbours(current) if c.acceptable and c.aic < current.aic - 1e-9]
            if not better:
                break
            current = min(better, key=lambda c: c.aic)
        return current

    def parsimony_path(current):
        for _ in range(max_refinements):
            if current.fit is None:
                break
            scored = []
            for c in neighbours(current):
                if not c.acceptable:
                    continue
                test = _lr_difference(c.fit, current.fit)
                if test.df > 0 and test.p_value > alpha_fit:
                    scored.append((test.p_value, -c.aic, c))
            if not scored:
                break
            current = max(scored, key=lambda s: (s[0], s[1]))[2]
        return current

    bases = [
        ("resolved", _with_main_effects(info_model.generators(resolved=True), names).ordered(names)),
        ("full", _with_main_effects(info_model.generators(resolved=False), names).ordered(names)),
    ]
    # every path endpoint seeds both paths in turn, until no new endpoint appears
    queue = [evaluate(base, label) for label, base in bases]
    started = set()
    while queue and len(started) < max_refinements:
        start = queue.pop(0)
        if start.formula in started:
            continue
        started.add(start.formula)
        for path in (aic_path, parsimony_path):
            end = path(start)
            if end.formula not in started:
                queue.append(end)

    out = list(cache.values())
    for cand in out:
        cand.origin = origins[cand.formula]
    order = sorted(range(len(out)), key=lambda i: (not out[i].acceptable, out[i].aic, i))
    return [out[i] for i in order]


def _gen_text(g):
    return "".join(g) if all(len(v) == 1 for v in g) else "*".join(g)


def candidates_text(cands: Sequence[CandidateModel]) -> str:
    from .chisq import format_p

    width = max([len(c.formula.text()) for c in cands] + [7])
    lines = [f"{'model':<{width}}  {'deviance':>9}  {'df':>4}  {'p':>8}  {'AIC':>9}  ok  origin"]
    for c in cands:
        if c.fit is None:
            lines.append(f"{c.formula.text():<{width}}  {'-':>9}  {'-':>4}  {'-':>8}  {'-':>9}  no  {c.origin} ({c.diagnostic})")
            continue
        d = c.fit.deviance
        lines.append(
            f"{c.formula.text():<{width}}  {d.value:9.3f}  {d.df:4d}  {format_p(d.p_value):>8}  {c.aic:9.3f}  "
            f"{'yes' if c.acceptable else 'no ':3} {c.origin}"
        )
    return "\n".join(lines)
