"""Goodness-of-fit acceptance study for logit models under resampling designs.

Three designs generate replicate tables of a requested size:

``model_parametric``
    covariate patterns drawn from the empirical predictor distribution of
    the source table, targets drawn from a generating logit fit;
``empirical_multinomial``
    iid draws from the empirical cell distribution;
``subset_without_replacement``
    simple random samples of the source subjects (records are expanded
    from cell counts when only a table is available).

Each tested model is refitted to every replicate and accepted when its
residual deviance p-value is at least ``alpha_fit``.  Replicate ``r`` of
column ``c`` at size ``n`` draws from its own generator seeded by
``(master_seed, c, n, r)``, so results do not depend on scheduling.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateTableError, DomainError, RankDeficiencyError, SchemaError
from .logit import LogitFit, LogitModel, fit_logit, parse_logit
from .table import ContingencyTable

__all__ = [
    "DESIGNS",
    "SimulationConfig",
    "AcceptanceCell",
    "AcceptanceReport",
    "sample_model_parametric",
    "sample_empirical_multinomial",
    "sample_subset",
    "run_acceptance_study",
    "load_config",
]

DESIGNS = ("model_parametric", "empirical_multinomial", "subset_without_replacement")
DEFAULT_SEED = 20240607


@dataclass
class SimulationConfig:
    """Settings of an acceptance study.

    ``models`` pairs a label with each model under test; in the parametric
    design every model also serves, in turn, as the generating model.
    """

    models: list
    designs: tuple = DESIGNS
    replicates: int = 1000
    sample_sizes: tuple = (800, 1000)
    alpha_fit: float = 0.05
    master_seed: int = DEFAULT_SEED
    workers: int = 1
    predictors: tuple | None = None

    def __post_init__(self):
        models = []
        for i, m in enumerate(self.models):
            if isinstance(m, LogitModel):
                models.append((f"model{i + 1}", m))
            else:
                label, model = m
                models.append((str(label), model))
        self.models = models
        self.designs = tuple(self.designs)
        self.sample_sizes = tuple(int(n) for n in self.sample_sizes)
        bad = [d for d in self.designs if d not in DESIGNS]
        if bad:
            raise SchemaError(f"unknown design(s) {bad}; choose from {list(DESIGNS)}")
        if not self.designs or not self.models:
            raise SchemaError("a study needs at least one design and one model")
        if self.replicates < 0:
            raise SchemaError("replicates must be nonnegative")
        if any(n <= 0 for n in self.sample_sizes):
            raise SchemaError("sample sizes must be positive")
        if not 0 < self.alpha_fit < 1:
            raise SchemaError("alpha_fit must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "models": [{"name": lab, "formula": m.text()} for lab, m in self.models],
            "designs": list(self.designs),
            "replicates": self.replicates,
            "sample_sizes": list(self.sample_sizes),
            "alpha": self.alpha_fit,
            "seed": self.master_seed,
            "predictors": None if self.predictors is None else list(self.predictors),
        }


def load_config(path, names: Sequence[str] | None = None) -> SimulationConfig:
    """Read a study config from JSON.

    Keys: ``models`` (list of ``{"name", "formula"}`` or formula strings),
    ``designs``, ``replicates``, ``sample_sizes``, ``alpha``, ``seed``,
    ``workers`` and ``predictors``; all but ``models`` are optional.
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(raw, dict) or "models" not in raw:
        raise SchemaError(f"{path}: config must be an object with a 'models' list")
    known = {"models", "designs", "replicates", "sample_sizes", "alpha", "seed", "workers", "predictors"}
    extra = set(raw) - known
    if extra:
        raise SchemaError(f"{path}: unknown config keys {sorted(extra)}")
    models = []
    for i, m in enumerate(raw["models"]):
        if isinstance(m, str):
            models.append((f"model{i + 1}", parse_logit(m, names)))
        else:
            models.append((m.get("name", f"model{i + 1}"), parse_logit(m["formula"], names)))
    return SimulationConfig(
        models=models,
        designs=tuple(raw.get("designs", DESIGNS)),
        replicates=int(raw.get("replicates", 1000)),
        sample_sizes=tuple(raw.get("sample_sizes", (800, 1000))),
        alpha_fit=float(raw.get("alpha", 0.05)),
        master_seed=int(raw.get("seed", DEFAULT_SEED)),
        workers=int(raw.get("workers", 1)),
        predictors=tuple(raw["predictors"]) if raw.get("predictors") else None,
    )


# ---------------------------------------------------------------------------
# samplers


def _check_n(n):
    if int(n) != n or n <= 0:
        raise DomainError(f"sample size must be a positive integer, got {n}")
    return int(n)


def sample_model_parametric(logit_fit: LogitFit, covariate_source: ContingencyTable, n: int,
                            rng: np.random.Generator) -> ContingencyTable:
    """Patterns from the source's predictor margin, targets from the fitted logit."""
    n = _check_n(n)
    target = logit_fit.model.target
    preds = list(logit_fit.predictors)
    names = preds + [target]
    marg = covariate_source.marginalize(names)
    arr = np.transpose(marg.counts, marg.axes(names)).reshape(-1, 2)
    px = arr.sum(axis=1)
    total = px.sum()
    if total <= 0:
        raise DegenerateTableError("covariate source has zero mass")
    counts = rng.multinomial(n, px / total)
    prob = logit_fit.probabilities()
    ones = rng.binomial(counts, prob)
    cells = np.stack([counts - ones, ones], axis=-1)
    shape = [covariate_source.variable(v).cardinality for v in names]
    cells = cells.reshape(shape)
    order = [v for v in covariate_source.names if v in names]
    cells = np.transpose(cells, [names.index(v) for v in order])
    variables = tuple(covariate_source.variable(v) for v in order)
    return ContingencyTable(variables, cells)


def sample_empirical_multinomial(table: ContingencyTable, n: int, rng: np.random.Generator) -> ContingencyTable:
    """``n`` iid draws from the table's cell proportions."""
    n = _check_n(n)
    p = table.to_pdf().probs.ravel()
    return table.with_counts(rng.multinomial(n, p).reshape(table.shape), observed=True)


def expand_records(table: ContingencyTable) -> np.ndarray:
    """Flat cell index of every subject, in cell order."""
    counts = table.cells
    if not np.all(counts == np.round(counts)):
        raise DomainError("records can only be expanded from integer counts")
    return np.repeat(np.arange(table.n_cells), counts.astype(np.int64))


def sample_subset(records, n: int, rng: np.random.Generator, table: ContingencyTable | None = None) -> ContingencyTable:
    """Simple random sample of ``n`` subjects without replacement.

    ``records`` is either a table of integer counts (expanded to one record
    per subject) or an array of flat cell indices together with ``table``
    giving the layout.
    """
    n = _check_n(n)
    if isinstance(records, ContingencyTable):
        table = records
        records = expand_records(records)
    elif table is None:
        raise DomainError("a layout table is required with raw record indices")
    records = np.asarray(records)
    if n > len(records):
        raise DomainError(f"cannot draw {n} subjects from {len(records)} records")
    pick = rng.choice(len(records), size=n, replace=False)
    counts = np.bincount(records[pick], minlength=table.n_cells)
    return table.with_counts(counts.reshape(table.shape), observed=True)


# ---------------------------------------------------------------------------
# study


@dataclass(frozen=True)
class AcceptanceCell:
    tested: str
    size: int
    column: str
    accepted: int
    replicates: int
    failed: int
    mean_deviance: float

    @property
    def proportion(self) -> float:
        return self.accepted / self.replicates if self.replicates else float("nan")

    def to_dict(self) -> dict:
        return {
            "tested": self.tested,
            "size": self.size,
            "column": self.column,
            "accepted": self.accepted,
            "replicates": self.replicates,
            "proportion": self.proportion,
            "failed": self.failed,
            "mean_deviance": self.mean_deviance,
        }


@dataclass
class AcceptanceReport:
    cells: list
    columns: list
    config: dict = field(default_factory=dict)

    def cell(self, tested: str, size: int, column: str) -> AcceptanceCell:
        for c in self.cells:
            if (c.tested, c.size, c.column) == (tested, size, column):
                return c
        raise KeyError((tested, size, column))

    def to_dict(self) -> dict:
        return {"config": self.config, "columns": list(self.columns), "cells": [c.to_dict() for c in self.cells]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def text(self) -> str:
        if not self.cells:
            return "(no replicates)"
        rows = list(dict.fromkeys((c.tested, c.size) for c in self.cells))
        labels = [f"{t} / {n}" for t, n in rows]
        w = max(len(x) for x in labels + ["tested / size"])
        cw = max(8, *(len(c) for c in self.columns))
        lines = [f"{'tested / size':<{w}}  " + "  ".join(f"{c:>{cw}}" for c in self.columns)]
        for (t, n), lab in zip(rows, labels):
            vals = []
            for col in self.columns:
                try:
                    vals.append(f"{self.cell(t, n, col).proportion:>{cw}.4f}")
                except KeyError:
                    vals.append(f"{'-':>{cw}}")
            lines.append(f"{lab:<{w}}  " + "  ".join(vals))
        failed = sum(c.failed for c in self.cells)
        if failed:
            lines.append(f"({failed} replicate fits failed and were counted as rejections)")
        return "\n".join(lines)


def _columns(config: SimulationConfig) -> list[tuple[str, str, int | None]]:
    cols = []
    for d in config.designs:
        if d == "model_parametric":
            cols.extend((f"true {lab}", d, i) for i, (lab, _) in enumerate(config.models))
        elif d == "empirical_multinomial":
            cols.append(("multinomial", d, None))
        else:
            cols.append(("subsets", d, None))
    return cols


def run_acceptance_study(config: SimulationConfig, data: ContingencyTable,
                         fits: Sequence[LogitFit] | None = None) -> AcceptanceReport:
    """Acceptance proportions for every (tested model, size, design column).

    ``fits`` are the generating fits of the parametric design, one per
    model in ``config.models``; by default each model is fitted to ``data``.
    Replicate fits that fail or do not converge count as rejections.
    """
    columns = _columns(config)
    col_names = [c[0] for c in columns]
    if config.replicates == 0:
        return AcceptanceReport([], col_names, config.to_dict())
    preds = config.predictors
    if fits is None:
        fits = [fit_logit(data, m, preds) for _, m in config.models]
    if len(fits) != len(config.models):
        raise SchemaError("one generating fit per model is required")
    records = expand_records(data) if "subset_without_replacement" in config.designs else None
    if records is not None and max(config.sample_sizes) > len(records):
        raise SchemaError(f"subset design needs sample sizes <= {len(records)} records")
    tested = [m for _, m in config.models]
    n_models = len(tested)

    def replicate(args):
        ci, n, r = args
        _, design, gi = columns[ci]
        rng = np.random.default_rng(np.random.SeedSequence([config.master_seed, ci, n, r]))
        if design == "model_parametric":
            t = sample_model_parametric(fits[gi], data, n, rng)
        elif design == "empirical_multinomial":
            t = sample_empirical_multinomial(data, n, rng)
        else:
            t = sample_subset(records, n, rng, table=data)
        out = []
        for m in tested:
            try:
                f = fit_logit(t, m, preds)
            except (DomainError, RankDeficiencyError, np.linalg.LinAlgError):
                out.append((False, float("nan"), True))
                continue
            ok = f.converged and f.deviance.p_value >= config.alpha_fit
            out.append((ok, f.deviance.value, not f.converged))
        return out

    jobs = [(ci, n, r) for n in config.sample_sizes for ci in range(len(columns)) for r in range(config.replicates)]
    if config.workers and config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(replicate, jobs, chunksize=16))
    else:
        results = [replicate(j) for j in jobs]

    cells = []
    R = config.replicates
    k = 0
    for n in config.sample_sizes:
        for ci in range(len(columns)):
            block = results[k:k + R]
            k += R
            for mi in range(n_models):
                acc = sum(1 for res in block if res[mi][0])
                failed = sum(1 for res in block if res[mi][2])
                devs = [res[mi][1] for res in block if not np.isnan(res[mi][1])]
                mean_dev = float(np.mean(devs)) if devs else float("nan")
                cells.append(AcceptanceCell(config.models[mi][0], n, columns[ci][0], acc, R, failed, mean_dev))
    cells.sort(key=lambda c: (config.sample_sizes.index(c.size), [m[0] for m in config.models].index(c.tested),
                              col_names.index(c.column)))
    return AcceptanceReport(cells, col_names, config.to_dict())
