"""Command-line interface.

Exit codes: 0 success, 1 lack-of-fit warnings only, 2 input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys

from . import __version__
from .errors import CatInfoError, RankDeficiencyError
from .info import GroupPartition, chain_decompose, mutual_information
from .io import read_table
from .logit import aic_neighborhood_search, fit_logit, mi_logit_construct, parse_logit
from .loglinear import ipf_fit, parse_formula
from .selection import backward_select, candidates_text, peel_decompose, terms_to_candidates
from .simulation import DEFAULT_SEED, load_config, run_acceptance_study

EXIT_OK, EXIT_LACK_OF_FIT, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


def _split(text):
    return [s.strip() for s in text.split(",") if s.strip()] if text else []


def _common(p):
    p.add_argument("--input", required=True, help="CSV file (cell counts or records)")
    p.add_argument("--kind", choices=("cells", "records"), default="cells", help="input layout (default: cells)")
    p.add_argument("--schema", help="JSON schema with levels and optional binning rules")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")
    p.add_argument("--alpha-int", type=float, default=None, help="level for interaction tests (default: --alpha)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catinfo", description="Mutual-information analysis of contingency tables.")
    parser.add_argument("--version", action="version", version=f"catinfo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="table shape, total and pairwise MI")
    _common(p)

    p = sub.add_parser("decompose", help="chain decomposition of I(target; predictors)")
    _common(p)
    p.add_argument("--target", required=True)
    p.add_argument("--predictors", help="comma-separated predictors (default: all others)")
    p.add_argument("--order", help="explicit peel order, comma-separated (default: greedy)")

    p = sub.add_parser("loglinear", help="log-linear models")
    lsub = p.add_subparsers(dest="action", required=True)
    q = lsub.add_parser("fit", help="IPF fit of a formula such as ACS,ADG,GM")
    _common(q)
    q.add_argument("formula")
    q = lsub.add_parser("select", help="backward CMI-deletion selection and candidate models")
    _common(q)
    q.add_argument("--alpha-fit", type=float, default=0.05)

    p = sub.add_parser("logit", help="logit models")
    gsub = p.add_subparsers(dest="action", required=True)
    q = gsub.add_parser("fit", help="fit a model such as 'S ~ D + A + D:A'")
    _common(q)
    q.add_argument("model")
    q.add_argument("--predictors", help="variables defining covariate patterns (default: all but the target)")
    q = gsub.add_parser("select", help="construct the MI logit model")
    _common(q)
    q.add_argument("--target", required=True)
    q.add_argument("--predictors")
    q = gsub.add_parser("aic-search", help="minimum-AIC neighbourhood search around a base model")
    _common(q)
    q.add_argument("model")
    q.add_argument("--candidates", required=True, help="comma-separated two-way terms, e.g. M:A,M:D,M:H")
    q.add_argument("--predictors")
    q.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("simulate", help="goodness-of-fit acceptance study")
    _common(p)
    p.add_argument("config", help="study config JSON")
    p.add_argument("--workers", type=int, default=None, help="override the config's worker count")
    return parser


def _provenance(args) -> dict:
    skip = {"format"}
    return {"version": __version__, "config": {k: v for k, v in sorted(vars(args).items()) if k not in skip}}


def cmd_describe(args, table):
    stats = [((a, b), mutual_information(table, GroupPartition(((a,), (b,)))))
             for a, b in itertools.combinations(table.names, 2)]
    rows = [{"pair": list(pair), **s.to_dict(), "significant": s.significant(args.alpha)} for pair, s in stats]
    data = {
        "variables": [{"name": v.name, "levels": [str(x) for x in v.levels]} for v in table.variables],
        "shape": list(table.shape),
        "cells": table.n_cells,
        "total": table.total,
        "pairwise_mi": rows,
    }
    lines = [f"variables: {', '.join(f'{v.name}({v.cardinality})' for v in table.variables)}",
             f"cells: {table.n_cells}  total: {table.total:g}", "pairwise MI (2N scale):"]
    for (a, b), s in stats:
        lines.append(f"  I({a}; {b}){'' if s.significant(args.alpha) else '*'} = {s}")
    return data, "\n".join(lines), EXIT_OK


def cmd_decompose(args, table):
    target = args.target
    table.axis(target)
    preds = _split(args.predictors) or [n for n in table.names if n != target]
    if args.order:
        order = _split(args.order)
        if set(order) != set(preds):
            raise CatInfoError("--order must list exactly the predictors")
        rep = chain_decompose(table, target, order, args.alpha)
    else:
        rep = peel_decompose(table, target, preds, args.alpha)
    return rep.to_dict(), rep.text(), EXIT_OK


def _fit_status(converged, p, alpha):
    if not converged:
        return EXIT_NUMERICAL
    return EXIT_LACK_OF_FIT if p < alpha else EXIT_OK


def cmd_loglinear(args, table):
    if args.action == "fit":
        formula = parse_formula(args.formula, table.names).ordered(table.names)
        fit = ipf_fit(table, formula)
        d = fit.deviance
        text = (f"model {{{formula.text()}}}\n  deviance {d}\n  parameters {fit.n_params}; AIC {fit.aic:.3f}\n"
                f"  IPF cycles {fit.iterations}; converged {fit.converged}")
        if d.p_value < args.alpha:
            text += "\n  WARNING: lack of fit"
        return fit.to_dict(), text, _fit_status(fit.converged, d.p_value, args.alpha)
    model = backward_select(table, args.alpha, args.alpha_int)
    cands = terms_to_candidates(model, table, args.alpha_fit)
    data = {"selection": model.to_dict(), "candidates": [c.to_dict() for c in cands]}
    text = model.text() + "\n\nCandidate models:\n" + candidates_text(cands)
    status = EXIT_OK if any(c.acceptable for c in cands) else EXIT_LACK_OF_FIT
    if not any(c.acceptable for c in cands):
        text += "\nWARNING: no acceptable candidate"
    return data, text, status


def _logit_status(fit, alpha):
    if fit.separated or not fit.converged:
        return EXIT_NUMERICAL
    return EXIT_LACK_OF_FIT if fit.deviance.p_value < alpha else EXIT_OK


def cmd_logit(args, table):
    preds = _split(getattr(args, "predictors", None)) or None
    if args.action == "fit":
        fit = fit_logit(table, parse_logit(args.model, table.names), preds)
        return fit.to_dict(), fit.text(), _logit_status(fit, args.alpha)
    if args.action == "select":
        res = mi_logit_construct(table, args.target, args.alpha, args.alpha_int, preds)
        fit = fit_logit(table, res.model, res.survivors or None)
        data = {"construction": res.to_dict(), "fit": fit.to_dict()}
        return data, res.text() + "\n\n" + fit.text(), _logit_status(fit, args.alpha)
    base = parse_logit(args.model, table.names)
    trace = []
    fit0 = fit_logit(table, base, preds)
    fit = aic_neighborhood_search(table, base, _split(args.candidates), preds, args.workers, trace=trace)
    steps = [{"move": s.move, "term": ":".join(s.term), "aic": s.aic} for s in trace]
    lines = [f"base: {base.text()}  AIC {fit0.aic:.3f}"]
    lines += [f"  {s.move} {':'.join(s.term)} -> AIC {s.aic:.3f}" for s in trace if s.move in ("add", "remove")]
    lines.append(fit.text())
    data = {"base": fit0.to_dict(), "steps": steps, "fit": fit.to_dict()}
    return data, "\n".join(lines), _logit_status(fit, args.alpha)


def cmd_simulate(args, table):
    config = load_config(args.config, table.names)
    config.master_seed = args.seed if args.seed != DEFAULT_SEED else config.master_seed
    if args.workers is not None:
        config.workers = args.workers
    report = run_acceptance_study(config, table)
    return report.to_dict(), report.text(), EXIT_OK


COMMANDS = {
    "describe": cmd_describe,
    "decompose": cmd_decompose,
    "loglinear": cmd_loglinear,
    "logit": cmd_logit,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    label = args.command + (f" {args.action}" if getattr(args, "action", None) else "")
    try:
        if args.alpha_int is not None and not 0 < args.alpha_int < 1:
            raise CatInfoError("--alpha-int must lie in (0, 1)")
        if not 0 < args.alpha < 1:
            raise CatInfoError("--alpha must lie in (0, 1)")
        table = read_table(args.input, args.kind, args.schema)
        data, text, status = COMMANDS[args.command](args, table)
    except RankDeficiencyError as exc:
        print(f"catinfo {label}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CatInfoError, ValueError, KeyError) as exc:
        print(f"catinfo {label}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"catinfo {label}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.format == "json":
        out = {"command": label, "provenance": _provenance(args), "result": data, "exit_code": status}
        print(json.dumps(out, indent=2, sort_keys=True, default=str))
    else:
        print(f"# catinfo {__version__} | {label} | input {args.input} | alpha {args.alpha} | seed {args.seed}")
        print(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
