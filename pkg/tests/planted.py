"""Planted distributions used by the recovery and simulation checks.

The log-linear coefficients were drawn once (main effects uniform on
[-0.5, 0.5], higher-order effects of magnitude uniform on [0.5, 1.0] with
random sign, rounded to two decimals) and are frozen here.  The logit
fixture is a fixed coefficient vector with two-way interactions among
D, A and H; the predictor distribution is an arbitrary fixed choice with
independent predictors.
"""

import itertools

import numpy as np
from scipy import special

from catinfo.loglinear import parse_formula
from catinfo.table import from_array

LL_NAMES = list("CMGSDHA")
LL_GENERATORS = "ACS,ADG,AHS,DHS,GM,MS"
LL_COEFS = {
    "A": 0.18, "C": -0.29, "D": -0.19, "G": 0.3, "H": 0.5, "M": -0.36, "S": -0.42,
    "AC": -0.68, "AD": -0.58, "AG": -0.81, "AH": 0.55, "AS": -0.5, "CS": 0.73, "DG": -0.9,
    "DH": 0.8, "DS": -0.6, "GM": -0.72, "HS": 0.94, "MS": -0.61,
    "ACS": -0.9, "ADG": -0.63, "AHS": -0.54, "DHS": -0.73,
}


def loglinear_probs(names, coefs):
    """Cell probabilities of a binary log-linear model, ``log p = sum_s lambda_s prod_{v in s} x_v``."""
    k = len(names)
    grid = np.indices([2] * k).reshape(k, -1)
    x = dict(zip(names, grid))
    logp = np.zeros(grid.shape[1])
    for term, lam in coefs.items():
        col = np.ones(grid.shape[1])
        for v in term:
            col = col * x[v]
        logp += lam * col
    p = np.exp(logp - logp.max())
    return (p / p.sum()).reshape([2] * k)


def planted_ll_probs():
    return loglinear_probs(LL_NAMES, LL_COEFS)


def planted_ll_closure():
    return parse_formula(LL_GENERATORS).closure


def sample_table(probs, names, n, seed):
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, probs.ravel()).reshape(probs.shape)
    return from_array(counts, list(names))


# logit fixture -------------------------------------------------------------

LOGIT_PREDICTORS = ["C", "M", "H", "A", "D"]
PREDICTOR_PROBS = {"G": 0.5, "C": 0.3, "M": 0.35, "H": 0.5, "A": 0.5, "D": 0.25}
LOGIT_BETA = {
    (): -3.584, ("D",): 1.653, ("A",): 1.659, ("D", "A"): -1.003, ("H",): 1.689,
    ("A", "H"): -0.864, ("D", "H"): -0.763, ("M",): 0.495, ("C",): 2.119,
}
LOGIT_TERMS = [("D",), ("A",), ("D", "A"), ("H",), ("A", "H"), ("D", "H"), ("M",), ("C",)]
MI_MODEL = "S ~ D + A + D:A + H + A:H + D:H + M + C"
AIC_MODEL = "S ~ D + A + D:A + H + D:H + A:H + M + M:A + M:D + C"


def logit_probs(predictors, beta=LOGIT_BETA, target="S"):
    """Joint probabilities over ``predictors + [target]``: independent predictors, logit target."""
    k = len(predictors)
    grid = np.indices([2] * k).reshape(k, -1)
    x = dict(zip(predictors, grid))
    px = np.ones(grid.shape[1])
    for v in predictors:
        px *= np.where(x[v] == 1, PREDICTOR_PROBS[v], 1 - PREDICTOR_PROBS[v])
    eta = np.zeros(grid.shape[1])
    for term, b in beta.items():
        col = np.ones(grid.shape[1])
        for v in term:
            col = col * x[v]
        eta += b * col
    p1 = special.expit(eta)
    return np.stack([px * (1 - p1), px * p1], axis=-1).reshape([2] * (k + 1))


def all_subsets(term):
    return [frozenset(s) for r in range(1, len(term) + 1) for s in itertools.combinations(term, r)]
