import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from catinfo.errors import DomainError, FormulaError, RankDeficiencyError
from catinfo.logit import (
    LogitModel,
    aic_from_loglik,
    aic_neighborhood_search,
    design_matrix,
    fit_logit,
    loglinear_equivalence_check,
    mi_logit_construct,
    parse_logit,
)
from catinfo.table import from_array
from oracles import logit_2x2
from planted import AIC_MODEL, LOGIT_BETA, LOGIT_PREDICTORS, MI_MODEL, logit_probs, sample_table

NAMES = LOGIT_PREDICTORS + ["S"]


@pytest.fixture(scope="module")
def planted_table():
    return sample_table(logit_probs(LOGIT_PREDICTORS), NAMES, 5000, seed=11)


# formulas ------------------------------------------------------------------------


def test_parse_expands_and_closes():
    m = parse_logit("S ~ D*A + H")
    assert m.term_sets == {frozenset("D"), frozenset("A"), frozenset("DA"), frozenset("H")}
    assert parse_logit("S ~ D:A") == m.remove(("H",))
    assert parse_logit("S ~ 1").n_terms == 1
    assert parse_logit(MI_MODEL).n_terms == 9
    assert parse_logit(AIC_MODEL).n_terms == 11


@pytest.mark.parametrize("text,pos", [("S ~ D + + A", 8), ("S ~ D + Q", 8), ("S D", 0), ("S ~ D:D", 4)])
def test_parse_errors(text, pos):
    with pytest.raises(FormulaError) as exc:
        parse_logit(text, NAMES)
    assert exc.value.position == pos


def test_model_editing():
    m = parse_logit("S ~ D*A")
    with pytest.raises(DomainError):
        m.remove(("D",))
    assert m.removable() == [("D", "A")]
    with pytest.raises(DomainError):
        LogitModel("S", [("S", "D")])


def test_design_matrix_dummy_coding():
    X, labels, _ = design_matrix(parse_logit("S ~ X*Y"), ["X", "Y"], {"X": 2, "Y": 3})
    assert labels == ["(intercept)", "X", "Y[1]", "Y[2]", "X[1]:Y[1]", "X[1]:Y[2]"]
    assert X.shape == (6, 6)
    # row for X = 1, Y = 2
    np.testing.assert_array_equal(X[5], [1, 1, 0, 1, 0, 1])


# fitting ---------------------------------------------------------------------------


def test_intercept_only_balanced_kernel():
    t = from_array([[40, 40], [10, 10]], ["X", "S"])
    fit = fit_logit(t, "S ~ 1")
    assert fit.kernel_log_likelihood == pytest.approx(100 * np.log(0.5), rel=1e-12)
    assert fit.coef(()) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(np.int64, (2, 2), elements=st.integers(1, 60)))
def test_two_by_two_closed_form(n):
    t = from_array(n, ["X", "S"])
    fit = fit_logit(t, "S ~ X")
    b0, b1 = logit_2x2(n[0, 0], n[0, 1], n[1, 0], n[1, 1])
    assert fit.coef(()) == pytest.approx(b0, abs=1e-8)
    assert fit.coef("X") == pytest.approx(b1, abs=1e-8)
    assert fit.deviance.value == pytest.approx(0.0, abs=1e-8) and fit.deviance.df == 0


def test_residual_dfs_over_32_patterns(planted_table):
    mi = fit_logit(planted_table, MI_MODEL)
    aic = fit_logit(planted_table, AIC_MODEL)
    assert mi.n_patterns == aic.n_patterns == 32
    assert (mi.deviance.df, aic.deviance.df) == (23, 21)


def test_aic_arithmetic(planted_table):
    assert aic_from_loglik(-49.324, 11) == pytest.approx(120.648, abs=1e-9)
    assert aic_from_loglik(-53.163, 9) == pytest.approx(124.327, abs=1e-3 + 1e-9)
    fit = fit_logit(planted_table, MI_MODEL)
    assert fit.aic == pytest.approx(-2 * fit.log_likelihood + 2 * fit.n_params)


def test_score_equations_and_monotone_trace(planted_table):
    fit = fit_logit(planted_table, AIC_MODEL)
    assert fit.converged
    X, _, _ = design_matrix(fit.model, fit.predictors, fit.cards)
    counts = np.transpose(planted_table.counts, planted_table.axes(NAMES)).reshape(-1, 2)
    n, y = counts.sum(axis=1), counts[:, 1]
    score = X.T @ (y - n * fit.probabilities())
    assert np.max(np.abs(score)) < 1e-6
    assert all(b >= a - 1e-9 for a, b in zip(fit.loglik_trace, fit.loglik_trace[1:]))


def test_recovers_planted_coefficients():
    p = logit_probs(LOGIT_PREDICTORS)
    t = from_array(p * 1e7, NAMES, observed=False)
    fit = fit_logit(t, MI_MODEL)
    for term, b in LOGIT_BETA.items():
        assert fit.coef(term) == pytest.approx(b, abs=1e-6)


def test_rank_deficiency_names_terms():
    n = np.zeros((2, 2, 2))
    n[0, 0] = [20, 5]
    n[1, 1] = [7, 12]
    t = from_array(n, ["D", "A", "S"])
    with pytest.raises(RankDeficiencyError) as exc:
        fit_logit(t, "S ~ D + A")
    assert tuple(exc.value.collinear) == ("A",)


def test_separation_flagged():
    t = from_array([[30, 0], [0, 25]], ["X", "S"])
    fit = fit_logit(t, "S ~ X")
    assert fit.separated and not fit.converged
    assert "separation" in fit.text()


def test_predictor_checks():
    t = from_array(np.ones((2, 2, 2)), ["X", "Y", "S"])
    with pytest.raises(DomainError):
        fit_logit(t, "S ~ X + Y", predictors=["X"])


@settings(max_examples=30, deadline=None)
@given(arrays(np.int64, (2, 2, 2, 2), elements=st.integers(1, 40)), st.sampled_from(
    ["S ~ X + Y + Z", "S ~ X*Y + Z", "S ~ X*Y + Y*Z", "S ~ X"]))
def test_loglinear_equivalence(n, formula):
    t = from_array(n, ["X", "Y", "Z", "S"])
    assert loglinear_equivalence_check(t, formula) < 1e-5


# construction and search --------------------------------------------------------------


def test_construct_main_effects_only():
    beta = {(): -1.0, ("D",): 1.2, ("A",): 0.9, ("H",): 1.1}
    p = logit_probs(["D", "A", "H"], beta)
    t = sample_table(p, ["D", "A", "H", "S"], 6000, seed=3)
    res = mi_logit_construct(t, "S")
    assert res.model.term_sets == {frozenset("D"), frozenset("A"), frozenset("H")}
    assert res.dropped == [] and "MI logit model" in res.text()


def test_construct_drops_noise_predictor():
    beta = {(): -1.0, ("D",): 1.2, ("A",): 0.9}
    p = logit_probs(["G", "D", "A"], beta)
    t = sample_table(p, ["G", "D", "A", "S"], 6000, seed=4)
    res = mi_logit_construct(t, "S")
    assert "G" in res.dropped and res.survivors == ["D", "A"]


def test_construct_target_must_be_binary():
    t = from_array(np.ones((2, 3)), ["X", "S"])
    with pytest.raises(DomainError):
        mi_logit_construct(t, "S")


def test_aic_search_adds_interaction():
    beta = dict(LOGIT_BETA)
    beta[("M", "A")] = 1.2
    t = sample_table(logit_probs(LOGIT_PREDICTORS, beta), NAMES, 20000, seed=5)
    steps = []
    fit = aic_neighborhood_search(t, MI_MODEL, ["M:A", "M:D"], trace=steps)
    assert fit.model.contains(("M", "A"))
    assert steps[0].move == "start" and any(s.move == "add" and s.term == ("M", "A") for s in steps)
    assert fit.aic <= steps[0].aic


def test_aic_search_parallel_matches_serial(planted_table):
    a = aic_neighborhood_search(planted_table, MI_MODEL, ["M:A", "M:D", "C:H"])
    b = aic_neighborhood_search(planted_table, MI_MODEL, ["M:A", "M:D", "C:H"], workers=4)
    assert a.model == b.model and a.aic == b.aic


def test_aic_search_rejects_bad_candidates(planted_table):
    with pytest.raises(DomainError):
        aic_neighborhood_search(planted_table, "S ~ D + A", ["D:A:H"])
    with pytest.raises(DomainError):
        aic_neighborhood_search(planted_table, "S ~ D + A", ["D:M"])


def test_construct_independent_target_intercept_only():
    p = logit_probs(["D", "A", "H"], {(): -0.5})
    t = from_array(p * 4000, ["D", "A", "H", "S"], observed=False)
    assert mi_logit_construct(t, "S").model == LogitModel("S")


def test_aic_search_keeps_optimal_base():
    t = from_array(logit_probs(LOGIT_PREDICTORS) * 5000, NAMES, observed=False)
    base = fit_logit(t, MI_MODEL)
    fit = aic_neighborhood_search(t, MI_MODEL, ["M:A", "M:D", "M:H"])
    assert fit.model == base.model and fit.aic == base.aic


def test_equivalence_intercept_only_and_single_predictor():
    t = from_array(np.random.default_rng(8).integers(1, 30, (2, 2, 2)), ["X", "Y", "S"])
    assert loglinear_equivalence_check(t, "S ~ 1") < 1e-8
    n = np.array([[12, 7], [5, 16]])
    t2 = from_array(n, ["X", "S"])
    assert loglinear_equivalence_check(t2, "S ~ X") < 1e-8
    assert fit_logit(t2, "S ~ X").coef("X") == pytest.approx(np.log(12 * 16 / (7 * 5)), abs=1e-8)


@pytest.mark.slow
def test_construct_main_effects_only_rate():
    beta = {(): -1.0, ("D",): 1.2, ("A",): 0.9, ("H",): 1.1, ("M",): 0.5, ("C",): 0.7}
    probs = logit_probs(LOGIT_PREDICTORS, beta)
    hits = 0
    for seed in range(50):
        model = mi_logit_construct(sample_table(probs, NAMES, 5000, seed), "S").model
        hits += model.term_sets == {frozenset(v) for v in LOGIT_PREDICTORS}
    assert hits >= 40, f"main-effects-only model in {hits}/50 seeds"
