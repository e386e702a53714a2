import numpy as np
import pytest

from baksolve import (FeatureSelectConfig, SelectionExhaustedError,
                      SolveConfig, score_all_columns, select_features,
                      stepwise_baseline)
from helpers import (greedy_oracle, lstsq_residual, orthogonal_columns,
                     randn_fortran, sparse_support_system)


def test_score_picks_the_column_that_explains_the_residual():
    rng = np.random.default_rng(40)
    x = randn_fortran(rng, 30, 6)
    e = x[:, 3].copy()
    best, scores = score_all_columns(x, e)
    assert best == 3
    assert scores[3] == pytest.approx(0.0, abs=1e-10)


def test_scores_on_orthogonal_residual():
    # residual orthogonal to every column: no single update helps, so every
    # score sits at ||e||^2 up to rounding
    rng = np.random.default_rng(41)
    q = orthogonal_columns(rng, 20, 5, scales=np.ones(5))
    e = rng.standard_normal(20)
    e -= q @ (q.T @ e)
    _, scores = score_all_columns(q, e)
    np.testing.assert_allclose(scores, np.dot(e, e), rtol=1e-10)


def test_exact_tie_goes_to_lowest_index():
    rng = np.random.default_rng(56)
    col = rng.standard_normal(25)
    x = np.asfortranarray(np.column_stack([col, col, col]))
    best, scores = score_all_columns(x, rng.standard_normal(25))
    assert scores[0] == scores[1] == scores[2]
    assert best == 0


def test_scores_match_materialized_trial_residuals():
    rng = np.random.default_rng(42)
    x = randn_fortran(rng, 20, 5)
    e = rng.standard_normal(20)
    _, scores = score_all_columns(x, e)
    for j in range(5):
        col = x[:, j]
        da = np.dot(col, e) / np.dot(col, col)
        trial = e - da * col
        assert scores[j] == pytest.approx(float(np.dot(trial, trial)), rel=1e-12)


def test_score_identity_holds_in_single_precision():
    rng = np.random.default_rng(43)
    x = randn_fortran(rng, 400, 30, np.float32)
    e = rng.standard_normal(400).astype(np.float32)
    _, scores = score_all_columns(x, e)
    e2 = float(np.dot(e.astype(np.float64), e.astype(np.float64)))
    for j in range(30):
        col = x[:, j].astype(np.float64)
        da = np.dot(col, e.astype(np.float64)) / np.dot(col, col)
        trial = e.astype(np.float64) - da * col
        assert abs(scores[j] - np.dot(trial, trial)) <= 1e-5 * e2


def test_excluded_and_exhausted():
    rng = np.random.default_rng(44)
    x = randn_fortran(rng, 30, 4)
    e = x[:, 1].copy()
    best, _ = score_all_columns(x, e, excluded=[1])
    assert best != 1
    x[:, 2] = 0.0
    _, scores = score_all_columns(x, e)
    assert scores[2] == np.inf
    with pytest.raises(SelectionExhaustedError):
        score_all_columns(x, e, excluded=[0, 1, 3])
    with pytest.raises(ValueError):
        score_all_columns(x, np.zeros(29))


def test_single_relevant_column():
    rng = np.random.default_rng(45)
    x = randn_fortran(rng, 50, 6)
    y = 4.0 * x[:, 2]
    rep = select_features(x, y, FeatureSelectConfig(max_feat=1))
    assert rep.selected == [2]
    assert rep.residual_norms[0] == pytest.approx(0.0, abs=1e-20)
    np.testing.assert_allclose(rep.final_coeffs, [4.0], atol=1e-12)


def test_support_recovery_and_oracle_agreement():
    for seed in (3000, 3001, 3002):
        rng = np.random.default_rng(seed)
        x, y, support = sparse_support_system(rng, 500, 50, 3)
        rep = select_features(x, y, FeatureSelectConfig(max_feat=3))
        assert sorted(rep.selected) == support
        oracle_sel, oracle_norms = greedy_oracle(x, y, 3)
        assert rep.selected == oracle_sel
        np.testing.assert_allclose(rep.residual_norms, oracle_norms, rtol=1e-8, atol=1e-12)


def test_full_selection_reaches_least_squares_residual():
    rng = np.random.default_rng(46)
    x = randn_fortran(rng, 60, 8)
    y = rng.standard_normal(60)
    rep = select_features(x, y, FeatureSelectConfig(max_feat=8))
    assert sorted(rep.selected) == list(range(8))
    r = lstsq_residual(x, y)
    assert rep.residual_norms[-1] == pytest.approx(float(np.dot(r, r)), rel=1e-6)


def test_stop_tol_ends_early():
    rng = np.random.default_rng(47)
    x, y, support = sparse_support_system(rng, 200, 30, 2)
    rep = select_features(x, y, FeatureSelectConfig(max_feat=10, stop_tol=1e-8))
    assert len(rep.selected) == 2
    assert sorted(rep.selected) == support


def test_iterative_refit_matches_qr_refit():
    rng = np.random.default_rng(48)
    x, y, _ = sparse_support_system(rng, 300, 40, 4)
    qr_rep = select_features(x, y, FeatureSelectConfig(max_feat=4))
    bak_rep = select_features(x, y, FeatureSelectConfig(
        max_feat=4, refit="bak",
        refit_config=SolveConfig(max_iter=4000, tol=1e-10)))
    assert bak_rep.selected == qr_rep.selected
    np.testing.assert_allclose(bak_rep.final_coeffs, qr_rep.final_coeffs, atol=1e-5)


def test_never_reselects_and_skips_zero_columns():
    rng = np.random.default_rng(49)
    x = randn_fortran(rng, 80, 10)
    x[:, 4] = 0.0
    y = rng.standard_normal(80)
    rep = select_features(x, y, FeatureSelectConfig(max_feat=9))
    assert len(set(rep.selected)) == 9
    assert 4 not in rep.selected


def test_residual_norms_never_increase():
    rng = np.random.default_rng(50)
    x = randn_fortran(rng, 100, 15)
    y = rng.standard_normal(100)
    for rep in (select_features(x, y, FeatureSelectConfig(max_feat=15)),
                stepwise_baseline(x, y, 15)):
        rn = rep.residual_norms
        assert all(rn[i + 1] <= rn[i] * (1 + 1e-12) for i in range(len(rn) - 1))


def test_refit_residual_is_orthogonal_to_selection():
    # after each refit, the residual must be orthogonal to the span picked so
    # far; checked by rerunning with prefix max_feat values
    rng = np.random.default_rng(51)
    x = randn_fortran(rng, 120, 12)
    y = rng.standard_normal(120)
    for k in (1, 3, 6):
        rep = select_features(x, y, FeatureSelectConfig(max_feat=k))
        xs = x[:, rep.selected]
        e = y - xs @ rep.final_coeffs
        assert np.max(np.abs(xs.T @ e)) <= 1e-6


def test_stepwise_example_and_agreement_on_orthogonal_columns():
    rng = np.random.default_rng(52)
    x = randn_fortran(rng, 50, 6)
    y = 4.0 * x[:, 2]
    rep = stepwise_baseline(x, y, 1)
    assert rep.selected == [2]
    # with orthogonal columns the greedy score ordering is provably the
    # stepwise ordering, so the two must agree step by step
    q = orthogonal_columns(rng, 64, 8, scales=np.arange(1.0, 9.0))
    y = q @ np.array([0.0, 3.0, 0.0, -2.5, 0.0, 5.0, 0.0, 1.0])
    greedy = select_features(q, y, FeatureSelectConfig(max_feat=4))
    stepwise = stepwise_baseline(q, y, 4)
    assert greedy.selected == stepwise.selected
    np.testing.assert_allclose(greedy.residual_norms, stepwise.residual_norms,
                               rtol=1e-9, atol=1e-12)


def test_config_validation():
    rng = np.random.default_rng(53)
    x = randn_fortran(rng, 10, 3)
    with pytest.raises(ValueError):
        FeatureSelectConfig(max_feat=0)
    with pytest.raises(ValueError):
        FeatureSelectConfig(max_feat=1, refit="ridge")
    with pytest.raises(ValueError):
        FeatureSelectConfig(max_feat=1, stop_tol=-0.5)
    with pytest.raises(ValueError):
        select_features(x, np.ones(10), FeatureSelectConfig(max_feat=4))
    with pytest.raises(ValueError):
        select_features(x, np.ones(9), FeatureSelectConfig(max_feat=1))
    with pytest.raises(ValueError):
        stepwise_baseline(x, np.ones(10), 0)
