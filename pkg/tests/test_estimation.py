import math

import mpmath
import numpy as np
import pytest

from ordinalsim.datagen import generate_dataset, replication_rng
from ordinalsim.estimation import (
    FitOptions,
    FitStatus,
    fit_linear,
    fit_model,
    fit_ordinal,
    initial_vector,
    wald_test,
)
from ordinalsim.models import Dataset, ModelParams, category_probs_matrix, score
from ordinalsim.scenarios import ScenarioSpec

import oracles


def _normal_p(z):
    return float(2 * mpmath.ncdf(-abs(mpmath.mpf(z))))


# ---------------------------------------------------------------- Wald tests

def test_wald_zero_estimate():
    t = wald_test(0.0, 1.0)
    assert t.statistic == 0.0 and t.p_value == 1.0 and not t.rejected


def test_wald_near_boundary():
    t = wald_test(1.96, 1.0)
    assert t.p_value == pytest.approx(_normal_p(1.96), rel=1e-12)
    assert t.p_value == pytest.approx(0.05, abs=1e-4)
    # the verdict follows p < alpha exactly; 1.96 sits just inside the rejection region
    assert t.rejected == (t.p_value < 0.05)
    assert not wald_test(1.959, 1.0).rejected


def test_wald_rejects_large_statistic():
    t = wald_test(3.0, 1.0)
    assert t.rejected
    assert t.p_value == pytest.approx(_normal_p(3.0), rel=1e-12)


@pytest.mark.parametrize("z", [-4.2, -0.3, 0.7, 2.5, 6.0])
def test_wald_p_value_matches_high_precision(z):
    assert wald_test(z * 0.5, 0.5).p_value == pytest.approx(_normal_p(z), rel=1e-10)


def test_wald_t_reference():
    t = wald_test(2.0, 1.0, df=10)
    # two-sided t tail through the regularised incomplete beta function
    ref = float(mpmath.betainc(5, 0.5, 0, 10 / (10 + 4), regularized=True))
    assert t.p_value == pytest.approx(ref, rel=1e-10)


def test_wald_validation():
    with pytest.raises(ValueError):
        wald_test(1.0, 0.0)
    with pytest.raises(ValueError):
        wald_test(1.0, 1.0, alpha=1.0)


# ---------------------------------------------------------------- ordinal fits

def test_binary_fit_matches_logistic_oracle():
    rng = np.random.default_rng(10)
    for _ in range(5):
        X = rng.normal(size=(200, 3))
        t = (rng.random(200) < 1 / (1 + np.exp(-(0.2 + X @ [0.8, -0.5, 0.0])))).astype(float)
        # category 1 is "Y <= 1", i.e. the event t == 1
        fit = fit_ordinal("PO", Dataset(np.where(t == 1, 1, 2), X, 2))
        assert fit.converged
        np.testing.assert_allclose(fit.estimates, oracles.logistic_irls(X, t), atol=1e-6)


def test_large_sample_recovers_location():
    s = ScenarioSpec(0, "PO", 100000, 2, 1, 3, 1.0)
    data, _ = generate_dataset(replication_rng(1, 0, 0), s)
    fit = fit_ordinal("PO", data)
    assert fit.converged
    np.testing.assert_allclose(fit.params.location, [1.0, 0.0], atol=0.05)


def test_null_fit_recovers_thresholds():
    s = ScenarioSpec(0, "PO", 10000, 2, 0, 5, 0.0)
    data, _ = generate_dataset(replication_rng(2, 0, 0), s)
    fit = fit_ordinal("PO", data)
    np.testing.assert_allclose(fit.params.thresholds, np.log([0.25, 2 / 3, 1.5, 4.0]), atol=0.1)


@pytest.mark.parametrize("kind", ["PO", "CSO", "LSH", "LSC"])
def test_gradient_vanishes_at_estimate(kind):
    s = ScenarioSpec(0, "PO", 400, 3, 1, 5, 0.5)
    data, _ = generate_dataset(replication_rng(3, 0, 0), s)
    fit = fit_ordinal(kind, data)
    assert fit.converged
    g = score(fit.params, data)
    assert np.max(np.abs(g)) < 1e-6
    assert fit.std_errors.shape == fit.estimates.shape
    assert np.all(fit.std_errors > 0)
    np.testing.assert_allclose(fit.std_errors, np.sqrt(np.diag(fit.covariance)))


def test_initial_vector_uses_empirical_logits():
    data = Dataset([1, 1, 2, 2, 2, 3, 3, 3], np.zeros((8, 1)) + np.arange(8)[:, None], 3)
    v = initial_vector("LSH", data)
    np.testing.assert_allclose(v[:2], [math.log(2 / 6), math.log(5 / 3)])
    np.testing.assert_array_equal(v[2:], 0.0)


def test_collinear_covariates_are_singular():
    rng = np.random.default_rng(0)
    x = rng.normal(size=100)
    data = Dataset(rng.integers(1, 4, 100), np.column_stack([x, x]), 3)
    fit = fit_ordinal("PO", data)
    assert fit.status is FitStatus.SINGULAR_INFORMATION
    assert fit.std_errors is None and fit.tests() == []


def test_iteration_cap_reported():
    s = ScenarioSpec(0, "PO", 300, 2, 1, 3, 1.0)
    data, _ = generate_dataset(replication_rng(4, 0, 0), s)
    fit = fit_ordinal("PO", data, FitOptions(max_iterations=1))
    assert fit.status is FitStatus.MAX_ITERATIONS
    assert fit.params is not None


def test_monotone_check_modes():
    s = ScenarioSpec(0, "CSO", 250, 5, 1, 7, 1.0)
    crossed = None
    for rep in range(40):
        data, _ = generate_dataset(replication_rng(5, 0, rep), s)
        loose = fit_ordinal("CSO", data, FitOptions(monotone_check="none"))
        if loose.converged and loose.n_crossed > 0:
            crossed = data
            break
    assert crossed is not None
    strict = fit_ordinal("CSO", crossed, FitOptions(monotone_check="observations"))
    assert strict.status is FitStatus.NON_MONOTONE_FIT
    _, valid = category_probs_matrix(strict.params, crossed.covariates)
    assert (~valid).sum() == loose.n_crossed
    with pytest.raises(ValueError):
        FitOptions(monotone_check="sometimes")


def test_fit_options_validation():
    with pytest.raises(ValueError):
        FitOptions(gradient_tolerance=0)


def test_lsc_fit_lands_near_truth():
    rng = np.random.default_rng(6)
    params = ModelParams("LSC", [-0.5, 0.6], location=[0.4, 0.0], dispersion=[0.3, 0.0])
    X = rng.normal(0, 0.5, (600, 2))
    probs, _ = category_probs_matrix(params, X)
    u = rng.random(600)
    y = 1 + (u[:, None] > np.cumsum(probs, axis=1)[:, :-1]).sum(axis=1)
    data = Dataset(y, X, 3)
    fit = fit_ordinal("LSC", data)
    assert fit.converged
    assert np.max(np.abs(fit.estimates - params.pack())) < 0.4


# ---------------------------------------------------------------- linear model

def test_linear_exact_interpolation():
    fit = fit_linear(Dataset([1, 2, 3], [[-1.0], [0.0], [1.0]], 3))
    assert fit.params.intercept == pytest.approx(2.0)
    assert fit.params.slopes[0] == pytest.approx(1.0)
    # residuals are zero, so no test is possible
    assert fit.status is FitStatus.SINGULAR_INFORMATION


def test_linear_constant_outcome():
    rng = np.random.default_rng(1)
    fit = fit_linear(Dataset(np.full(20, 2), rng.normal(size=(20, 3)), 3))
    np.testing.assert_allclose(fit.params.slopes, 0.0, atol=1e-12)
    assert fit.params.intercept == pytest.approx(2.0)


def test_linear_matches_normal_equations():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(80, 4))
    y = rng.integers(1, 6, 80)
    fit = fit_model("LM", Dataset(y, X, 5))
    assert fit.converged
    np.testing.assert_allclose(fit.params.pack(), oracles.normal_equations(X, y.astype(float)),
                               rtol=0, atol=1e-10)
    resid = y - np.column_stack([np.ones(80), X]) @ fit.params.pack()
    assert fit.params.sigma2 == pytest.approx(resid @ resid / 75)
    assert fit.df == 75
    assert fit.tests()[1].p_value == pytest.approx(
        wald_test(fit.estimates[1], fit.std_errors[1], df=75).p_value)


def test_linear_needs_more_rows_than_parameters():
    with pytest.raises(ValueError):
        fit_linear(Dataset([1, 2, 3], np.eye(3)[:, :2], 3))
