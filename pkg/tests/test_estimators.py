"""Closed-form estimators: IVW, multivariable IVW, balancing equivalence."""

import numpy as np
import pytest

from pleiomr import (
    Z95,
    NumericalError,
    SummaryDataset,
    ValidationError,
    balance_diagnostic,
    balancing_estimate,
    balancing_weights,
    fit_weighted_regression,
    ivw,
    mv_ivw,
    weights,
)

from conftest import random_dataset


def test_ivw_closed_form(small_dataset):
    d = small_dataset
    w = d.se_y ** -2.0
    expected = float(d.beta_x @ (w * d.beta_y)) / float(d.beta_x @ (w * d.beta_x))
    est = ivw(d)
    assert est.theta_hat == pytest.approx(expected, abs=1e-12)
    assert est.method_tag == "ivw"
    assert est.delta_hat.size == 0


def test_mv_ivw_matches_direct_wls(small_dataset):
    d = small_dataset
    sw = d.se_y ** -1.0
    X = np.column_stack([d.beta_x, d.beta_w]) * sw[:, None]
    y = d.beta_y * sw
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    est = mv_ivw(d)
    assert est.theta_hat == pytest.approx(coef[0], abs=1e-10)
    np.testing.assert_allclose(est.delta_hat, coef[1:], atol=1e-10)


def test_mv_ivw_with_no_covariates_equals_ivw(rng):
    d = random_dataset(rng, p=8, k=0)
    assert mv_ivw(d).theta_hat == pytest.approx(ivw(d).theta_hat, abs=1e-14)


def test_ci_width_and_containment(small_dataset):
    est = mv_ivw(small_dataset)
    assert est.ci_low <= est.theta_hat <= est.ci_high
    assert est.ci_high - est.ci_low == pytest.approx(2 * Z95 * est.se_theta, rel=1e-12)


def test_dispersion_floor():
    # an exact linear relation leaves zero residual: dispersion floors at 1
    p = 10
    beta_x = np.linspace(0.1, 0.5, p)
    d = SummaryDataset(
        variant_ids=[f"v{i}" for i in range(p)],
        beta_x=beta_x,
        beta_w=np.empty((p, 0)),
        beta_y=0.3 * beta_x,
        se_y=np.full(p, 0.01),
        covariate_names=(),
    )
    est = ivw(d)
    assert est.dispersion == 1.0
    assert est.theta_hat == pytest.approx(0.3, abs=1e-12)


def test_dispersion_inflates_se(rng):
    d = random_dataset(rng, p=30, k=0)
    # shrink the reported outcome SEs: residual dispersion must exceed 1
    d_od = SummaryDataset(
        variant_ids=d.variant_ids,
        beta_x=d.beta_x,
        beta_w=d.beta_w,
        beta_y=d.beta_y + rng.normal(0, 0.05, d.p),
        se_y=d.se_y / 10,
        covariate_names=d.covariate_names,
    )
    assert ivw(d_od).dispersion > 1.0


def test_mv_ivw_requires_enough_variants(rng):
    d = random_dataset(rng, p=5, k=4)
    with pytest.raises(ValidationError, match="p >= k \\+ 2"):
        mv_ivw(d)


def test_rank_deficient_design_raises(rng):
    d = random_dataset(rng, p=12, k=2)
    dup = SummaryDataset(
        variant_ids=d.variant_ids,
        beta_x=d.beta_x,
        beta_w=np.column_stack([d.beta_w[:, 0], d.beta_w[:, 0]]),
        beta_y=d.beta_y,
        se_y=d.se_y,
        covariate_names=("A", "B"),
    )
    with pytest.raises(NumericalError):
        mv_ivw(dup)


def test_fit_weighted_regression_rejects_wide_design(rng):
    d = random_dataset(rng, p=4, k=0)
    X = rng.normal(size=(4, 5))
    with pytest.raises(ValidationError):
        fit_weighted_regression(d.beta_y, X, weights(d))


def test_balancing_equivalence(rng):
    for _ in range(25):
        p = int(rng.integers(5, 30))
        k = int(rng.integers(0, min(8, p - 2) + 1))
        d = random_dataset(rng, p=p, k=k)
        assert balancing_estimate(d).theta_hat == pytest.approx(
            mv_ivw(d).theta_hat, abs=1e-10
        )


def test_balancing_weights_balance_every_covariate(rng):
    d = random_dataset(rng, p=20, k=4)
    bw = balancing_weights(d)
    w = d.se_y ** -2.0
    # alpha' S beta_w = 0 for every covariate, alpha' S beta_x = 1
    np.testing.assert_allclose(bw.alpha @ (w[:, None] * d.beta_w), 0.0, atol=1e-10)
    assert float(bw.alpha @ (w * d.beta_x)) == pytest.approx(1.0, abs=1e-10)


def test_balancing_requires_more_variants_than_covariates(rng):
    d = random_dataset(rng, p=4, k=4)
    with pytest.raises(ValidationError):
        balancing_weights(d)


def test_balance_diagnostic_orthogonality(rng):
    d = random_dataset(rng, p=25, k=5)
    diag = balance_diagnostic(d, ["W2", "W4"])
    assert diag.trait_names[0] == "risk_factor"
    by_name = dict(zip(diag.trait_names, diag.correlations))
    assert by_name["W2"] == pytest.approx(0.0, abs=1e-10)
    assert by_name["W4"] == pytest.approx(0.0, abs=1e-10)
    assert np.all(np.abs(diag.correlations) <= 1.0)
    # excluded covariates generally remain correlated with the residuals
    assert abs(by_name["W1"]) > 1e-10


def test_balance_diagnostic_empty_set_uses_raw_outcome(rng):
    d = random_dataset(rng, p=25, k=3)
    diag = balance_diagnostic(d, [])
    v = d.beta_y / d.se_y
    c = d.beta_x / d.se_y
    expected = float(c @ v) / (np.linalg.norm(c) * np.linalg.norm(v))
    assert diag.correlations[0] == pytest.approx(expected, abs=1e-12)


def test_balance_diagnostic_unknown_name(rng):
    d = random_dataset(rng, p=10, k=2)
    with pytest.raises(ValidationError):
        balance_diagnostic(d, ["missing"])
