"""Closed-form causal-effect estimators from summary data.

Implements the inverse-variance weighted (IVW) estimator, the multivariable
IVW estimator (weighted regression of outcome associations on risk-factor and
covariate associations, no intercept), the equivalent covariate-balancing
allele-score estimator, and the covariate-balancing diagnostic.

Standard errors follow the random-effects convention: multiplicative
over-dispersion estimated from the weighted residuals and floored at 1.
Confidence intervals are normal-based at the 95% level.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .data import SummaryDataset, WeightVector, subset_covariates
from .exceptions import NumericalError, ValidationError

__all__ = [
    "Z95",
    "CausalEstimate",
    "BalancingWeights",
    "BalanceDiagnostic",
    "fit_weighted_regression",
    "ivw",
    "mv_ivw",
    "balancing_weights",
    "balancing_estimate",
    "balance_diagnostic",
]

# two-sided 95% normal quantile, fixed by convention (no t correction)
Z95 = 1.959964

_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class CausalEstimate:
    """Point estimate of the causal effect with normal-based 95% interval.

    ``se_theta``/``ci_low``/``ci_high``/``dispersion`` are NaN for estimators
    whose naive standard errors are known to be unreliable (the regularized
    path estimate); see the inference module for valid intervals.
    """

    theta_hat: float
    delta_hat: np.ndarray
    se_theta: float
    ci_low: float
    ci_high: float
    dispersion: float
    covariates_used: tuple
    method_tag: str

    def __post_init__(self):
        delta = np.atleast_1d(np.asarray(self.delta_hat, dtype=float))
        delta.setflags(write=False)
        object.__setattr__(self, "delta_hat", delta)
        object.__setattr__(self, "covariates_used", tuple(self.covariates_used))
        if np.isfinite(self.se_theta):
            if self.se_theta < 0:
                raise ValidationError("se_theta must be non-negative")
            if not (self.ci_low - 1e-12 <= self.theta_hat <= self.ci_high + 1e-12):
                raise ValidationError("confidence interval must contain the point estimate")
        if np.isfinite(self.dispersion) and self.dispersion < 1.0:
            raise ValidationError("dispersion factor is floored at 1")


@dataclass(frozen=True)
class BalancingWeights:
    """Allele-score weights balancing every covariate: alpha' S beta_w = 0."""

    alpha: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class BalanceDiagnostic:
    """Correlation of each trait's associations with outcome residuals.

    ``trait_names`` lists the risk factor first, then every covariate;
    ``correlations`` are the matching uncentered (cosine) correlations, which
    are exactly zero for covariates included in the residualizing model.
    """

    trait_names: tuple
    correlations: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "trait_names", tuple(self.trait_names))
        corr = np.asarray(self.correlations, dtype=float)
        corr.setflags(write=False)
        object.__setattr__(self, "correlations", corr)
        if np.any(np.abs(corr) > 1 + 1e-12):
            raise ValidationError("correlations must lie in [-1, 1]")


def fit_weighted_regression(y: np.ndarray, X: np.ndarray, w: WeightVector):
    """Weighted least squares with multiplicative over-dispersion.

    Returns ``(coefficients, covariance, dispersion)`` where
    ``coefficients = (X'WX)^{-1} X'Wy``,
    ``dispersion = max(1, RSS_w / (rows - cols))`` and
    ``covariance = dispersion * (X'WX)^{-1}``.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValidationError("design matrix must be 2-dimensional")
    n, q = X.shape
    if n <= q:
        raise ValidationError(
            f"weighted regression needs more rows ({n}) than columns ({q})"
        )
    sw = np.sqrt(w.w)
    Xw = X * sw[:, None]
    yw = y * sw

    singular = np.linalg.svd(Xw, compute_uv=False)
    if singular[0] == 0 or singular[-1] <= singular[0] * _RANK_RTOL:
        raise NumericalError("weighted design matrix is rank deficient")

    gram = Xw.T @ Xw
    coef = np.linalg.solve(gram, Xw.T @ yw)
    resid = yw - Xw @ coef
    rss = float(resid @ resid)
    dispersion = max(1.0, rss / (n - q))
    cov = dispersion * np.linalg.inv(gram)
    return coef, cov, dispersion


def _estimate(d: SummaryDataset, X: np.ndarray, covariates: tuple, tag: str) -> CausalEstimate:
    coef, cov, dispersion = fit_weighted_regression(d.beta_y, X, _weights(d))
    theta = float(coef[0])
    se = float(np.sqrt(cov[0, 0]))
    return CausalEstimate(
        theta_hat=theta,
        delta_hat=coef[1:],
        se_theta=se,
        ci_low=theta - Z95 * se,
        ci_high=theta + Z95 * se,
        dispersion=dispersion,
        covariates_used=covariates,
        method_tag=tag,
    )


def _weights(d: SummaryDataset) -> WeightVector:
    return WeightVector(d.se_y ** -2.0)


def ivw(d: SummaryDataset) -> CausalEstimate:
    """Inverse-variance weighted estimator, ignoring all covariates."""
    if d.p < 2:
        raise ValidationError("IVW requires at least 2 variants")
    w = d.se_y ** -2.0
    if float(d.beta_x @ (w * d.beta_x)) <= 0:
        raise NumericalError("degenerate instruments: beta_x' S beta_x = 0")
    est = _estimate(d, d.beta_x[:, None], (), "ivw")
    return replace(est, delta_hat=np.empty(0))


def mv_ivw(d: SummaryDataset) -> CausalEstimate:
    """Multivariable IVW: weighted regression of beta_y on [beta_x beta_w]."""
    if d.p < d.k + 2:
        raise ValidationError(
            f"multivariable IVW requires p >= k + 2 (p={d.p}, k={d.k}); "
            "use the regularized estimator for high-dimensional covariates"
        )
    X = np.column_stack([d.beta_x, d.beta_w])
    return _estimate(d, X, d.covariate_names, "mv_ivw")


def balancing_weights(d: SummaryDataset) -> BalancingWeights:
    """Closed-form covariate-balancing allele-score weights.

    xi = beta_x - beta_w (beta_w' S beta_w)^{-1} (beta_w' S beta_x), with the
    inverse-variance weight matrix standing in for the variant covariance;
    alpha is xi normalized by xi' S xi.
    """
    if d.p <= d.k:
        raise ValidationError(f"balancing weights require p > k (p={d.p}, k={d.k})")
    w = d.se_y ** -2.0
    if d.k == 0:
        xi = d.beta_x.copy()
    else:
        SW = w[:, None] * d.beta_w
        gram = d.beta_w.T @ SW
        singular = np.linalg.svd(gram, compute_uv=False)
        if singular[0] == 0 or singular[-1] <= singular[0] * _RANK_RTOL:
            raise NumericalError("beta_w' S beta_w is singular")
        xi = d.beta_x - d.beta_w @ np.linalg.solve(gram, SW.T @ d.beta_x)
    norm = float(xi @ (w * xi))
    if norm <= 0:
        raise NumericalError("degenerate balancing direction: xi' S xi = 0")
    return BalancingWeights(alpha=xi / norm, xi=xi)


def balancing_estimate(d: SummaryDataset) -> CausalEstimate:
    """Ratio estimator from the balancing allele score.

    Numerically identical to the multivariable IVW estimate of the causal
    effect; the standard error is copied from that equivalent fit.
    """
    bw = balancing_weights(d)
    w = d.se_y ** -2.0
    denom = float(bw.alpha @ (w * d.beta_x))
    if denom == 0:
        raise NumericalError("degenerate ratio: alpha' S beta_x = 0")
    theta = float(bw.alpha @ (w * d.beta_y)) / denom
    mv = mv_ivw(d)
    return CausalEstimate(
        theta_hat=theta,
        delta_hat=np.empty(0),
        se_theta=mv.se_theta,
        ci_low=theta - Z95 * mv.se_theta,
        ci_high=theta + Z95 * mv.se_theta,
        dispersion=mv.dispersion,
        covariates_used=d.covariate_names,
        method_tag="balancing",
    )


def balance_diagnostic(
    d: SummaryDataset,
    covariates_in_model: Iterable[str],
    scaled: bool = True,
) -> BalanceDiagnostic:
    """Covariate-balancing diagnostic.

    Residualizes the outcome associations on the selected covariate
    associations (weighted regression, no intercept) and reports the
    uncentered correlation of the risk-factor and each covariate association
    with the residuals.  ``scaled=False`` computes on raw associations
    instead of the inverse-variance scaled ones.
    """
    selected = set(covariates_in_model)
    unknown = selected - set(d.covariate_names)
    if unknown:
        raise ValidationError(f"unknown covariate name(s): {sorted(unknown)}")

    scale = d.se_y ** -1.0 if scaled else np.ones(d.p)
    v = scale * d.beta_y
    cols = [i for i, name in enumerate(d.covariate_names) if name in selected]
    if cols:
        M = scale[:, None] * d.beta_w[:, cols]
        singular = np.linalg.svd(M, compute_uv=False)
        if singular[0] == 0 or singular[-1] <= singular[0] * _RANK_RTOL:
            raise NumericalError("selected covariate associations are rank deficient")
        resid = v - M @ np.linalg.solve(M.T @ M, M.T @ v)
    else:
        resid = v

    traits = ("risk_factor",) + d.covariate_names
    columns = np.column_stack([scale * d.beta_x] + [scale * d.beta_w[:, j] for j in range(d.k)]) \
        if d.k else (scale * d.beta_x)[:, None]
    rnorm = float(np.linalg.norm(resid))
    corr = np.zeros(d.k + 1)
    if rnorm > 0:
        for j in range(d.k + 1):
            cnorm = float(np.linalg.norm(columns[:, j]))
            if cnorm > 0:
                corr[j] = float(columns[:, j] @ resid) / (cnorm * rnorm)
    corr = np.clip(corr, -1.0, 1.0)
    return BalanceDiagnostic(trait_names=traits, correlations=corr)


def mv_ivw_on(d: SummaryDataset, names: Iterable[str], tag: str) -> CausalEstimate:
    """Multivariable IVW restricted to the named covariates (IVW if empty)."""
    names = tuple(names)
    if not names:
        return replace(ivw(d), method_tag=tag)
    est = mv_ivw(subset_covariates(d, names))
    return replace(est, method_tag=tag)
