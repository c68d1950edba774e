"""Confidence-interval procedures around the covariate selection step.

Selecting covariates and estimating on the same data (the two-sample
procedures) under-covers; the three-sample design selects on an independent
dataset and restores near-nominal coverage.  The double-estimation selector
unions two fully penalized lasso screens (risk-factor and outcome
associations regressed on the covariate associations).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .data import SummaryDataset
from .estimators import CausalEstimate, mv_ivw_on
from .exceptions import ValidationError
from .regularize import (
    CvConfig,
    _path_truncation,
    cross_validate,
    post_regularization,
    solve_lasso_path,
)

__all__ = [
    "InferenceResult",
    "two_sample_ci",
    "three_sample_ci",
    "double_estimation_ci",
    "oracle_ci",
]


@dataclass(frozen=True)
class InferenceResult:
    """A causal estimate together with the covariate set it conditioned on."""

    estimate: CausalEstimate
    selection_set: tuple
    method: str

    def __post_init__(self):
        object.__setattr__(self, "selection_set", tuple(self.selection_set))


def _method_label(prefix: str, target: str) -> str:
    return f"{prefix}_a" if target == "mse" else f"{prefix}_b"


def two_sample_ci(d: SummaryDataset, cfg: CvConfig) -> InferenceResult:
    """Select by cross-validated regularization and estimate on the same data.

    Known caveat: intervals under-cover because the selection event is ignored.
    """
    fit = cross_validate(d, cfg)
    est = post_regularization(d, fit)
    method = _method_label("two_sample", cfg.target)
    return InferenceResult(replace(est, method_tag=method), fit.chosen_active, method)


def three_sample_ci(d_select: SummaryDataset, d_analyze: SummaryDataset,
                    cfg: CvConfig) -> InferenceResult:
    """Select on an independent dataset, then estimate on the analysis data.

    The caller is responsible for the independence of the two datasets; they
    must share variant ids and covariate names.
    """
    if d_select.variant_ids != d_analyze.variant_ids:
        raise ValidationError("selection and analysis datasets have different variants")
    if d_select.covariate_names != d_analyze.covariate_names:
        raise ValidationError("selection and analysis datasets have different covariates")
    if d_select is d_analyze or (
        np.array_equal(d_select.beta_y, d_analyze.beta_y)
        and np.array_equal(d_select.beta_x, d_analyze.beta_x)
    ):
        warnings.warn(
            "selection and analysis datasets coincide; intervals degrade to the "
            "two-sample procedure and may under-cover",
            stacklevel=2,
        )
    fit = cross_validate(d_select, cfg)
    method = _method_label("three_sample", cfg.target)
    est = mv_ivw_on(d_analyze, fit.chosen_active, method)
    return InferenceResult(est, fit.chosen_active, method)


def _lasso_screen(response: np.ndarray, d: SummaryDataset, cfg: CvConfig,
                  stream: int, weighted: bool):
    """CV-selected active set of a standard lasso of response on beta_w.

    Returns (path_active_sets, chosen_active, chosen_index_on_path).
    """
    sroot = d.se_y ** -1.0 if weighted else np.ones(d.p)
    A_full = sroot[:, None] * d.beta_w
    r_full = sroot * response
    scales = np.linalg.norm(A_full, axis=0) if cfg.standardize else np.ones(d.k)
    scales = np.where(scales > 0, scales, 1.0)
    A_std = A_full / scales

    lam_max = float(np.max(np.abs(A_std.T @ r_full)))
    if lam_max <= 0:
        # no covariate signal at all: empty selection at every lambda
        L = cfg.n_lambda
        return tuple(() for _ in range(L)), (), 0
    lam_max *= 1.0 + 1e-10  # keep the path head exactly sparse
    lambdas = lam_max * cfg.lambda_min_ratio ** (np.arange(cfg.n_lambda) / (cfg.n_lambda - 1))

    coefs = solve_lasso_path(A_std, r_full, lambdas)
    lambdas = lambdas[: _path_truncation(coefs, A_std, r_full)]
    coefs = coefs[: lambdas.size]
    path_active = tuple(
        tuple(n for j, n in enumerate(d.covariate_names) if coefs[li, j] != 0.0)
        for li in range(lambdas.size)
    )

    all_idx = np.arange(d.p)
    chosen_per_rep = np.zeros(cfg.n_repeats)
    for rep in range(cfg.n_repeats):
        rng = np.random.default_rng(
            np.random.SeedSequence(cfg.rng_seed, spawn_key=(stream, rep))
        )
        folds = np.array_split(rng.permutation(d.p), cfg.n_folds)
        losses = np.zeros((cfg.n_folds, lambdas.size))
        for fi, test in enumerate(folds):
            train = np.setdiff1d(all_idx, test)
            if train.size < 2:
                raise ValidationError("training fold has fewer than 2 variants")
            A_tr = A_full[train]
            sc_tr = np.linalg.norm(A_tr, axis=0) if cfg.standardize else np.ones(d.k)
            sc_tr = np.where(sc_tr > 0, sc_tr, 1.0)
            lam_tr = lambdas * (train.size / d.p)
            coefs_tr = solve_lasso_path(A_tr / sc_tr, r_full[train], lam_tr) / sc_tr
            E = r_full[test, None] - A_full[test] @ coefs_tr.T
            losses[fi] = np.mean(E * E, axis=0)
        chosen_per_rep[rep] = lambdas[int(np.argmin(losses.mean(axis=0)))]

    chosen = float(chosen_per_rep.mean())
    coef_chosen = solve_lasso_path(A_std, r_full, np.array([chosen]))[0]
    chosen_active = tuple(
        n for j, n in enumerate(d.covariate_names) if coef_chosen[j] != 0.0
    )
    idx = int(np.argmin(np.abs(np.log(lambdas) - np.log(chosen))))
    return path_active, chosen_active, idx


def double_estimation_ci(d: SummaryDataset, cfg: CvConfig,
                         weighted: bool = True) -> InferenceResult:
    """Double-estimation selector: union of two standard lasso screens.

    One lasso regresses the risk-factor associations on the covariate
    associations, the other the outcome associations; the final covariate set
    is the union of the two active sets, capped at p - 2 by raising both
    lambdas jointly along their paths.  Both screens are inverse-variance
    weighted unless ``weighted=False``.
    """
    if d.k < 1:
        raise ValidationError("double estimation requires at least one covariate")
    if d.p < 3:
        raise ValidationError("double estimation requires at least 3 variants")

    path_x, set_x, ix = _lasso_screen(d.beta_x, d, cfg, stream=0, weighted=weighted)
    path_y, set_y, iy = _lasso_screen(d.beta_y, d, cfg, stream=1, weighted=weighted)

    union = set(set_x) | set(set_y)
    if len(union) > d.p - 2:
        while len(union) > d.p - 2 and (ix > 0 or iy > 0):
            ix = max(ix - 1, 0)
            iy = max(iy - 1, 0)
            union = set(path_x[ix]) | set(path_y[iy])
    selected = tuple(n for n in d.covariate_names if n in union)
    est = mv_ivw_on(d, selected, "double_estimation")
    return InferenceResult(est, selected, "double_estimation")


def oracle_ci(d: SummaryDataset, true_set: Iterable[str]) -> InferenceResult:
    """Multivariable IVW on the truly pleiotropic set (simulation benchmark)."""
    selected = tuple(true_set)
    if d.p < len(selected) + 2:
        raise ValidationError("oracle estimation requires p >= |true set| + 2")
    est = mv_ivw_on(d, selected, "oracle")
    return InferenceResult(est, est.covariates_used, "oracle")
