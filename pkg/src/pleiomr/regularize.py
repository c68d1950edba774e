"""Partially penalized estimation of the causal effect.

The penalized objective is

    (1/2) (beta_y - theta*beta_x - beta_w@delta)' S (same) + lambda * sum|delta|

with no penalty on theta.  It is solved by the exact two-step reduction:

    Step 1: lasso of the b-orthogonalized outcome associations on the
            b-orthogonalized covariate associations, b = S^{1/2} beta_x;
    Step 2: theta = (beta_y - beta_w@delta)' S beta_x / (beta_x' S beta_x).

Step 1 uses cyclic coordinate descent with warm starts along a descending
geometric lambda path.  By default design columns are scaled to unit norm
internally and the penalty applies on that standardized scale (so the
effective penalty on the raw coefficients is lambda * sum(scale_j *
|delta_j|)); pass ``standardize=False`` for the literal unscaled objective.

Lambda is chosen by K-fold cross-validation over variants, with either the
weighted mean-squared-error target or the risk-factor-independent projected
target.  When fitting on a training fold, lambda is rescaled by the fold's
share of variants so penalty strength per variant is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit

from .data import SummaryDataset
from .estimators import ivw, mv_ivw_on, CausalEstimate
from .exceptions import ConvergenceError, NumericalError, ValidationError

__all__ = [
    "CvConfig",
    "RegularizationFit",
    "projection_complement",
    "solve_penalized",
    "lambda_path",
    "cross_validate",
    "post_regularization",
    "regularized_estimate",
    "penalized_objective",
    "kkt_violation",
    "fit_to_csv",
]

CD_TOL = 1e-8           # max subgradient violation per sweep
CD_MAX_ITER = 100       # sweeps per lambda before the splitting fallback
KKT_TOL = 1e-6

# when True every coordinate-descent solve is verified against the lasso
# subgradient conditions and a violation raises NumericalError
KKT_CHECK = False


@dataclass(frozen=True)
class CvConfig:
    """Cross-validation settings for the penalized fit."""

    n_folds: int = 10
    n_lambda: int = 100
    lambda_min_ratio: float = 1e-4
    target: str = "mse"
    n_repeats: int = 1
    rng_seed: int = 0
    standardize: bool = True

    def __post_init__(self):
        if self.n_folds < 2:
            raise ValidationError("n_folds must be at least 2")
        if self.n_lambda < 2:
            raise ValidationError("n_lambda must be at least 2")
        if not (0.0 < self.lambda_min_ratio < 1.0):
            raise ValidationError("lambda_min_ratio must lie in (0, 1)")
        if self.target not in ("mse", "projected"):
            raise ValidationError(f"unknown CV target '{self.target}'")
        if self.n_repeats < 1:
            raise ValidationError("n_repeats must be at least 1")


@dataclass(frozen=True)
class RegularizationFit:
    """Full-path result of the penalized fit, optionally with CV selection."""

    lambdas: np.ndarray
    delta_path: np.ndarray
    theta_path: np.ndarray
    active_sets: tuple
    covariate_names: tuple
    cv_curve: np.ndarray | None = None
    chosen_lambda: float | None = None
    cv_target: str | None = None
    chosen_delta: np.ndarray | None = None
    chosen_theta: float | None = None
    chosen_active: tuple | None = None


@njit(cache=True)
def _cd_path_kernel(at, r, col_sq, lambdas, coefs, iters, flags, tol, max_iter):
    """Cyclic coordinate descent over a descending lambda path.

    at: (k, m) design transposed; coefs: (L, k) output on the given scale.
    Lambdas that fail to converge within the sweep budget keep their
    best-effort coefficients and are marked in ``flags``; the caller is
    expected to finish them off with a different solver.

    Convergence is judged on the subgradient conditions, not on coefficient
    change: with a nearly rank-deficient design, coordinates can trade mass
    almost indefinitely while the residual (and hence the gradient) settles
    quickly.  Between full sweeps, only the currently active coordinates are
    iterated.  Every few sweeps the kernel also tries an exact solve of the
    normal equations restricted to the current active set and signs; once
    coordinate descent has identified the right support, that candidate
    satisfies the subgradient conditions and the crawl through an
    ill-conditioned subspace is skipped entirely.
    """
    k = at.shape[0]
    m = at.shape[1]
    nlam = lambdas.shape[0]
    delta = np.zeros(k)
    active = np.zeros(k, dtype=np.bool_)
    resid = r.copy()
    for li in range(nlam):
        lam = lambdas[li]
        converged = False
        full = True
        it = 0
        next_refine = 4
        while it < max_iter:
            it += 1
            max_viol = 0.0
            for j in range(k):
                cj = col_sq[j]
                if cj <= 0.0:
                    continue
                if not (full or active[j]):
                    continue
                old = delta[j]
                rho = cj * old
                for t in range(m):
                    rho += at[j, t] * resid[t]
                g = rho - cj * old
                if old > 0.0:
                    viol = abs(g - lam)
                elif old < 0.0:
                    viol = abs(g + lam)
                else:
                    viol = abs(g) - lam
                    if viol < 0.0:
                        viol = 0.0
                if viol > max_viol:
                    max_viol = viol
                if rho > lam:
                    new = (rho - lam) / cj
                elif rho < -lam:
                    new = (rho + lam) / cj
                else:
                    new = 0.0
                diff = new - old
                if diff != 0.0:
                    for t in range(m):
                        resid[t] -= diff * at[j, t]
                    delta[j] = new
                active[j] = new != 0.0
            if max_viol < tol:
                if full:
                    converged = True
                    break
                full = True  # active set settled; verify the rest
            else:
                full = False
            if it >= next_refine:
                next_refine *= 2
                n_act = 0
                for j in range(k):
                    if active[j]:
                        n_act += 1
                if n_act == 0:
                    continue
                idx = np.empty(n_act, dtype=np.int64)
                a = 0
                for j in range(k):
                    if active[j]:
                        idx[a] = j
                        a += 1
                ae = np.empty((m, n_act))
                for a in range(n_act):
                    jj = idx[a]
                    for t in range(m):
                        ae[t, a] = at[jj, t]
                gram = ae.T @ ae
                # tiny ridge keeps the solve non-singular when the active set
                # exceeds the design rank; the subgradient check below decides
                # whether the perturbed solution is acceptable
                tr = 0.0
                for a in range(n_act):
                    tr += gram[a, a]
                eps = 1e-10 * tr / n_act
                for a in range(n_act):
                    gram[a, a] += eps
                rhs = np.empty(n_act)
                for a in range(n_act):
                    jj = idx[a]
                    acc = 0.0
                    for t in range(m):
                        acc += at[jj, t] * r[t]
                    sgn = 1.0 if delta[jj] > 0.0 else -1.0
                    rhs[a] = acc - lam * sgn
                sol = np.linalg.solve(gram, rhs)
                cand = np.zeros(k)
                for a in range(n_act):
                    cand[idx[a]] = sol[a]
                resid_c = r.copy()
                for a in range(n_act):
                    jj = idx[a]
                    for t in range(m):
                        resid_c[t] -= sol[a] * at[jj, t]
                cviol = 0.0
                for j in range(k):
                    if col_sq[j] <= 0.0:
                        continue
                    g = 0.0
                    for t in range(m):
                        g += at[j, t] * resid_c[t]
                    if cand[j] > 0.0:
                        v = abs(g - lam)
                    elif cand[j] < 0.0:
                        v = abs(g + lam)
                    else:
                        v = abs(g) - lam
                        if v < 0.0:
                            v = 0.0
                    if v > cviol:
                        cviol = v
                if cviol < tol:
                    for j in range(k):
                        delta[j] = cand[j]
                        active[j] = cand[j] != 0.0
                    for t in range(m):
                        resid[t] = resid_c[t]
                    converged = True
                    break
        iters[li] = it
        if not converged:
            flags[li] = 1
        for j in range(k):
            coefs[li, j] = delta[j]


def _splitting_polish(A, r, lam, delta0, tol, alpha=1.7, max_iter=500_000):
    """Finish a lasso solve that coordinate descent could not close out.

    Douglas-Rachford splitting (scaled ADMM form) iterates until the support
    stabilizes, then an exact solve of the normal equations on that support
    snaps to the optimum.  The penalty parameter rho = lambda keeps the
    soft-threshold step on the scale of the problem; both the primal and dual
    variables are warmed from the coordinate-descent iterate.  Returns None
    if the tolerance is never reached.
    """
    k = A.shape[1]
    rho = lam if lam > 0 else 1.0
    m_inv = np.linalg.inv(A.T @ A + rho * np.eye(k))
    atr = A.T @ r
    z = np.asarray(delta0, dtype=float).copy()
    u = (atr - A.T @ (A @ z)) / rho
    for it in range(1, max_iter + 1):
        x = m_inv @ (atr + rho * (z - u))
        xr = alpha * x + (1.0 - alpha) * z
        z = xr + u
        z = np.sign(z) * np.maximum(np.abs(z) - lam / rho, 0.0)
        u += xr - z
        if it % 25 == 0:
            if kkt_violation(A, r, z, lam) < tol:
                return z
            support = np.flatnonzero(z)
            if support.size:
                ae = A[:, support]
                rhs = ae.T @ r - lam * np.sign(z[support])
                gram = ae.T @ ae
                eps = 1e-10 * np.trace(gram) / support.size
                sol = np.linalg.solve(gram + eps * np.eye(support.size), rhs)
                cand = np.zeros(k)
                cand[support] = sol
                if kkt_violation(A, r, cand, lam) < tol:
                    return cand
    return None


def solve_lasso_path(A: np.ndarray, r: np.ndarray, lambdas: np.ndarray) -> np.ndarray:
    """Lasso solutions (1/2)||r - A d||^2 + lam*||d||_1 along a lambda path."""
    A = np.asarray(A, dtype=float)
    at = np.ascontiguousarray(A.T)
    r = np.asarray(r, dtype=float)
    lambdas = np.asarray(lambdas, dtype=float)
    col_sq = np.einsum("jt,jt->j", at, at)
    coefs = np.zeros((lambdas.size, at.shape[0]))
    iters = np.zeros(lambdas.size, dtype=np.int64)
    flags = np.zeros(lambdas.size, dtype=np.int64)
    _cd_path_kernel(at, r, col_sq, lambdas, coefs, iters, flags, CD_TOL, CD_MAX_ITER)
    for li in np.flatnonzero(flags):
        polished = _splitting_polish(A, r, float(lambdas[li]), coefs[li], CD_TOL)
        if polished is None:
            raise ConvergenceError(
                f"lasso solve did not converge at lambda={lambdas[li]:.6g} "
                f"(path index {li})"
            )
        coefs[li] = polished
    if KKT_CHECK:
        for li, lam in enumerate(lambdas):
            viol = kkt_violation(A, r, coefs[li], lam)
            if viol > KKT_TOL:
                raise NumericalError(
                    f"KKT violation {viol:.3g} at lambda={lam:.6g} exceeds {KKT_TOL}"
                )
    return coefs


def kkt_violation(A: np.ndarray, r: np.ndarray, delta: np.ndarray, lam: float) -> float:
    """Maximum lasso subgradient violation of a candidate solution."""
    grad = A.T @ (r - A @ delta)
    viol = np.where(
        delta == 0.0, np.abs(grad) - lam, np.abs(grad - lam * np.sign(delta))
    )
    return max(float(viol.max(initial=0.0)), 0.0)


def _weighted_parts(beta_x, beta_w, beta_y, se_y):
    sroot = se_y ** -1.0
    b = sroot * beta_x
    bb = float(b @ b)
    if bb <= 0:
        raise NumericalError("degenerate instruments: beta_x' S beta_x = 0")
    M = sroot[:, None] * beta_w
    v = sroot * beta_y
    return b, bb, M, v


def _step1_problem(beta_x, beta_w, beta_y, se_y, standardize):
    """Projected step-1 design/response and the internal column scales."""
    b, bb, M, v = _weighted_parts(beta_x, beta_w, beta_y, se_y)
    A = M - np.outer(b, (b @ M) / bb)
    r = v - b * (float(b @ v) / bb)
    if standardize:
        scales = np.linalg.norm(A, axis=0)
        safe = np.where(scales > 0, scales, 1.0)
        A = A / safe
        scales = safe
    else:
        scales = np.ones(A.shape[1])
    return A, r, scales


def _step2_theta(beta_x, beta_w, beta_y, se_y, delta):
    w = se_y ** -2.0
    bsb = float(beta_x @ (w * beta_x))
    resid = beta_y - beta_w @ delta if delta.size else beta_y
    return float(resid @ (w * beta_x)) / bsb


def projection_complement(d: SummaryDataset):
    """Residual-maker of b = S^{1/2} beta_x, as a callable operator on vectors."""
    sroot = d.se_y ** -1.0
    b = sroot * d.beta_x
    bb = float(b @ b)
    if bb <= 0:
        raise NumericalError("degenerate instruments: beta_x' S beta_x = 0")

    def apply(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return v - b * (float(b @ v) / bb)

    return apply


def solve_penalized(d: SummaryDataset, lam: float, standardize: bool = True):
    """Minimize the partially penalized objective at a single lambda.

    Returns ``(theta_hat, delta_hat)`` on the raw coefficient scale.
    """
    if d.p < 2:
        raise ValidationError("penalized fit requires at least 2 variants")
    if lam < 0:
        raise ValidationError("lambda must be non-negative")
    A, r, scales = _step1_problem(d.beta_x, d.beta_w, d.beta_y, d.se_y, standardize)
    if lam == 0.0:
        if d.p < d.k + 2:
            raise ValidationError(
                f"unpenalized fit requires p >= k + 2 (p={d.p}, k={d.k})"
            )
        delta_std, _, rank, _ = np.linalg.lstsq(A, r, rcond=None)
        if rank < d.k:
            raise NumericalError("projected design is rank deficient at lambda = 0")
    else:
        delta_std = solve_lasso_path(A, r, np.array([lam]))[0]
    delta = delta_std / scales
    theta = _step2_theta(d.beta_x, d.beta_w, d.beta_y, d.se_y, delta)
    return theta, delta


def penalized_objective(d: SummaryDataset, theta: float, delta: np.ndarray,
                        lam: float, scales: np.ndarray | None = None) -> float:
    """Value of the penalized objective at (theta, delta).

    With ``scales`` given, the penalty is lambda * sum(scales * |delta|) (the
    effective penalty under internal standardization); otherwise the literal
    lambda * sum|delta|.
    """
    delta = np.asarray(delta, dtype=float)
    w = d.se_y ** -2.0
    resid = d.beta_y - theta * d.beta_x - (d.beta_w @ delta if delta.size else 0.0)
    quad = 0.5 * float(resid @ (w * resid))
    pen_scales = np.ones(delta.size) if scales is None else np.asarray(scales, dtype=float)
    return quad + lam * float(pen_scales @ np.abs(delta))


def step1_scales(d: SummaryDataset, standardize: bool = True) -> np.ndarray:
    """Internal column scales of the step-1 design (ones when unscaled)."""
    _, _, scales = _step1_problem(d.beta_x, d.beta_w, d.beta_y, d.se_y, standardize)
    return scales


def lambda_path(d: SummaryDataset, n_lambda: int = 100,
                lambda_min_ratio: float = 1e-4, standardize: bool = True) -> np.ndarray:
    """Descending geometric lambda sequence from lambda_max."""
    if d.k < 1:
        raise ValidationError("lambda path requires at least one covariate")
    if n_lambda < 2:
        raise ValidationError("n_lambda must be at least 2")
    if not (0.0 < lambda_min_ratio < 1.0):
        raise ValidationError("lambda_min_ratio must lie in (0, 1)")
    A, r, _ = _step1_problem(d.beta_x, d.beta_w, d.beta_y, d.se_y, standardize)
    lam_max = float(np.max(np.abs(A.T @ r)))
    if lam_max <= 0:
        raise NumericalError("lambda_max is zero: projected response has no covariate signal")
    # tiny inflation so the all-zero solution holds exactly at the path head
    # despite summation-order differences inside the solver
    lam_max *= 1.0 + 1e-10
    return lam_max * lambda_min_ratio ** (np.arange(n_lambda) / (n_lambda - 1))


def _path_truncation(coefs_std, A_std, r, fdev: float = 1e-5,
                     devmax: float = 0.999) -> int:
    """Number of leading path values to keep, reference-software style.

    The path is cut once the fraction of deviance explained saturates: when
    one step improves it by less than ``fdev`` of its level, or when it
    exceeds ``devmax``.  This drops the overfitting tail from the candidate
    set before cross-validation.
    """
    resid = r[None, :] - coefs_std @ A_std.T
    rss = np.einsum("lt,lt->l", resid, resid)
    null_dev = float(r @ r)
    if null_dev <= 0:
        return coefs_std.shape[0]
    dev = 1.0 - rss / null_dev
    for li in range(1, dev.size):
        if dev[li] > devmax or dev[li] - dev[li - 1] < fdev * dev[li]:
            return li + 1
    return dev.size


def _theta_from_deltas(beta_x, beta_w, beta_y, se_y, deltas):
    w = se_y ** -2.0
    b_raw = w * beta_x
    bsb = float(beta_x @ b_raw)
    return (beta_y @ b_raw - deltas @ (beta_w.T @ b_raw)) / bsb


def _path_fit(beta_x, beta_w, beta_y, se_y, lambdas, standardize):
    """Raw-scale delta path and theta path at the given lambdas."""
    A, r, scales = _step1_problem(beta_x, beta_w, beta_y, se_y, standardize)
    coefs_std = solve_lasso_path(A, r, lambdas)
    deltas = coefs_std / scales
    thetas = _theta_from_deltas(beta_x, beta_w, beta_y, se_y, deltas)
    return deltas, thetas


def _fold_losses(d, train, test, lambdas, cfg):
    """Per-lambda loss on a held-out fold; NaN vector if the fold is degenerate."""
    L = lambdas.size
    bx_tr, bw_tr = d.beta_x[train], d.beta_w[train]
    by_tr, se_tr = d.beta_y[train], d.se_y[train]
    # preserve per-variant penalty strength on the smaller training problem
    lam_train = lambdas * (train.size / d.p)
    deltas, thetas = _path_fit(bx_tr, bw_tr, by_tr, se_tr, lam_train, cfg.standardize)

    sroot_t = d.se_y[test] ** -1.0
    b_t = sroot_t * d.beta_x[test]
    M_t = sroot_t[:, None] * d.beta_w[test]
    v_t = sroot_t * d.beta_y[test]
    U = v_t[:, None] - M_t @ deltas.T  # (p_test, L)
    if cfg.target == "mse":
        E = U - np.outer(b_t, thetas)
        return np.mean(E * E, axis=0)
    # projected target needs a non-trivial orthogonal complement on the fold
    bb_t = float(b_t @ b_t)
    if test.size < 2 or bb_t <= 0:
        return np.full(L, np.nan)
    E = U - np.outer(b_t, (b_t @ U) / bb_t)
    return np.mean(E * E, axis=0)


def cross_validate(d: SummaryDataset, cfg: CvConfig) -> RegularizationFit:
    """K-fold cross-validation over variants, path fit, and final selection.

    The selected lambda is the minimizer of the mean CV loss; with
    ``n_repeats > 1`` it is the mean of per-repeat minimizers.  If the
    selected lambda activates more than p - 2 covariates it is raised to the
    smallest path value that does not.
    """
    if d.k < 1:
        raise ValidationError("cross-validation requires at least one covariate")
    if d.p < cfg.n_folds:
        raise ValidationError(f"n_folds ({cfg.n_folds}) exceeds variant count ({d.p})")

    lambdas = lambda_path(d, cfg.n_lambda, cfg.lambda_min_ratio, cfg.standardize)
    A_std, r_std, scales = _step1_problem(
        d.beta_x, d.beta_w, d.beta_y, d.se_y, cfg.standardize
    )
    coefs_std = solve_lasso_path(A_std, r_std, lambdas)
    keep = _path_truncation(coefs_std, A_std, r_std)
    lambdas = lambdas[:keep]
    deltas = coefs_std[:keep] / scales
    thetas = _theta_from_deltas(d.beta_x, d.beta_w, d.beta_y, d.se_y, deltas)
    active_sets = tuple(
        tuple(name for j, name in enumerate(d.covariate_names) if deltas[li, j] != 0.0)
        for li in range(lambdas.size)
    )

    all_idx = np.arange(d.p)
    curves = np.zeros((cfg.n_repeats, lambdas.size))
    chosen_per_rep = np.zeros(cfg.n_repeats)
    for rep in range(cfg.n_repeats):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed, spawn_key=(rep,)))
        folds = np.array_split(rng.permutation(d.p), cfg.n_folds)
        losses = np.full((cfg.n_folds, lambdas.size), np.nan)
        for fi, test in enumerate(folds):
            train = np.setdiff1d(all_idx, test)
            if train.size < 2:
                raise ValidationError("training fold has fewer than 2 variants")
            losses[fi] = _fold_losses(d, train, np.sort(test), lambdas, cfg)
        usable = ~np.all(np.isnan(losses), axis=1)
        if not np.any(usable):
            raise NumericalError("every cross-validation fold was degenerate")
        curve = np.nanmean(losses[usable], axis=0)
        curves[rep] = curve
        chosen_per_rep[rep] = lambdas[int(np.argmin(curve))]

    cv_curve = curves.mean(axis=0)
    chosen = float(chosen_per_rep.mean())

    theta_c, delta_c = _refit_at(d, lambdas, deltas, thetas, chosen, cfg.standardize)
    n_active = int(np.count_nonzero(delta_c))
    if n_active > d.p - 2:
        sizes = np.array([len(s) for s in active_sets])
        ok = np.flatnonzero((sizes <= d.p - 2) & (lambdas > chosen))
        if ok.size == 0:
            raise NumericalError("no lambda on the path selects at most p - 2 covariates")
        chosen = float(lambdas[ok].min())
        li = int(np.flatnonzero(lambdas == chosen)[0])
        theta_c, delta_c = thetas[li], deltas[li].copy()

    active = tuple(
        name for j, name in enumerate(d.covariate_names) if delta_c[j] != 0.0
    )
    return RegularizationFit(
        lambdas=lambdas,
        delta_path=deltas,
        theta_path=thetas,
        active_sets=active_sets,
        covariate_names=d.covariate_names,
        cv_curve=cv_curve,
        chosen_lambda=chosen,
        cv_target=cfg.target,
        chosen_delta=delta_c,
        chosen_theta=theta_c,
        chosen_active=active,
    )


def _refit_at(d, lambdas, deltas, thetas, lam, standardize):
    exact = np.flatnonzero(lambdas == lam)
    if exact.size:
        li = int(exact[0])
        return thetas[li], deltas[li].copy()
    theta, delta = solve_penalized(d, lam, standardize)
    return theta, delta


def post_regularization(d: SummaryDataset, fit: RegularizationFit) -> CausalEstimate:
    """Unpenalized multivariable refit on the CV-selected covariate set."""
    if fit.chosen_lambda is None:
        raise ValidationError("fit has no chosen lambda; run cross_validate first")
    return mv_ivw_on(d, fit.chosen_active, "post_reg")


def regularized_estimate(d: SummaryDataset, fit: RegularizationFit) -> CausalEstimate:
    """Penalized-path estimate at the chosen lambda.

    Its naive standard error is unreliable post selection, so the interval
    fields are NaN; use the inference module for valid intervals.
    """
    if fit.chosen_lambda is None:
        raise ValidationError("fit has no chosen lambda; run cross_validate first")
    return CausalEstimate(
        theta_hat=float(fit.chosen_theta),
        delta_hat=fit.chosen_delta,
        se_theta=float("nan"),
        ci_low=float("nan"),
        ci_high=float("nan"),
        dispersion=float("nan"),
        covariates_used=fit.chosen_active,
        method_tag="reg",
    )


def fit_to_csv(fit: RegularizationFit, path) -> None:
    """Export the lambda path (and CV curve, when present) as CSV."""
    path = Path(path)
    names = fit.covariate_names
    header = ["lambda", "theta"] + [f"delta_{n}" for n in names] + ["n_active", "cv_loss", "chosen"]
    chosen_row = -1
    if fit.chosen_lambda is not None:
        chosen_row = int(np.argmin(np.abs(np.log(fit.lambdas) - np.log(fit.chosen_lambda))))
    lines = [",".join(header)]
    for li, lam in enumerate(fit.lambdas):
        cells = [repr(float(lam)), repr(float(fit.theta_path[li]))]
        cells += [repr(float(v)) for v in fit.delta_path[li]]
        cells.append(str(int(np.count_nonzero(fit.delta_path[li]))))
        cells.append("" if fit.cv_curve is None else repr(float(fit.cv_curve[li])))
        cells.append("1" if li == chosen_row else "0")
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
