"""Monte Carlo study of the estimators on the structural model.

Individual-level data are generated from the linear structural equations
(genotypes Binomial(2, maf); confounder and noise standard normal), reduced
to per-variant summary statistics by simple linear regression, and fed to
every requested estimator over independent replications.  Aggregates report
mean, SD, mean standard error, coverage of the true effect and power.

Replications use counter-based RNG substreams keyed by (seed, replicate), so
results are identical regardless of worker count or execution order.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from joblib import Parallel, delayed

from .data import SummaryDataset
from .estimators import ivw, mv_ivw
from .exceptions import PleiomrError, ValidationError
from .inference import double_estimation_ci, oracle_ci, three_sample_ci, two_sample_ci
from .regularize import CvConfig, cross_validate, post_regularization, regularized_estimate

__all__ = [
    "ScenarioConfig",
    "Replicate",
    "SimulationReport",
    "ALL_METHODS",
    "preset_scenario",
    "scenario_from_file",
    "generate_replicate",
    "run_study",
]

ALL_METHODS = (
    "ivw",
    "reg",
    "post_reg",
    "mv_all",
    "oracle",
    "two_sample_a",
    "two_sample_b",
    "three_sample_a",
    "three_sample_b",
    "double_est",
)

_REGIMES = ("outcome_effects", "variant_effects")


@dataclass(frozen=True)
class ScenarioConfig:
    """Data-generating parameterization of one simulation scenario."""

    p: int
    k: int
    beta_x_range: tuple
    beta_w_range: tuple
    n: int = 20_000
    maf: float = 0.3
    delta_range: tuple = (-0.2, 0.3)
    n_pleiotropic: int = 1
    sparsity_regime: str = "outcome_effects"
    theta: float = 0.2
    gamma_x: float = 1.0
    gamma_y: float = 1.0
    gamma_w: float | None = None  # defaults to 1/k
    n_datasets: int = 2
    rng_seed: int = 0

    def __post_init__(self):
        if self.p < 2:
            raise ValidationError("p must be at least 2")
        if self.k < 0:
            raise ValidationError("k must be non-negative")
        if not (0.0 < self.maf < 1.0):
            raise ValidationError("maf must lie in (0, 1)")
        if self.n < 3:
            raise ValidationError("n must be at least 3")
        if not (0 <= self.n_pleiotropic <= self.k):
            raise ValidationError("n_pleiotropic must lie in [0, k]")
        if self.sparsity_regime not in _REGIMES:
            raise ValidationError(f"sparsity_regime must be one of {_REGIMES}")
        if self.n_datasets not in (2, 3):
            raise ValidationError("n_datasets must be 2 or 3")
        for name in ("beta_x_range", "beta_w_range", "delta_range"):
            lo, hi = getattr(self, name)
            if not (lo < hi):
                raise ValidationError(f"{name} must be an ordered (low, high) pair")

    @property
    def gamma_w_value(self) -> float:
        return 1.0 / self.k if self.gamma_w is None else self.gamma_w


@dataclass(frozen=True)
class Replicate:
    """One replication's summary datasets plus ground truth for scoring."""

    datasets: tuple
    true_pleiotropic: tuple
    r2_x: float | None


_PRESETS = {
    1: dict(p=10, k=8, beta_x_range=(0.15, 0.3), beta_w_range=(-0.2, 0.4)),
    2: dict(p=10, k=12, beta_x_range=(0.15, 0.3), beta_w_range=(-0.2, 0.4)),
    3: dict(p=80, k=70, beta_x_range=(0.05, 0.12), beta_w_range=(-0.115, 0.165)),
    4: dict(p=80, k=90, beta_x_range=(0.05, 0.12), beta_w_range=(-0.115, 0.165)),
}


def preset_scenario(scenario_id: int, **overrides) -> ScenarioConfig:
    """Canonical scenario configurations 1-4; keyword overrides applied on top."""
    if scenario_id not in _PRESETS:
        raise ValidationError(f"unknown scenario id {scenario_id!r}; expected 1-4")
    params = dict(_PRESETS[scenario_id])
    params.update(overrides)
    return ScenarioConfig(**params)


def scenario_from_file(path) -> ScenarioConfig:
    """Parse a ``key = value`` config file (``#`` comments) into a config.

    A ``scenario = <1..4>`` line applies a preset first; any other keys
    override its fields.  Range fields take comma-separated pairs.
    """
    path = Path(path)
    entries: dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}: line {line_no} is not 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        entries[key] = value

    def parse(key: str, value: str):
        if key in ("beta_x_range", "beta_w_range", "delta_range"):
            parts = [float(v) for v in value.split(",")]
            if len(parts) != 2:
                raise ValidationError(f"{path}: {key} must be 'low,high'")
            return tuple(parts)
        if key in ("p", "k", "n", "n_pleiotropic", "n_datasets", "rng_seed", "scenario"):
            return int(value)
        if key == "sparsity_regime":
            return value
        if key == "gamma_w" and value.lower() == "none":
            return None
        return float(value)

    parsed = {key: parse(key, value) for key, value in entries.items()}
    scenario_id = parsed.pop("scenario", None)
    valid = set(ScenarioConfig.__dataclass_fields__)
    unknown = set(parsed) - valid
    if unknown:
        raise ValidationError(f"{path}: unknown config key(s) {sorted(unknown)}")
    if scenario_id is not None:
        return preset_scenario(scenario_id, **parsed)
    return ScenarioConfig(**parsed)


def _draw_parameters(cfg: ScenarioConfig, rng: np.random.Generator):
    beta_x = rng.uniform(*cfg.beta_x_range, size=cfg.p)
    beta_w = rng.uniform(*cfg.beta_w_range, size=(cfg.p, cfg.k))
    delta = np.zeros(cfg.k)
    if cfg.sparsity_regime == "outcome_effects":
        delta[: cfg.n_pleiotropic] = rng.uniform(*cfg.delta_range, size=cfg.n_pleiotropic)
    else:
        delta[:] = rng.uniform(*cfg.delta_range, size=cfg.k)
        beta_w[:, cfg.n_pleiotropic:] = 0.0
    return beta_x, beta_w, delta


def _marginal_stats(G: np.ndarray, y: np.ndarray):
    """Per-variant simple-regression slopes and standard errors (with intercept)."""
    n = G.shape[0]
    Gc = G - G.mean(axis=0)
    yc = y - y.mean()
    den = np.einsum("ij,ij->j", Gc, Gc)
    if np.any(den <= 0):
        raise FloatingPointError("zero genotype variance")
    num = Gc.T @ yc
    slope = num / den
    sse = float(yc @ yc) - slope * slope * den
    se = np.sqrt(np.maximum(sse, 0.0) / (n - 2) / den)
    return slope, se


def _marginal_slope_matrix(G: np.ndarray, W: np.ndarray) -> np.ndarray:
    Gc = G - G.mean(axis=0)
    Wc = W - W.mean(axis=0)
    den = np.einsum("ij,ij->j", Gc, Gc)
    return (Gc.T @ Wc) / den[:, None]


def _simulate_sample(cfg: ScenarioConfig, rng: np.random.Generator,
                     beta_x, beta_w, delta, compute_r2: bool):
    """One individual-level sample, reduced to a complete summary dataset."""
    n = cfg.n
    for _ in range(10):
        G = (rng.random((n, cfg.p)) < cfg.maf).astype(float)
        G += rng.random((n, cfg.p)) < cfg.maf
        if np.all(G.var(axis=0) > 0):
            break
    else:
        raise ValidationError("genotype matrix degenerate after 10 redraws")

    U = rng.standard_normal(n)
    X = G @ beta_x + cfg.gamma_x * U + rng.standard_normal(n)
    W = G @ beta_w + cfg.gamma_w_value * U[:, None] + rng.standard_normal((n, cfg.k)) \
        if cfg.k else np.empty((n, 0))
    Y = cfg.theta * X + (W @ delta if cfg.k else 0.0) + cfg.gamma_y * U + rng.standard_normal(n)

    bx_hat, _ = _marginal_stats(G, X)
    by_hat, se_y = _marginal_stats(G, Y)
    bw_hat = _marginal_slope_matrix(G, W) if cfg.k else np.empty((cfg.p, 0))

    r2 = None
    if compute_r2:
        Gc = G - G.mean(axis=0)
        Xc = X - X.mean()
        coef = np.linalg.solve(Gc.T @ Gc, Gc.T @ Xc)
        r2 = float(coef @ (Gc.T @ Xc)) / float(Xc @ Xc)
    return bx_hat, bw_hat, by_hat, se_y, r2


def generate_replicate(cfg: ScenarioConfig, rep_index: int,
                       compute_r2: bool = True) -> Replicate:
    """Generate one replication's datasets, deterministically in (seed, index).

    Dataset 1 provides the risk-factor and covariate associations of the
    analysis dataset, dataset 2 the outcome associations and their standard
    errors; dataset 3 (three-sample designs) is a fresh full sample reduced to
    a complete summary dataset for independent covariate selection.  Each
    returned dataset is itself complete.
    """
    param_rng = np.random.default_rng(
        np.random.SeedSequence(cfg.rng_seed, spawn_key=(rep_index, 0))
    )
    beta_x, beta_w, delta = _draw_parameters(cfg, param_rng)

    variant_ids = tuple(f"g{j + 1}" for j in range(cfg.p))
    cov_names = tuple(f"W{j + 1}" for j in range(cfg.k))

    datasets = []
    r2 = None
    for ds in range(cfg.n_datasets):
        rng = np.random.default_rng(
            np.random.SeedSequence(cfg.rng_seed, spawn_key=(rep_index, 1 + ds))
        )
        want_r2 = compute_r2 and ds == 0
        bx, bw, by, se_y, r2_ds = _simulate_sample(cfg, rng, beta_x, beta_w, delta, want_r2)
        if want_r2:
            r2 = r2_ds
        datasets.append(
            SummaryDataset(
                variant_ids=variant_ids,
                beta_x=bx,
                beta_w=bw,
                beta_y=by,
                se_y=se_y,
                covariate_names=cov_names,
            )
        )

    true_set = cov_names[: cfg.n_pleiotropic]
    return Replicate(datasets=tuple(datasets), true_pleiotropic=true_set, r2_x=r2)


def analysis_dataset(rep: Replicate) -> SummaryDataset:
    """Two-sample composite: exposure-side blocks from dataset 1, outcome from 2."""
    d1, d2 = rep.datasets[0], rep.datasets[1]
    return SummaryDataset(
        variant_ids=d1.variant_ids,
        beta_x=d1.beta_x,
        beta_w=d1.beta_w,
        beta_y=d2.beta_y,
        se_y=d2.se_y,
        covariate_names=d1.covariate_names,
    )


@dataclass(frozen=True)
class MethodSummary:
    method: str
    mean: float
    sd: float
    mean_se: float
    coverage: float
    power: float
    n_used: int
    n_failed: int


@dataclass(frozen=True)
class SimulationReport:
    """Per-method aggregates over replications, plus the scenario echo."""

    rows: tuple
    n_reps: int
    scenario: ScenarioConfig

    def row(self, method: str) -> MethodSummary:
        for row in self.rows:
            if row.method == method:
                return row
        raise KeyError(method)

    def to_csv(self, path) -> None:
        def fmt(v: float) -> str:
            return "" if not np.isfinite(v) else repr(float(v))

        lines = ["method,mean,sd,mean_se,coverage,power"]
        for row in self.rows:
            lines.append(
                f"{row.method},{fmt(row.mean)},{fmt(row.sd)},{fmt(row.mean_se)},"
                f"{fmt(row.coverage)},{fmt(row.power)}"
            )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def metadata(self) -> dict:
        return {
            "n_reps": self.n_reps,
            "scenario": asdict(self.scenario),
            "failures": {row.method: row.n_failed for row in self.rows},
        }


def _validate_methods(cfg: ScenarioConfig, methods: Sequence[str]) -> tuple:
    methods = tuple(methods)
    if not methods:
        raise ValidationError("at least one method is required")
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise ValidationError(f"unknown method(s) {sorted(unknown)}; valid: {ALL_METHODS}")
    if "mv_all" in methods and cfg.p < cfg.k + 2:
        raise ValidationError("mv_all requires p >= k + 2")
    if any(m.startswith("three_sample") for m in methods) and cfg.n_datasets != 3:
        raise ValidationError("three-sample methods require n_datasets = 3")
    needs_cov = set(methods) - {"ivw"}
    if needs_cov and cfg.k < 1:
        raise ValidationError(f"methods {sorted(needs_cov)} require k >= 1")
    return methods


def _cv_seed(cfg: ScenarioConfig, rep_index: int, stream: int) -> int:
    ss = np.random.SeedSequence(cfg.rng_seed, spawn_key=(rep_index, 100 + stream))
    return int(ss.generate_state(1)[0])


def _run_replicate(cfg: ScenarioConfig, methods: tuple, cv: CvConfig, rep_index: int):
    rep = generate_replicate(cfg, rep_index, compute_r2=False)
    d = analysis_dataset(rep)

    results: dict[str, tuple | None] = {}

    def record(method, estimate):
        results[method] = (
            estimate.theta_hat,
            estimate.se_theta,
            estimate.ci_low,
            estimate.ci_high,
        )

    def attempt(method, func):
        if method not in methods:
            return
        try:
            record(method, func())
        except PleiomrError:
            results[method] = None

    attempt("ivw", lambda: ivw(d))
    attempt("mv_all", lambda: mv_ivw(d))
    attempt("oracle", lambda: oracle_ci(d, rep.true_pleiotropic).estimate)

    if {"reg", "post_reg", "two_sample_a"} & set(methods):
        cfg_a = replace(cv, target="mse", rng_seed=_cv_seed(cfg, rep_index, 0))
        try:
            fit = cross_validate(d, cfg_a)
            if "reg" in methods:
                record("reg", regularized_estimate(d, fit))
            if "post_reg" in methods or "two_sample_a" in methods:
                est = post_regularization(d, fit)
                if "post_reg" in methods:
                    record("post_reg", est)
                if "two_sample_a" in methods:
                    record("two_sample_a", est)
        except PleiomrError:
            for m in ("reg", "post_reg", "two_sample_a"):
                if m in methods:
                    results[m] = None

    attempt(
        "two_sample_b",
        lambda: two_sample_ci(
            d, replace(cv, target="projected", rng_seed=_cv_seed(cfg, rep_index, 1))
        ).estimate,
    )
    if {"three_sample_a", "three_sample_b"} & set(methods):
        d_sel = rep.datasets[2]
        attempt(
            "three_sample_a",
            lambda: three_sample_ci(
                d_sel, d, replace(cv, target="mse", rng_seed=_cv_seed(cfg, rep_index, 2))
            ).estimate,
        )
        attempt(
            "three_sample_b",
            lambda: three_sample_ci(
                d_sel, d,
                replace(cv, target="projected", rng_seed=_cv_seed(cfg, rep_index, 3)),
            ).estimate,
        )
    attempt(
        "double_est",
        lambda: double_estimation_ci(
            d, replace(cv, target="mse", rng_seed=_cv_seed(cfg, rep_index, 4))
        ).estimate,
    )
    return results


def run_study(cfg: ScenarioConfig, methods: Sequence[str], n_reps: int,
              cv: CvConfig | None = None, n_jobs: int = 1) -> SimulationReport:
    """Run the Monte Carlo study and aggregate per-method performance.

    Replications where a method errors are dropped for that method only, with
    counts reported.  Output is a pure function of (cfg, methods, n_reps, cv)
    regardless of ``n_jobs``.
    """
    if n_reps < 1:
        raise ValidationError("n_reps must be at least 1")
    methods = _validate_methods(cfg, methods)
    cv = cv or CvConfig()

    if n_jobs == 1:
        all_results = [_run_replicate(cfg, methods, cv, i) for i in range(n_reps)]
    else:
        all_results = Parallel(n_jobs=n_jobs)(
            delayed(_run_replicate)(cfg, methods, cv, i) for i in range(n_reps)
        )

    rows = []
    for method in methods:
        vals = [res[method] for res in all_results if res.get(method) is not None]
        n_failed = sum(1 for res in all_results if res.get(method) is None)
        if not vals:
            rows.append(MethodSummary(method, *(float("nan"),) * 5, 0, n_failed))
            continue
        theta = np.array([v[0] for v in vals])
        se = np.array([v[1] for v in vals])
        lo = np.array([v[2] for v in vals])
        hi = np.array([v[3] for v in vals])
        have_ci = np.isfinite(lo) & np.isfinite(hi)
        if np.any(have_ci):
            coverage = float(np.mean((lo[have_ci] <= cfg.theta) & (cfg.theta <= hi[have_ci])))
            power = float(np.mean((lo[have_ci] > 0) | (hi[have_ci] < 0)))
            mean_se = float(np.mean(se[np.isfinite(se)])) if np.any(np.isfinite(se)) else float("nan")
        else:
            coverage = power = mean_se = float("nan")
        rows.append(
            MethodSummary(
                method=method,
                mean=float(theta.mean()),
                sd=float(theta.std(ddof=1)) if theta.size > 1 else 0.0,
                mean_se=mean_se,
                coverage=coverage,
                power=power,
                n_used=int(theta.size),
                n_failed=n_failed,
            )
        )
    return SimulationReport(rows=tuple(rows), n_reps=n_reps, scenario=cfg)
