"""Command-line front end.

Subcommands: ``estimate`` (point estimation and intervals), ``path`` (lambda
path export), ``balance`` (covariate-balancing diagnostics) and ``simulate``
(Monte Carlo study reproduction).  Every command writes a run manifest next
to its output so results can be reproduced byte-identically.

Exit codes: 0 success, 2 usage or input validation failure, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .data import load_summary_csv
from .estimators import balancing_estimate, balance_diagnostic, ivw, mv_ivw
from .exceptions import NumericalError, PleiomrError, ValidationError
from .inference import double_estimation_ci, three_sample_ci, two_sample_ci
from .regularize import CvConfig, cross_validate, fit_to_csv, regularized_estimate
from .simulate import ALL_METHODS, preset_scenario, run_study, scenario_from_file

__all__ = ["main", "entry_point"]


def _write_manifest(out_path: Path, command: str, args: argparse.Namespace,
                    inputs: list, seed, t0: float) -> None:
    manifest = {
        "command": command,
        "argv": sys.argv[1:] if sys.argv else [],
        "options": {k: v for k, v in vars(args).items() if k != "func"},
        "inputs": [str(p) for p in inputs],
        "seed": seed,
        "version": __version__,
        "wall_time_s": round(time.monotonic() - t0, 6),
        "output": str(out_path),
    }
    manifest_path = out_path.with_name(out_path.stem + "_manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _cv_config(args) -> CvConfig:
    return CvConfig(
        n_folds=args.folds,
        n_lambda=args.n_lambda,
        lambda_min_ratio=args.lambda_min_ratio,
        target=args.cv_target,
        n_repeats=args.repeats,
        rng_seed=args.seed,
        standardize=not args.no_standardize,
    )


def _add_cv_options(parser) -> None:
    parser.add_argument("--cv-target", choices=("mse", "projected"), default="mse")
    parser.add_argument("--folds", type=int, default=10)
    parser.add_argument("--repeats", type=int, default=1)
    parser.add_argument("--n-lambda", type=int, default=100)
    parser.add_argument("--lambda-min-ratio", type=float, default=1e-4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--no-standardize", action="store_true",
                        help="penalize on the raw coefficient scale")


def _fit_payload(fit) -> dict:
    return {
        "lambdas": [float(v) for v in fit.lambdas],
        "theta_path": [float(v) for v in fit.theta_path],
        "delta_path": [[float(v) for v in row] for row in fit.delta_path],
        "active_sets": [list(s) for s in fit.active_sets],
        "cv_curve": None if fit.cv_curve is None else [float(v) for v in fit.cv_curve],
        "chosen_lambda": fit.chosen_lambda,
        "cv_target": fit.cv_target,
        "chosen_active": list(fit.chosen_active or ()),
        "covariate_names": list(fit.covariate_names),
    }


def cmd_estimate(args) -> int:
    t0 = time.monotonic()
    d = load_summary_csv(args.data)
    inputs = [args.data]
    fit_payload = None
    selection = None

    if args.select_data and args.method != "post-reg":
        raise ValidationError("--select-data is only supported with --method post-reg")

    if args.method == "ivw":
        est = ivw(d)
    elif args.method == "mv-all":
        est = mv_ivw(d)
    elif args.method == "balance":
        est = balancing_estimate(d)
    elif args.method == "reg":
        fit = cross_validate(d, _cv_config(args))
        est = regularized_estimate(d, fit)
        fit_payload = _fit_payload(fit)
        selection = list(fit.chosen_active)
    elif args.method == "post-reg":
        if args.select_data:
            inputs.append(args.select_data)
            d_sel = load_summary_csv(args.select_data)
            result = three_sample_ci(d_sel, d, _cv_config(args))
        else:
            result = two_sample_ci(d, _cv_config(args))
        est = result.estimate
        selection = list(result.selection_set)
    elif args.method == "double-est":
        result = double_estimation_ci(d, _cv_config(args))
        est = result.estimate
        selection = list(result.selection_set)
    else:  # pragma: no cover - argparse restricts choices
        raise ValidationError(f"unknown method {args.method!r}")

    def show(v):
        return "n/a" if not np.isfinite(v) else f"{v:.6g}"

    print(f"method:      {est.method_tag}")
    print(f"estimate:    {est.theta_hat:.6g}")
    print(f"se:          {show(est.se_theta)}")
    print(f"95% CI:      ({show(est.ci_low)}, {show(est.ci_high)})")
    print(f"dispersion:  {show(est.dispersion)}")
    print(f"covariates:  {', '.join(est.covariates_used) or '(none)'}")

    out = Path(args.out)
    payload = {
        "method": est.method_tag,
        "theta_hat": est.theta_hat,
        "delta_hat": [float(v) for v in est.delta_hat],
        "se_theta": None if not np.isfinite(est.se_theta) else est.se_theta,
        "ci": None if not np.isfinite(est.se_theta) else [est.ci_low, est.ci_high],
        "dispersion": None if not np.isfinite(est.dispersion) else est.dispersion,
        "covariates_used": list(est.covariates_used),
        "selection_set": selection,
        "fit": fit_payload,
    }
    out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    _write_manifest(out, "estimate", args, inputs, args.seed, t0)
    return 0


def cmd_path(args) -> int:
    t0 = time.monotonic()
    d = load_summary_csv(args.data)
    fit = cross_validate(d, _cv_config(args))
    out = Path(args.out)
    fit_to_csv(fit, out)
    _write_manifest(out, "path", args, [args.data], args.seed, t0)
    print(f"wrote {len(fit.lambdas)} path rows to {out}")
    return 0


def _parse_set_spec(spec: str, covariate_names) -> tuple:
    if spec == "none":
        return ()
    if spec == "all":
        return tuple(covariate_names)
    return tuple(name.strip() for name in spec.split(",") if name.strip())


def cmd_balance(args) -> int:
    t0 = time.monotonic()
    d = load_summary_csv(args.data)
    import csv

    out = Path(args.out)
    with out.open("w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["set_label", "trait", "correlation"])
        for spec in args.sets:
            names = _parse_set_spec(spec, d.covariate_names)
            diag = balance_diagnostic(d, names, scaled=not args.raw_scale)
            for trait, corr in zip(diag.trait_names, diag.correlations):
                writer.writerow([spec, trait, repr(float(corr))])
    _write_manifest(out, "balance", args, [args.data], None, t0)
    print(f"wrote balance diagnostics for {len(args.sets)} set(s) to {out}")
    return 0


def cmd_simulate(args) -> int:
    t0 = time.monotonic()
    if (args.scenario is None) == (args.config is None):
        raise ValidationError("exactly one of --scenario or --config is required")
    if args.reps < 1:
        raise ValidationError("--reps must be at least 1")

    overrides = {}
    if args.theta is not None:
        overrides["theta"] = args.theta
    if args.n_pleio is not None:
        overrides["n_pleiotropic"] = args.n_pleio
    if args.regime is not None:
        overrides["sparsity_regime"] = args.regime
    if args.n is not None:
        overrides["n"] = args.n
    if args.n_datasets is not None:
        overrides["n_datasets"] = args.n_datasets
    overrides["rng_seed"] = args.seed

    if args.scenario is not None:
        cfg = preset_scenario(args.scenario, **overrides)
        inputs = []
    else:
        cfg = replace(scenario_from_file(args.config), **overrides)
        inputs = [args.config]

    if args.methods:
        methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    else:
        methods = ("ivw", "reg", "post_reg", "mv_all", "oracle")
        if cfg.p < cfg.k + 2:
            methods = tuple(m for m in methods if m != "mv_all")

    cv = CvConfig(
        n_folds=args.folds,
        n_lambda=args.n_lambda,
        lambda_min_ratio=args.lambda_min_ratio,
        n_repeats=args.repeats,
    )
    report = run_study(cfg, methods, args.reps, cv=cv, n_jobs=args.threads)
    out = Path(args.out)
    report.to_csv(out)
    meta = report.metadata()
    meta["version"] = __version__
    meta["wall_time_s"] = round(time.monotonic() - t0, 6)
    out.with_name(out.stem + "_meta.json").write_text(
        json.dumps(meta, indent=2) + "\n", encoding="utf-8"
    )
    _write_manifest(out, "simulate", args, inputs, args.seed, t0)
    print(f"wrote report for {len(methods)} method(s) x {args.reps} reps to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pleiomr",
        description="Pleiotropy-robust Mendelian randomization from GWAS summary data",
    )
    parser.add_argument("--version", action="version", version=f"pleiomr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate the causal effect from a summary CSV")
    est.add_argument("--data", required=True, help="summary dataset CSV")
    est.add_argument(
        "--method", required=True,
        choices=("ivw", "mv-all", "reg", "post-reg", "balance", "double-est"),
    )
    est.add_argument("--select-data", default=None,
                     help="independent selection dataset (three-sample flow, post-reg only)")
    est.add_argument("--out", default="estimate.json", help="machine-readable output path")
    _add_cv_options(est)
    est.set_defaults(func=cmd_estimate)

    path = sub.add_parser("path", help="export the regularization path as CSV")
    path.add_argument("--data", required=True)
    path.add_argument("--out", default="path.csv")
    _add_cv_options(path)
    path.set_defaults(func=cmd_path)

    bal = sub.add_parser("balance", help="covariate balancing diagnostics")
    bal.add_argument("--data", required=True)
    bal.add_argument(
        "--sets", nargs="+", required=True,
        help="covariate sets: 'none', 'all', or comma-separated names",
    )
    bal.add_argument("--raw-scale", action="store_true",
                     help="correlate raw associations instead of SE-scaled ones")
    bal.add_argument("--out", default="balance.csv")
    bal.set_defaults(func=cmd_balance)

    sim = sub.add_parser("simulate", help="run a Monte Carlo study")
    sim.add_argument("--scenario", type=int, choices=(1, 2, 3, 4))
    sim.add_argument("--config", default=None, help="key = value scenario config file")
    sim.add_argument("--theta", type=float, default=None)
    sim.add_argument("--n-pleio", type=int, default=None)
    sim.add_argument("--regime", choices=("outcome_effects", "variant_effects"), default=None)
    sim.add_argument("--n", type=int, default=None, help="individuals per dataset")
    sim.add_argument("--n-datasets", type=int, choices=(2, 3), default=None)
    sim.add_argument("--reps", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--methods", default=None, help=f"comma list from {ALL_METHODS}")
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--folds", type=int, default=10)
    sim.add_argument("--repeats", type=int, default=1)
    sim.add_argument("--n-lambda", type=int, default=100)
    sim.add_argument("--lambda-min-ratio", type=float, default=1e-4)
    sim.add_argument("--out", default="simulation_report.csv")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except PleiomrError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:  # pragma: no cover - console script shim
    raise SystemExit(main())
