"""Summarized genetic-association data: the model's sole analysis input.

A :class:`SummaryDataset` holds per-variant association estimates with the
risk factor (``beta_x``), with each of ``k`` potential pleiotropic covariates
(``beta_w``, a ``p x k`` matrix) and with the outcome (``beta_y``), plus the
standard errors of the outcome associations (``se_y``).  Inverse-variance
weights ``1 / se_y**2`` are always derived on demand, never stored.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ValidationError

__all__ = [
    "SummaryDataset",
    "WeightVector",
    "load_summary_csv",
    "save_summary_csv",
    "weights",
    "subset_variants",
    "subset_covariates",
]


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValidationError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SummaryDataset:
    """Immutable container of per-variant GWAS summary statistics.

    Attributes
    ----------
    variant_ids : tuple of str, length p
    beta_x : array (p,) -- variant-risk factor association estimates
    beta_w : array (p, k) -- variant-covariate association estimates, k >= 0
    beta_y : array (p,) -- variant-outcome association estimates
    se_y : array (p,) -- standard errors of beta_y, strictly positive
    covariate_names : tuple of str, length k
    """

    variant_ids: tuple
    beta_x: np.ndarray
    beta_w: np.ndarray
    beta_y: np.ndarray
    se_y: np.ndarray
    covariate_names: tuple

    def __post_init__(self):
        object.__setattr__(self, "variant_ids", tuple(str(v) for v in self.variant_ids))
        object.__setattr__(self, "covariate_names", tuple(str(c) for c in self.covariate_names))
        object.__setattr__(self, "beta_x", _frozen_array(self.beta_x, 1))
        object.__setattr__(self, "beta_y", _frozen_array(self.beta_y, 1))
        object.__setattr__(self, "se_y", _frozen_array(self.se_y, 1))
        beta_w = np.array(self.beta_w, dtype=float)
        if beta_w.size == 0:
            beta_w = beta_w.reshape(len(self.variant_ids), 0)
        if beta_w.ndim != 2:
            raise ValidationError(f"beta_w must be 2-dimensional, got shape {beta_w.shape}")
        beta_w.setflags(write=False)
        object.__setattr__(self, "beta_w", beta_w)

        p = len(self.variant_ids)
        k = len(self.covariate_names)
        if p < 1:
            raise ValidationError("at least one variant is required")
        for name, arr in (("beta_x", self.beta_x), ("beta_y", self.beta_y), ("se_y", self.se_y)):
            if arr.shape != (p,):
                raise ValidationError(f"{name} has shape {arr.shape}, expected ({p},)")
        if self.beta_w.shape != (p, k):
            raise ValidationError(
                f"beta_w has shape {self.beta_w.shape}, expected ({p}, {k})"
            )
        if len(set(self.covariate_names)) != k:
            raise ValidationError("covariate names must be unique")
        for name, arr in (
            ("beta_x", self.beta_x),
            ("beta_w", self.beta_w),
            ("beta_y", self.beta_y),
            ("se_y", self.se_y),
        ):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite values")
        bad = np.flatnonzero(self.se_y <= 0)
        if bad.size:
            raise ValidationError(f"se_y must be strictly positive (variant index {bad[0]})")

    @property
    def p(self) -> int:
        return len(self.variant_ids)

    @property
    def k(self) -> int:
        return len(self.covariate_names)

    def equals(self, other: "SummaryDataset") -> bool:
        return (
            self.variant_ids == other.variant_ids
            and self.covariate_names == other.covariate_names
            and np.array_equal(self.beta_x, other.beta_x)
            and np.array_equal(self.beta_w, other.beta_w)
            and np.array_equal(self.beta_y, other.beta_y)
            and np.array_equal(self.se_y, other.se_y)
        )


@dataclass(frozen=True)
class WeightVector:
    """Inverse-variance weights, w[j] = se_y[j] ** -2."""

    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen_array(self.w, 1))
        if not np.all(np.isfinite(self.w)) or np.any(self.w <= 0):
            raise ValidationError("weights must be positive and finite")


def weights(d: SummaryDataset) -> WeightVector:
    """Inverse-variance weights derived from the outcome standard errors."""
    return WeightVector(d.se_y ** -2.0)


_FIXED_LEADING = ("variant_id", "beta_x")
_FIXED_TRAILING = ("beta_y", "se_y")
_COVARIATE_PREFIX = "beta_w_"


def load_summary_csv(path) -> SummaryDataset:
    """Read a summary dataset from CSV.

    Expected header: ``variant_id,beta_x,beta_w_<name>...,beta_y,se_y``.
    Columns prefixed ``se_`` other than ``se_y`` are silently ignored so that
    raw GWAS exports load without preprocessing.  Empty or non-numeric cells,
    non-positive ``se_y`` and files with fewer than two data rows are rejected
    with the offending row and column named.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]

        seen: dict[str, int] = {}
        for col in header:
            if col in seen and not (col.startswith("se_") and col != "se_y"):
                raise ValidationError(f"{path}: duplicate column '{col}'")
            seen[col] = seen.get(col, 0) + 1

        keep_idx: list[int] = []
        covariates: list[str] = []
        for idx, col in enumerate(header):
            if col in _FIXED_LEADING or col in _FIXED_TRAILING:
                keep_idx.append(idx)
            elif col.startswith(_COVARIATE_PREFIX):
                covariates.append(col[len(_COVARIATE_PREFIX):])
                keep_idx.append(idx)
            elif col.startswith("se_"):
                continue  # extra standard-error columns are ignored
            else:
                raise ValidationError(f"{path}: unrecognized column '{col}'")
        for required in _FIXED_LEADING + _FIXED_TRAILING:
            if required not in header:
                raise ValidationError(f"{path}: missing required column '{required}'")
        if len(set(covariates)) != len(covariates):
            raise ValidationError(f"{path}: duplicate covariate column")

        col_of = {header[i]: i for i in keep_idx if not header[i].startswith(_COVARIATE_PREFIX)}
        cov_cols = [i for i in keep_idx if header[i].startswith(_COVARIATE_PREFIX)]

        variant_ids: list[str] = []
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}: row {line_no} has {len(row)} cells, expected {len(header)}"
                )
            variant_ids.append(row[col_of["variant_id"]].strip())
            parsed: list[float] = []
            for idx in [col_of["beta_x"], *cov_cols, col_of["beta_y"], col_of["se_y"]]:
                cell = row[idx].strip()
                if cell == "":
                    raise ValidationError(
                        f"{path}: empty cell at row {line_no}, column '{header[idx]}'"
                    )
                try:
                    value = float(cell)
                except ValueError:
                    raise ValidationError(
                        f"{path}: non-numeric cell '{cell}' at row {line_no}, "
                        f"column '{header[idx]}'"
                    ) from None
                if not np.isfinite(value):
                    raise ValidationError(
                        f"{path}: non-finite value at row {line_no}, column '{header[idx]}'"
                    )
                parsed.append(value)
            if parsed[-1] <= 0:
                raise ValidationError(
                    f"{path}: se_y must be > 0 at row {line_no}"
                )
            rows.append(parsed)

    if len(rows) < 2:
        raise ValidationError(f"{path}: at least 2 variants required, found {len(rows)}")

    data = np.asarray(rows, dtype=float)
    k = len(covariates)
    return SummaryDataset(
        variant_ids=tuple(variant_ids),
        beta_x=data[:, 0],
        beta_w=data[:, 1 : 1 + k],
        beta_y=data[:, 1 + k],
        se_y=data[:, 2 + k],
        covariate_names=tuple(covariates),
    )


def save_summary_csv(d: SummaryDataset, path) -> None:
    """Write a dataset to CSV with full round-trip precision."""
    path = Path(path)
    header = ["variant_id", "beta_x"]
    header += [f"{_COVARIATE_PREFIX}{name}" for name in d.covariate_names]
    header += ["beta_y", "se_y"]
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for j in range(d.p):
            row = [d.variant_ids[j], repr(float(d.beta_x[j]))]
            row += [repr(float(v)) for v in d.beta_w[j]]
            row += [repr(float(d.beta_y[j])), repr(float(d.se_y[j]))]
            writer.writerow(row)


def subset_variants(d: SummaryDataset, indices: Sequence[int]) -> SummaryDataset:
    """Restrict the dataset to the listed variants (covariates unchanged)."""
    idx = np.asarray(list(indices), dtype=int)
    if idx.size == 0:
        raise ValidationError("variant index set must be non-empty")
    if np.any(idx < 0) or np.any(idx >= d.p):
        raise ValidationError(f"variant indices out of range [0, {d.p})")
    return SummaryDataset(
        variant_ids=tuple(d.variant_ids[i] for i in idx),
        beta_x=d.beta_x[idx],
        beta_w=d.beta_w[idx, :],
        beta_y=d.beta_y[idx],
        se_y=d.se_y[idx],
        covariate_names=d.covariate_names,
    )


def subset_covariates(d: SummaryDataset, names: Iterable[str]) -> SummaryDataset:
    """Restrict ``beta_w`` to the named covariates, original order preserved."""
    wanted = set(names)
    unknown = wanted - set(d.covariate_names)
    if unknown:
        raise ValidationError(f"unknown covariate name(s): {sorted(unknown)}")
    keep = [i for i, name in enumerate(d.covariate_names) if name in wanted]
    return SummaryDataset(
        variant_ids=d.variant_ids,
        beta_x=d.beta_x,
        beta_w=d.beta_w[:, keep],
        beta_y=d.beta_y,
        se_y=d.se_y,
        covariate_names=tuple(d.covariate_names[i] for i in keep),
    )
