"""Dataset container, CSV round trip and validation behavior."""

import numpy as np
import pytest

from pleiomr import (
    SummaryDataset,
    ValidationError,
    load_summary_csv,
    save_summary_csv,
    subset_covariates,
    subset_variants,
    weights,
)

from conftest import random_dataset


def test_shapes_and_properties(small_dataset):
    d = small_dataset
    assert d.p == 20 and d.k == 5
    assert d.beta_w.shape == (20, 5)
    assert len(d.variant_ids) == 20
    assert len(d.covariate_names) == 5


def test_arrays_are_immutable(small_dataset):
    with pytest.raises(ValueError):
        small_dataset.beta_x[0] = 1.0
    with pytest.raises(ValueError):
        small_dataset.beta_w[0, 0] = 1.0


def test_zero_covariate_dataset():
    d = SummaryDataset(
        variant_ids=("a", "b"),
        beta_x=[0.1, 0.2],
        beta_w=np.empty((2, 0)),
        beta_y=[0.02, 0.04],
        se_y=[0.01, 0.01],
        covariate_names=(),
    )
    assert d.k == 0 and d.beta_w.shape == (2, 0)


@pytest.mark.parametrize(
    "patch",
    [
        dict(se_y=[0.01, 0.0]),
        dict(se_y=[0.01, -0.1]),
        dict(beta_x=[0.1, np.nan]),
        dict(beta_y=[np.inf, 0.1]),
        dict(covariate_names=("W1", "W1")),
        dict(beta_w=np.zeros((3, 1))),
    ],
)
def test_validation_rejects_bad_inputs(patch):
    base = dict(
        variant_ids=("a", "b"),
        beta_x=[0.1, 0.2],
        beta_w=np.zeros((2, 1)),
        beta_y=[0.02, 0.04],
        se_y=[0.01, 0.01],
        covariate_names=("W1",),
    )
    if "covariate_names" in patch:
        base["beta_w"] = np.zeros((2, 2))
    base.update(patch)
    with pytest.raises(ValidationError):
        SummaryDataset(**base)


def test_weights_are_inverse_variance(small_dataset):
    w = weights(small_dataset)
    np.testing.assert_allclose(w.w, small_dataset.se_y ** -2.0)


def test_csv_roundtrip_is_exact(tmp_path, rng):
    d = random_dataset(rng, p=12, k=3)
    path = tmp_path / "data.csv"
    save_summary_csv(d, path)
    loaded = load_summary_csv(path)
    assert loaded.equals(d)


def test_csv_extra_se_columns_ignored(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text(
        "variant_id,beta_x,se_x,beta_w_A,se_A,beta_y,se_y\n"
        "v1,0.1,0.01,0.2,0.03,0.02,0.01\n"
        "v2,0.2,0.01,0.1,0.03,0.05,0.02\n",
        encoding="utf-8",
    )
    d = load_summary_csv(path)
    assert d.covariate_names == ("A",)
    assert d.p == 2


@pytest.mark.parametrize(
    "content,fragment",
    [
        ("", "empty file"),
        ("variant_id,beta_x,beta_y,se_y\nv1,0.1,0.2,0.01\n", "at least 2"),
        ("variant_id,beta_x,beta_y\nv1,0.1,0.2\nv2,0.2,0.3\n", "missing required"),
        (
            "variant_id,beta_x,beta_y,se_y\nv1,0.1,0.2,0.01\nv2,x,0.3,0.01\n",
            "non-numeric",
        ),
        (
            "variant_id,beta_x,beta_y,se_y\nv1,0.1,0.2,0.01\nv2,0.2,0.3,-1\n",
            "se_y must be > 0",
        ),
        (
            "variant_id,beta_x,beta_x,beta_y,se_y\nv1,0.1,0.1,0.2,0.01\n",
            "duplicate column",
        ),
        (
            "variant_id,beta_x,mystery,beta_y,se_y\nv1,0.1,0.1,0.2,0.01\n",
            "unrecognized column",
        ),
        (
            "variant_id,beta_x,beta_y,se_y\nv1,0.1,0.2,0.01\nv2,0.2,,0.01\n",
            "empty cell",
        ),
    ],
)
def test_csv_rejections(tmp_path, content, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(ValidationError, match=fragment):
        load_summary_csv(path)


def test_subset_variants(rng):
    d = random_dataset(rng, p=10, k=2)
    sub = subset_variants(d, [3, 5, 7])
    assert sub.p == 3
    assert sub.variant_ids == tuple(d.variant_ids[i] for i in (3, 5, 7))
    np.testing.assert_array_equal(sub.beta_w, d.beta_w[[3, 5, 7]])
    with pytest.raises(ValidationError):
        subset_variants(d, [])
    with pytest.raises(ValidationError):
        subset_variants(d, [99])


def test_subset_covariates_preserves_order(rng):
    d = random_dataset(rng, p=10, k=4)
    sub = subset_covariates(d, {"W3", "W1"})
    assert sub.covariate_names == ("W1", "W3")
    np.testing.assert_array_equal(sub.beta_w, d.beta_w[:, [0, 2]])
    with pytest.raises(ValidationError):
        subset_covariates(d, ["nope"])
