"""Shared fixtures and dataset builders for the test suite."""

import numpy as np
import pytest

from pleiomr import SummaryDataset


def random_dataset(rng: np.random.Generator, p: int, k: int,
                   theta: float = 0.2, n_active: int | None = None) -> SummaryDataset:
    """A structurally plausible random summary dataset.

    The outcome associations follow the linear model
    ``beta_y = theta*beta_x + beta_w@delta + noise`` with ``n_active``
    covariates carrying nonzero delta (default: about half).
    """
    beta_x = rng.uniform(0.1, 0.4, size=p)
    beta_w = rng.normal(0.0, 0.2, size=(p, k))
    delta = np.zeros(k)
    if n_active is None:
        n_active = k // 2
    if n_active:
        delta[:n_active] = rng.uniform(-0.2, 0.3, size=n_active)
    se_y = rng.uniform(0.01, 0.05, size=p)
    beta_y = theta * beta_x + (beta_w @ delta if k else 0.0) + rng.normal(0, 1, p) * se_y
    return SummaryDataset(
        variant_ids=tuple(f"rs{j}" for j in range(p)),
        beta_x=beta_x,
        beta_w=beta_w,
        beta_y=beta_y,
        se_y=se_y,
        covariate_names=tuple(f"W{j + 1}" for j in range(k)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_dataset(rng):
    return random_dataset(rng, p=20, k=5)
