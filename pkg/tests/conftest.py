"""Shared fixtures and instance generators."""

import numpy as np
import pytest

from ancovalab import DesignSpec, DgpSpec, unit_variance_covariates


def random_regression_instance(rng, n=None, k=None):
    """One well-conditioned (y, z, x) triple with continuous z."""
    n = n if n is not None else int(rng.integers(10, 61))
    k = k if k is not None else int(rng.integers(1, 5))
    x = rng.standard_normal((n, k))
    z = rng.standard_normal(n) + x @ rng.standard_normal(k) * 0.5
    y = rng.standard_normal(n) + z * rng.normal() + x @ rng.standard_normal(k)
    return y, z, x


def random_experiment_instance(rng, n=None, k=None):
    """One (y, z, x) triple with a binary completely randomized z."""
    n = n if n is not None else int(rng.integers(10, 61))
    k = k if k is not None else int(rng.integers(1, 4))
    x = rng.standard_normal((n, k))
    n1 = int(rng.integers(2, n - 1))
    z = np.zeros(n)
    z[rng.permutation(n)[:n1]] = 1
    y = 0.3 + 1.5 * z + x @ rng.standard_normal(k) + rng.standard_normal(n)
    return y, z, x


@pytest.fixture(scope="session")
def default_spec():
    """The laboratory's reference scenario: n=100, two unit-variance covariates."""
    x = unit_variance_covariates(100, 2, 7)
    return DgpSpec(
        x=x,
        alpha=0.0,
        tau=1.0,
        beta=np.array([1.0, 0.5]),
        sigma=1.0,
        design=DesignSpec.complete(100, 50),
    )


@pytest.fixture(scope="session")
def small_spec():
    """A fast scenario for loops that only need qualitative behavior."""
    x = unit_variance_covariates(30, 1, 5)
    return DgpSpec(
        x=x,
        alpha=0.5,
        tau=2.0,
        beta=np.array([1.0]),
        sigma=1.0,
        design=DesignSpec.complete(30, 15),
    )
