"""Shared fixtures: canonical models and seeded series reused across modules."""

import numpy as np
import pytest

import inarboot as ib


@pytest.fixture(scope="session")
def poi_model():
    return ib.InarModel((0.5,), ib.poisson_pmf(1.0))


@pytest.fixture(scope="session")
def poi_series(poi_model):
    """Seeded Poi(1)-INAR(1) sample, n=500."""
    return ib.simulate_inar(poi_model, 500, 500, ib.SeedSpec(12345))


@pytest.fixture(scope="session")
def poi_fit(poi_series):
    return ib.npmle_fit(poi_series, 1)


def random_small_model(rng, p=None, max_support=6):
    """Random tiny model for kernel property tests: p <= 2, finite support."""
    p = p or int(rng.integers(1, 3))
    alphas = rng.uniform(0.05, 0.45, size=p)
    width = int(rng.integers(2, max_support + 1))
    weights = rng.uniform(0.05, 1.0, size=width)
    return ib.InarModel(tuple(alphas), ib.explicit_pmf(weights))


def random_series_for(model, rng, n_body=30):
    """Short series simulated from the model (valid presample convention)."""
    return ib.simulate_inar(model, n_body, 50, ib.SeedSpec(int(rng.integers(0, 2**32))))
