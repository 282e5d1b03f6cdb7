"""Shared fixtures: dense samples are expensive, build them once per session."""

import pytest

from mcslab import (
    connectivity_radius,
    make_circle,
    make_complex_exponential,
    sample_manifold,
)


def dense_sample(model, count):
    return sample_manifold(model, count, connectivity_radius(model, count))


@pytest.fixture(scope="session")
def circle_model():
    return make_circle(1.0, 3)


@pytest.fixture(scope="session")
def circle_2000(circle_model):
    return dense_sample(circle_model, 2000)


@pytest.fixture(scope="session")
def circle_400(circle_model):
    return dense_sample(circle_model, 400)


@pytest.fixture(scope="session")
def cexp3_2000():
    return dense_sample(make_complex_exponential(3), 2000)
