import numpy as np
import pytest

from epsconvex.geometry import SpaceParams


def random_point(space, rng, scale=1.5):
    return space.exp(space.origin(), space.proj_tangent(space.origin(),
                     np.concatenate([[0.0], rng.normal(scale=scale / space.a, size=space.m)])))


def random_tangent(space, x, rng, scale=1.0):
    return rng.normal(scale=scale / space.a, size=space.m) @ space.tangent_frame(x)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def plane():
    return SpaceParams(2, 1.0)
