import numpy as np
import pytest
from hypothesis import settings

from bregman_ep.legendre import NegativeEntropy, PNorm, QuadraticForm, SquaredNorm
from bregman_ep.rng import SplitMix64

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

KIND_IDS = ["squared", "quadratic", "p1.5", "p3", "entropy"]


def make_kinds(d, seed=0):
    rng = SplitMix64(seed + 17)
    M = rng.normal((d, d))
    return [SquaredNorm(), QuadraticForm(M @ M.T + d * np.eye(d)), PNorm(1.5), PNorm(3.0),
            NegativeEntropy()]


def interior(f, rng, n, d):
    if isinstance(f, NegativeEntropy):
        return rng.uniform((n, d), 0.05, 3.0)
    return rng.uniform((n, d), -3.0, 3.0)


@pytest.fixture
def rng():
    return SplitMix64(20240611)


@pytest.fixture(params=range(5), ids=KIND_IDS)
def kind3(request):
    return make_kinds(3)[request.param]
