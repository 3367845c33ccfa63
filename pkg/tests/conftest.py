import math

import numpy as np
import pytest

from periodlab import families, operators as ops
from periodlab.potential import PotentialCenter


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def power_center_02():
    return families.power_center(families.PowerParams(0.0, 2.0))


@pytest.fixture(scope="session")
def power_center_third():
    return families.power_center(families.PowerParams(-1.0 / 3.0, 2.0))


@pytest.fixture(scope="session")
def loud_center_std():
    return families.loud_center(families.LoudParams(-1.0, 2.0))


@pytest.fixture(scope="session")
def harmonic_center():
    def deriv(k, x):
        x = np.asarray(x, dtype=float)
        if k == 0:
            return x * x / 2.0
        if k == 1:
            return x
        if k == 2:
            return np.ones_like(x)
        return np.zeros_like(x)

    return PotentialCenter(deriv, -math.inf, math.inf, math.inf, label="harmonic")


def make_rand_smooth(rng):
    """Polynomial times (1+x^2)^s: analytic on the line with exact jets."""
    return ops.polynomial(rng.uniform(-1.0, 1.0, 4)) * ops.rational_power(
        rng.uniform(-1.5, 0.5)
    )


def make_rand_tuple(rng, n):
    while True:
        nu = tuple(float(v) for v in np.round(rng.uniform(-0.5, 2.5, n), 6))
        if len(set(nu)) == n:
            return nu
