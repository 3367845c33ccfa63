import math

import numpy as np
import pytest

from periodlab import series as S
from periodlab.errors import DomainError


def test_power_jet_matches_analytic_derivatives():
    K = 6
    u = S.variable(0.3, K) + S.constant(1.0, K)
    d = S.to_derivatives(S.power(u, 2.5))
    x0 = 1.3
    fall = 1.0
    for j in range(K + 1):
        assert d[j] == pytest.approx(fall * x0 ** (2.5 - j), rel=1e-13)
        fall *= 2.5 - j


def test_exp_log_roundtrip():
    u = S.from_derivatives([0.7, 1.1, -0.4, 0.2, 0.9, -1.0, 0.3])
    assert np.max(np.abs(S.exp(S.log(u)) - u)) < 1e-13


def test_atan_jet():
    u = S.from_derivatives([0.7, 1.1, -0.4, 0.2, 0.9, -1.0, 0.3])
    a = S.to_derivatives(S.atan(u))
    assert a[0] == pytest.approx(math.atan(0.7), abs=1e-15)
    assert a[1] == pytest.approx(1.1 / (1.0 + 0.49), rel=1e-14)


def test_compose_against_direct_power():
    K = 6
    g = S.from_derivatives([2.0, 0.5, 1.5, -0.3, 0.1, 0.0, 0.2])
    direct = S.sqrt(g)
    outer = S.power(S.variable(2.0, K), 0.5)
    assert np.max(np.abs(S.compose(outer, g) - direct)) < 1e-14


def test_reversion_against_closed_form_inverse():
    # f(x) = 2x + x^2 at x0 = 0.5 has inverse sqrt(1+y) - 1 near y0 = 1.25.
    K = 6
    a = S.from_derivatives([1.25, 3.0, 2.0, 0, 0, 0, 0])
    b = S.revert(a)
    exact = S.power(S.shift_constant(S.variable(2.25, K), 2.25), 0.5)
    assert np.max(np.abs(b[1:] - exact[1:])) < 1e-14


def test_reversion_requires_nonzero_slope():
    with pytest.raises(DomainError):
        S.revert(S.from_derivatives([1.0, 0.0, 3.0]))


def test_differentiate():
    jet = S.from_derivatives([1.0, 2.0, 3.0, 4.0])
    d = S.differentiate(jet)
    assert np.allclose(S.to_derivatives(d), [2.0, 3.0, 4.0])


def test_negative_base_integer_power():
    u = S.from_derivatives([-2.0, 1.0, 0.5])
    p = S.power(u, 3.0)
    assert p[0] == pytest.approx(-8.0)
    with pytest.raises(DomainError):
        S.power(u, 0.5)
