import math

import numpy as np
import pytest

from periodlab import quadrature as Q
from periodlab import specfun as sf
from periodlab.errors import DivergenceError, DomainError

# Closed-form corpus: (integrand, a, b, value, needs DE, offset-aware).
# Integrands singular at a nonzero endpoint take (x, dist_a, dist_b) so the
# engine's exact offsets reach them.
CLOSED_FORMS = [
    (lambda x: 1.0, 0.0, math.pi / 2, math.pi / 2, False, False),
    (lambda x: math.sin(x), 0.0, math.pi, 2.0, False, False),
    (lambda x: math.exp(x), 0.0, 1.0, math.e - 1.0, False, False),
    (lambda x: x**3 - 2 * x, -1.0, 2.0, 15.0 / 4.0 - 3.0, False, False),
    (lambda x: 1.0 / (1.0 + x * x), 0.0, 1.0, math.pi / 4, False, False),
    (lambda x: math.log(x), 0.0, 1.0, -1.0, True, False),
    (lambda x: x**-0.5, 0.0, 1.0, 2.0, True, False),
    (lambda x, da, db: db**-0.25, 0.0, 1.0, 4.0 / 3.0, True, True),
    (lambda x, da, db: da**-0.5 * db**-0.5, 0.0, 1.0, math.pi, True, True),
    (lambda x: math.cos(x) ** 2, 0.0, 2 * math.pi, math.pi, False, False),
    (lambda x: x * math.exp(-x), 0.0, 30.0, 1.0 - 31.0 * math.exp(-30.0), False, False),
    (lambda x, da, db: db**-0.5, 0.0, 2.0, 2.0 * math.sqrt(2.0), True, True),
    (lambda x: math.sqrt(x), 0.0, 4.0, 16.0 / 3.0, False, False),
    (lambda x: 1.0 / x, 1.0, math.e, 1.0, False, False),
    (lambda x: math.sin(10 * x), 0.0, math.pi, (1 - math.cos(10 * math.pi)) / 10.0, False, False),
    (lambda x: x ** -0.9, 0.0, 1.0, 10.0, True, False),
    (lambda x: math.atan(x), 0.0, 1.0, math.pi / 4 - math.log(2.0) / 2.0, False, False),
    (lambda x: 1.0 / (x * x), 1.0, 5.0, 0.8, False, False),
    (lambda x: math.cosh(x), -1.0, 1.0, 2.0 * math.sinh(1.0), False, False),
    (lambda x: abs(x) ** -0.5, 0.0, 9.0, 6.0, True, False),
]


class TestIntegrate:
    def test_quarter_period_constant(self):
        res = Q.integrate(lambda t: 1.0, 0.0, math.pi / 2)
        assert res.value == pytest.approx(math.pi / 2, rel=1e-13)

    def test_endpoint_singularity(self):
        res = Q.integrate(lambda x: x**-0.5, 0.0, 1.0, singular_endpoints=True)
        assert res.value == pytest.approx(2.0, rel=1e-10)

    def test_sine_power_cross_check(self):
        res = Q.integrate(
            lambda t: math.sin(t) ** -0.5, 0.0, math.pi / 2, singular_endpoints=True
        )
        assert res.value == pytest.approx(sf.sine_power_integral(-0.5), rel=1e-11)

    @pytest.mark.parametrize("case", range(len(CLOSED_FORMS)))
    def test_honest_error_estimates(self, case):
        f, a, b, truth, singular, aware = CLOSED_FORMS[case]
        res = Q.integrate(f, a, b, 1e-10, singular_endpoints=singular, offset_aware=aware)
        err = abs(res.value - truth)
        assert err <= 1e-9 * max(1.0, abs(truth))
        assert err <= 10.0 * res.abs_error_estimate + 1e-14 * max(1.0, abs(truth))
        assert res.evaluations <= 200000

    def test_linearity_and_interval_additivity(self):
        f = lambda x: math.exp(-x) * math.sin(3 * x)
        whole = Q.integrate(f, 0.0, 2.0, 1e-12).value
        parts = Q.integrate(f, 0.0, 0.7, 1e-12).value + Q.integrate(f, 0.7, 2.0, 1e-12).value
        assert whole == pytest.approx(parts, abs=1e-11)
        doubled = Q.integrate(lambda x: 2.0 * f(x), 0.0, 2.0, 1e-12).value
        assert doubled == pytest.approx(2.0 * whole, abs=1e-11)

    def test_budget_flag(self):
        res = Q.integrate(
            lambda x: math.sin(1e4 * x) * x**-0.5, 0.0, 1.0,
            singular_endpoints=True, budget=500,
        )
        assert not res.converged

    def test_nan_raises(self):
        with pytest.raises(ValueError):
            Q.integrate(lambda x: math.nan, 0.0, 1.0, scheme="de")

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            Q.integrate(lambda x: x, 1.0, 0.0)

    def test_vectorized_path(self):
        res = Q.integrate(lambda xs: np.sin(xs), 0.0, math.pi, vectorized=True)
        assert res.value == pytest.approx(2.0, rel=1e-12)


class TestIntegrateToInfinity:
    def test_rational_tail(self):
        res = Q.integrate_to_infinity(lambda x: x * (1 + x * x) ** -2, 0.0,
                                      tail_exponent_hint=-3.0)
        assert res.value == pytest.approx(0.5, rel=1e-12)

    def test_exponential(self):
        res = Q.integrate_to_infinity(
            lambda x: math.exp(-min(x, 700.0)), 0.0, tail_exponent_hint=-2.0
        )
        assert res.value == pytest.approx(1.0, rel=1e-12)

    def test_power_tail_antiderivative(self):
        alpha = -3.0
        res = Q.integrate_to_infinity(
            lambda x: x * (1 + x * x) ** ((alpha - 1) / 2), 0.0, tail_exponent_hint=alpha
        )
        assert res.value == pytest.approx(-1.0 / (alpha + 1.0), rel=1e-12)

    def test_requires_hint(self):
        with pytest.raises(DomainError):
            Q.integrate_to_infinity(lambda x: math.exp(-x), 0.0)
        with pytest.raises(DomainError):
            Q.integrate_to_infinity(lambda x: math.exp(-x), 0.0, tail_exponent_hint=-0.5)

    @pytest.mark.parametrize(
        "f", [lambda x: 1.0 / (1.0 + x), lambda x: x / (1.0 + x * x)]
    )
    def test_divergence_flagged(self, f):
        with pytest.raises(DivergenceError):
            Q.integrate_to_infinity(f, 0.0, tail_exponent_hint=-1.5)

    def test_marginally_integrable_accepted(self):
        res = Q.integrate_to_infinity(lambda x: (1.0 + x) ** -1.3, 0.0,
                                      tail_exponent_hint=-1.3)
        assert res.value == pytest.approx(1.0 / 0.3, rel=1e-9)
