"""Special functions and compensator arithmetic.

Provides the Gamma and digamma functions, the compensator omega(x, alpha)
with its removable singularity at alpha = -1, the sine-power integral
G(alpha) = int_0^{pi/2} sin^alpha, its finite part K(alpha), the normalized
compensator Omega(x, alpha) = (1+alpha) G(alpha) omega(x, alpha), the lift
prefactor prod (alpha+2i)/(alpha+2i-1), and a real Gauss hypergeometric
2F1 restricted to z < 1.

Everything here is a pure function; all functions are safe to call
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DivergenceError, DomainError, PoleError

_SQRT_2PI = 2.5066282746310005
_LOG2 = math.log(2.0)
_ZETA3 = 1.2020569031595942854

# Lanczos coefficients, g = 671/128 - 1/2 shift form.  Relative accuracy of
# the resulting Gamma is ~1e-15 over the positive axis.
_LANCZOS_COF = (
    57.1562356658629235,
    -59.5979603554754912,
    14.1360979747417471,
    -0.491913816097620199,
    0.339946499848118887e-4,
    0.465236289270485756e-4,
    -0.983744753048795646e-4,
    0.158088703224912494e-3,
    -0.210264441724104883e-3,
    0.217439618115212643e-3,
    -0.164318106536763890e-3,
    0.844182239838527433e-4,
    -0.261908384015814087e-4,
    0.368991826595316234e-5,
)

# Bernoulli numbers B_2n for the digamma asymptotic series.
_BERNOULLI_2N = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)


def _is_nonpositive_integer(x: float, tol: float = 0.0) -> bool:
    if x > 0.5:
        return False
    r = round(x)
    return abs(x - r) <= tol


def _log_gamma_positive(x: float) -> float:
    # Lanczos approximation, valid for x > 0.
    tmp = x + 5.2421875  # x + g + 1/2 with g = 607/128
    tmp = (x + 0.5) * math.log(tmp) - tmp
    ser = 0.999999999999997092
    y = x
    for c in _LANCZOS_COF:
        y += 1.0
        ser += c / y
    return tmp + math.log(_SQRT_2PI * ser / x)


def gamma(x: float) -> float:
    """Gamma function on the real line minus the non-positive integers."""
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma pole at x={x}")
    if x >= 0.5:
        return math.exp(_log_gamma_positive(x))
    # Reflection; sin(pi x) carries the sign for negative arguments.
    return math.pi / (math.sin(math.pi * x) * math.exp(_log_gamma_positive(1.0 - x)))


def gamma_reciprocal(x: float) -> float:
    """1/Gamma(x); equal to 0 at the poles of Gamma."""
    if _is_nonpositive_integer(x):
        return 0.0
    return 1.0 / gamma(x)


def digamma(x: float) -> float:
    """Digamma psi(x) = Gamma'(x)/Gamma(x) via recurrence + asymptotics."""
    if _is_nonpositive_integer(x):
        raise PoleError(f"digamma pole at x={x}")
    if x < 0.0:
        # psi(x) = psi(1-x) - pi/tan(pi x)
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    s = math.log(x) - 0.5 / x
    p = inv2
    for n, b2n in enumerate(_BERNOULLI_2N, start=1):
        s -= b2n / (2.0 * n) * p
        p *= inv2
    return acc + s


def compensator(x: float, alpha: float) -> float:
    """omega(x, alpha) = (x^(alpha+1) - 1)/(alpha+1), log x at alpha = -1.

    Evaluated through expm1 so the removable singularity at alpha = -1 is
    branch-free; a short Taylor form takes over when (alpha+1) log x is at
    rounding level.
    """
    if x <= 0.0:
        raise DomainError("compensator requires x > 0")
    lx = math.log(x)
    if alpha == -1.0:
        return lx
    u = (alpha + 1.0) * lx
    if abs(u) < 1e-8:
        return lx * (1.0 + u / 2.0 + u * u / 6.0)
    return math.expm1(u) / (alpha + 1.0)


def sine_power_integral(alpha: float) -> float:
    """G(alpha) = int_0^{pi/2} sin^alpha(theta) dtheta for alpha in (-2, inf).

    Undefined exactly at alpha = -1 (simple pole); callers needing the
    regularized object should use sine_power_scaled / sine_power_finite_part.
    """
    if alpha == -1.0:
        raise PoleError("sine power integral has a pole at alpha = -1")
    if alpha > -1.0:
        return (
            0.5 * math.sqrt(math.pi) * gamma((1.0 + alpha) / 2.0) / gamma(1.0 + alpha / 2.0)
        )
    if alpha > -2.0:
        return sine_power_scaled(alpha) / (1.0 + alpha)
    raise DomainError("sine power integral requires alpha > -2")


def sine_power_scaled(alpha: float) -> float:
    """(1+alpha) G(alpha) = sqrt(pi) Gamma((3+alpha)/2) / Gamma(1+alpha/2).

    Regular and positive on (-2, inf); equals 1 at alpha = -1.
    """
    if alpha <= -2.0:
        raise DomainError("requires alpha > -2")
    if alpha == -1.0:
        return 1.0
    return math.sqrt(math.pi) * gamma((3.0 + alpha) / 2.0) / gamma(1.0 + alpha / 2.0)


def sine_power_finite_part(alpha: float) -> float:
    """K(alpha) = G(alpha) - 1/(1+alpha), continued by log 2 at alpha = -1."""
    if alpha <= -2.0:
        raise DomainError("requires alpha > -2")
    t = alpha + 1.0
    if abs(t) < 1e-4:
        # Taylor window around the removable singularity; coefficients from
        # the expansion of (1+alpha) G(alpha) at alpha = -1.
        a2 = 0.5 * _LOG2 * _LOG2 - math.pi**2 / 24.0
        a3 = _ZETA3 / 4.0 - math.pi**2 * _LOG2 / 24.0 + _LOG2**3 / 6.0
        return _LOG2 + t * a2 + t * t * a3
    return (sine_power_scaled(alpha) - 1.0) / t


def compensator_normalized(x: float, alpha: float) -> float:
    """Omega(x, alpha) = (1+alpha) G(alpha) omega(x, alpha); positive for x > 1."""
    if x <= 1.0:
        raise DomainError("normalized compensator requires x > 1")
    if alpha <= -2.0:
        raise DomainError("normalized compensator requires alpha > -2")
    return sine_power_scaled(alpha) * compensator(x, alpha)


def lift_prefactor(m: int, alpha: float) -> float:
    """prod_{i=1..m} (alpha+2i)/(alpha+2i-1); empty product is 1."""
    if m < 0:
        raise DomainError("m must be a non-negative integer")
    out = 1.0
    for i in range(1, m + 1):
        den = alpha + 2.0 * i - 1.0
        if den == 0.0:
            raise PoleError(f"lift prefactor pole: alpha + {2 * i - 1} = 0")
        out *= (alpha + 2.0 * i) / den
    return out


def _hyp2f1_series(a: float, b: float, c: float, z: float, max_terms: int = 200000) -> float:
    term = 1.0
    s = 1.0
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        s += term
        if term == 0.0 or abs(term) <= 1e-17 * max(1.0, abs(s)):
            return s
    raise DivergenceError("2F1 series did not converge within the term budget")


def _hyp2f1_near_one(a: float, b: float, c: float, v: float) -> float:
    """2F1(a, b; c; 1 - v) for v in (0, 1/2] through the connection formula.

    Taking the complement v directly avoids losing it to rounding when the
    argument sits within ~1e-16 of 1.
    """
    s = c - a - b
    if abs(s - round(s)) < 1e-8:
        # Compensating Gamma poles (logarithmic case); the callers that hit
        # this boundary have a dedicated closed form instead.
        raise DomainError("connection formula degenerates: c-a-b is (near) an integer")
    coef1 = gamma(c) * gamma(s) * gamma_reciprocal(c - a) * gamma_reciprocal(c - b)
    coef2 = gamma(c) * gamma(-s) * gamma_reciprocal(a) * gamma_reciprocal(b)
    out = 0.0
    if coef1 != 0.0:
        out += coef1 * _hyp2f1_series(a, b, a + b - c + 1.0, v)
    if coef2 != 0.0:
        out += coef2 * v**s * _hyp2f1_series(c - a, c - b, s + 1.0, v)
    return out


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric 2F1(a, b; c; z) for real parameters and z < 1.

    Direct series for z <= 1/2; for z in (1/2, 1) the value is assembled from
    two series in 1-z through the standard connection formula.  The two
    branches agree on the overlap to ~1e-11.  The connection branch
    degenerates when c-a-b is an integer and is refused there.
    """
    if _is_nonpositive_integer(c):
        raise PoleError("2F1 parameter pole: c is a non-positive integer")
    if z >= 1.0:
        raise DomainError("2F1 implemented for z < 1 only")
    if z <= -1.0:
        raise DomainError("2F1 implemented for z > -1 only")
    if c - a - b <= -1.0 and z > 1.0 - 1e-8:
        raise DivergenceError("2F1 diverges as z -> 1 when c-a-b <= -1")
    if z <= 0.5:
        return _hyp2f1_series(a, b, c, z)
    return _hyp2f1_near_one(a, b, c, 1.0 - z)


def tail_integral(alpha: float, m_cut: float, x: float) -> float:
    """int_{arcsin(m_cut/x)}^{pi/2} sin^alpha(theta) dtheta in closed form.

    Equals arctanh(sqrt(1 - m^2/x^2)) at alpha = -1 and
    sqrt(1 - m^2/x^2) * 2F1(1/2, (1-alpha)/2; 3/2; 1 - m^2/x^2) otherwise.
    """
    if not 0.0 < m_cut < x:
        raise DomainError("requires 0 < m_cut < x")
    # Track the exact complement v = (m/x)^2; when the hypergeometric
    # argument 1-v sits within rounding of 1, only v carries information.
    v = (m_cut / x) ** 2
    w = (x - m_cut) * (x + m_cut) / (x * x)
    if alpha == -1.0:
        return math.atanh(math.sqrt(w))
    if v > 0.5:
        return math.sqrt(w) * _hyp2f1_series(0.5, (1.0 - alpha) / 2.0, 1.5, w)
    return math.sqrt(w) * _hyp2f1_near_one(0.5, (1.0 - alpha) / 2.0, 1.5, v)


@dataclass(frozen=True)
class CompensatorValue:
    """A single stable evaluation of the compensator."""

    x: float
    alpha: float
    value: float


@dataclass(frozen=True)
class GammaQuotients:
    """The Gamma-quotient pair (G, K) at one exponent."""

    alpha: float
    g: float
    k: float


def compensator_value(x: float, alpha: float) -> CompensatorValue:
    return CompensatorValue(x, alpha, compensator(x, alpha))


def gamma_quotients(alpha: float) -> GammaQuotients:
    return GammaQuotients(alpha, sine_power_integral(alpha), sine_power_finite_part(alpha))
