"""Truncated Taylor-series (jet) arithmetic.

A jet of order K at a point x0 is the numpy array ``c`` of length K+1 with
``c[j] = f^(j)(x0) / j!``.  All operations below truncate consistently at the
common length of their inputs.  Orders stay small (K <= 10) so plain loops
are used throughout; no attempt is made at asymptotically fast convolution.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError


def constant(value: float, order: int) -> np.ndarray:
    c = np.zeros(order + 1)
    c[0] = value
    return c


def variable(x: float, order: int) -> np.ndarray:
    """Jet of the identity map at x."""
    c = np.zeros(order + 1)
    c[0] = x
    if order >= 1:
        c[1] = 1.0
    return c


def from_derivatives(derivs) -> np.ndarray:
    """Jet from the array [f(x), f'(x), ..., f^(K)(x)]."""
    d = np.asarray(derivs, dtype=float)
    return d / np.array([math.factorial(j) for j in range(len(d))])


def to_derivatives(jet: np.ndarray) -> np.ndarray:
    """Inverse of :func:`from_derivatives`."""
    return jet * np.array([math.factorial(j) for j in range(len(jet))])


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = min(len(a), len(b))
    out = np.zeros(n)
    for k in range(n):
        out[k] = np.dot(a[: k + 1], b[k::-1])
    return out


def power(u: np.ndarray, alpha: float) -> np.ndarray:
    """Jet of u(x)^alpha.  Requires u[0] > 0 unless alpha is an integer."""
    n = len(u)
    u0 = u[0]
    if u0 == 0.0:
        raise DomainError("jet power requires a nonzero constant term")
    if u0 < 0.0:
        if alpha != round(alpha):
            raise DomainError("negative base with non-integer exponent")
        sign = -1.0 if int(round(alpha)) % 2 else 1.0
        return sign * power(-u, alpha)
    p = np.zeros(n)
    p[0] = u0**alpha
    for k in range(1, n):
        acc = 0.0
        for j in range(1, k + 1):
            acc += (j * (alpha + 1.0) - k) * u[j] * p[k - j]
        p[k] = acc / (k * u0)
    return p


def recip(u: np.ndarray) -> np.ndarray:
    return power(u, -1.0)


def div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return mul(a, recip(b))


def sqrt(u: np.ndarray) -> np.ndarray:
    return power(u, 0.5)


def log(u: np.ndarray) -> np.ndarray:
    n = len(u)
    u0 = u[0]
    if u0 <= 0.0:
        raise DomainError("jet log requires a positive constant term")
    out = np.zeros(n)
    out[0] = math.log(u0)
    for k in range(1, n):
        acc = 0.0
        for j in range(1, k):
            acc += (k - j) * u[j] * out[k - j]
        out[k] = u[k] / u0 - acc / (k * u0)
    return out


def exp(u: np.ndarray) -> np.ndarray:
    n = len(u)
    out = np.zeros(n)
    out[0] = math.exp(u[0])
    for k in range(1, n):
        acc = 0.0
        for j in range(1, k + 1):
            acc += j * u[j] * out[k - j]
        out[k] = acc / k
    return out


def atan(u: np.ndarray) -> np.ndarray:
    n = len(u)
    out = np.zeros(n)
    out[0] = math.atan(u[0])
    if n == 1:
        return out
    du = np.array([(j + 1) * u[j + 1] for j in range(n - 1)])
    w = recip(mul(u, u) + constant(1.0, n - 1))[: n - 1]
    v = mul(du, w)
    for k in range(1, n):
        out[k] = v[k - 1] / k
    return out


def compose(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Jet of f(g(x)) given the jet of f at g(x0) and the jet of g at x0."""
    n = min(len(outer), len(inner))
    shifted = inner[:n].copy()
    shifted[0] = 0.0
    out = constant(outer[n - 1], n - 1)
    for j in range(n - 2, -1, -1):
        out = mul(out, shifted)
        out[0] += outer[j]
    return out


def revert(a: np.ndarray) -> np.ndarray:
    """Jet of the inverse map.

    Given the jet ``a`` of f at x0 with a[1] != 0, returns the jet ``b`` of
    f^{-1} at y0 = f(x0), so that f^{-1}(y0 + t) = b[0] + sum b[k] t^k.
    """
    n = len(a)
    if n < 2 or a[1] == 0.0:
        raise DomainError("series reversion needs a nonzero linear term")
    b = np.zeros(n)
    b[0] = 0.0  # offset relative to x0; caller adds x0 back via b0 below
    b[1] = 1.0 / a[1]
    for k in range(2, n):
        # t^k coefficient of sum_{j>=2} a_j B(t)^j only needs b_1..b_{k-1}
        bpow = b[: k + 1].copy()
        bpow[0] = 0.0
        pj = bpow.copy()
        acc = 0.0
        for j in range(2, k + 1):
            pj = mul(pj, bpow)
            acc += a[j] * pj[k]
        b[k] = -acc * b[1]
    return b


def differentiate(jet: np.ndarray) -> np.ndarray:
    """Coefficient jet of f' from the coefficient jet of f (one order shorter)."""
    n = len(jet)
    return jet[1:] * np.arange(1, n)


def shift_constant(jet: np.ndarray, value: float) -> np.ndarray:
    out = jet.copy()
    out[0] = value
    return out
