"""The operator calculus on analytic functions.

SmoothFn wraps a scalar function together with exact derivatives (as jets)
up to a declared order; all operators act on it.  The central objects:

* orbit_average:      F[f](x) = int_0^{pi/2} f(x sin t) dt
* power_wronskian:    W[x^nu_1, .., x^nu_n, f] / x^(sum nu_i - i)
* conjugated_wronskian: the (0,1) analogue built on the weights
                      psi_nu(x) = x^nu (1-x^2)^(-(nu+2)/2)
* conjugate_to_halfline: B[f](x) = f(x/sqrt(1+x^2)) / (1+x^2)
* momentum_halfline / momentum_unit: the two momentum scales
* momentum_lift:      f_m = x^2 f_{m-1} + int_0^x f_{m-1}, which trades
                      vanishing momenta for extra decay

Wronskian determinants are expanded by cofactors; tuples are capped at
three exponents (matrices up to 4x4), which covers every use with headroom.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import quadrature, series
from .errors import CapabilityError, DivergenceError, DomainError

_MAX_TUPLE = 3


@dataclass(frozen=True)
class ExponentTuple:
    """Ordered real exponents defining a Wronskian operator; empty is identity."""

    nu: tuple

    def __post_init__(self):
        object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))
        if len(self.nu) > _MAX_TUPLE:
            raise DomainError(f"exponent tuples supported up to length {_MAX_TUPLE}")
        for i, a in enumerate(self.nu):
            for b in self.nu[i + 1 :]:
                if a == b:
                    raise DomainError("exponents must be pairwise distinct")

    def __len__(self):
        return len(self.nu)

    def __iter__(self):
        return iter(self.nu)


def _as_tuple(nu) -> ExponentTuple:
    return nu if isinstance(nu, ExponentTuple) else ExponentTuple(tuple(np.atleast_1d(nu)))


class SmoothFn:
    """A real function with exact derivatives up to `order` on `domain`.

    `jet_fn(x, k)` returns the array [f(x), f'(x), ..., f^(k)(x)].  A fast
    `eval_fn` (optionally numpy-broadcastable, see `vectorized`) may be
    supplied for the value itself, and `antiderivative` may carry the exact
    primitive vanishing at the left end of the domain when one is known.
    """

    def __init__(
        self,
        jet_fn: Callable,
        order: int,
        domain: tuple = (0.0, math.inf),
        eval_fn: Callable = None,
        antiderivative: "SmoothFn" = None,
        vectorized: bool = False,
    ):
        self.jet_fn = jet_fn
        self.order = int(order)
        self.domain = (float(domain[0]), float(domain[1]))
        self.eval_fn = eval_fn
        self.antiderivative = antiderivative
        self.vectorized = vectorized

    # -- evaluation ---------------------------------------------------------

    def eval(self, x: float) -> float:
        if self.eval_fn is not None:
            return float(self.eval_fn(x))
        return float(self.jet_fn(x, 0)[0])

    __call__ = eval

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if self.eval_fn is not None and self.vectorized:
            return np.asarray(self.eval_fn(xs), dtype=float)
        return np.array([self.eval(float(x)) for x in xs.ravel()]).reshape(xs.shape)

    def jet(self, x: float, k: int) -> np.ndarray:
        if k > self.order:
            raise CapabilityError(f"derivative order {k} exceeds capability {self.order}")
        return np.asarray(self.jet_fn(float(x), int(k)), dtype=float)

    def derivative(self, k: int, x: float) -> float:
        return float(self.jet(x, k)[k])

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "SmoothFn") -> "SmoothFn":
        if not isinstance(other, SmoothFn):
            return NotImplemented
        dom = (max(self.domain[0], other.domain[0]), min(self.domain[1], other.domain[1]))
        anti = None
        if self.antiderivative is not None and other.antiderivative is not None:
            anti = self.antiderivative + other.antiderivative
        ev = None
        vec = self.vectorized and other.vectorized
        if self.eval_fn is not None and other.eval_fn is not None:
            ev = lambda x: self.eval_fn(x) + other.eval_fn(x)
        return SmoothFn(
            lambda x, k: self.jet(x, k) + other.jet(x, k),
            min(self.order, other.order),
            dom,
            eval_fn=ev,
            antiderivative=anti,
            vectorized=vec,
        )

    def __neg__(self) -> "SmoothFn":
        return (-1.0) * self

    def __sub__(self, other: "SmoothFn") -> "SmoothFn":
        return self + (-other)

    def __rmul__(self, c) -> "SmoothFn":
        if not isinstance(c, (int, float)):
            return NotImplemented
        c = float(c)
        anti = c * self.antiderivative if self.antiderivative is not None else None
        ev = (lambda x: c * self.eval_fn(x)) if self.eval_fn is not None else None
        return SmoothFn(
            lambda x, k: c * self.jet(x, k),
            self.order,
            self.domain,
            eval_fn=ev,
            antiderivative=anti,
            vectorized=self.vectorized,
        )

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.__rmul__(other)
        if not isinstance(other, SmoothFn):
            return NotImplemented
        dom = (max(self.domain[0], other.domain[0]), min(self.domain[1], other.domain[1]))

        def jet_fn(x, k):
            a = series.from_derivatives(self.jet(x, k))
            b = series.from_derivatives(other.jet(x, k))
            return series.to_derivatives(series.mul(a, b))

        ev = None
        vec = self.vectorized and other.vectorized
        if self.eval_fn is not None and other.eval_fn is not None:
            ev = lambda x: self.eval_fn(x) * other.eval_fn(x)
        return SmoothFn(
            jet_fn, min(self.order, other.order), dom, eval_fn=ev, vectorized=vec
        )


# ---------------------------------------------------------------------------
# basic factories
# ---------------------------------------------------------------------------

_DEFAULT_ORDER = 8


def _falling(a: float, j: int) -> float:
    out = 1.0
    for i in range(j):
        out *= a - i
    return out


def constant(c: float, order: int = _DEFAULT_ORDER) -> SmoothFn:
    c = float(c)
    return SmoothFn(
        lambda x, k: np.array([c] + [0.0] * k),
        order,
        (-math.inf, math.inf),
        eval_fn=lambda x: c * np.ones_like(np.asarray(x, dtype=float)),
        vectorized=True,
    )


def monomial(nu: float, order: int = _DEFAULT_ORDER) -> SmoothFn:
    """x^nu on (0, inf), with the exact falling-factorial derivatives."""

    def jet_fn(x, k):
        return np.array([_falling(nu, j) * x ** (nu - j) for j in range(k + 1)])

    anti = None
    if nu > -1.0:
        # Primitive vanishing at 0.
        anti_nu = nu + 1.0

        def anti_jet(x, k):
            out = np.zeros(k + 1)
            out[0] = x**anti_nu / anti_nu
            for j in range(1, k + 1):
                out[j] = _falling(nu, j - 1) * x ** (nu - j + 1)
            return out

        anti = SmoothFn(
            anti_jet,
            order + 1,
            (0.0, math.inf),
            eval_fn=lambda x: np.asarray(x, dtype=float) ** anti_nu / anti_nu,
            vectorized=True,
        )
    return SmoothFn(
        jet_fn,
        order,
        (0.0, math.inf),
        eval_fn=lambda x: np.asarray(x, dtype=float) ** nu,
        antiderivative=anti,
        vectorized=True,
    )


def polynomial(coeffs: Sequence[float], order: int = _DEFAULT_ORDER) -> SmoothFn:
    """sum coeffs[j] x^j with exact jets on the whole line."""
    c = np.asarray(coeffs, dtype=float)

    def jet_fn(x, k):
        out = np.zeros(k + 1)
        for j in range(k + 1):
            ks = np.arange(j, len(c))
            ff = np.ones_like(ks, dtype=float)
            for i in range(j):
                ff *= ks - i
            out[j] = float(np.sum(ff * c[ks] * x ** (ks - j))) if len(ks) else 0.0
        return out

    return SmoothFn(
        jet_fn,
        order,
        (-math.inf, math.inf),
        eval_fn=lambda x: np.polyval(c[::-1], np.asarray(x, dtype=float)),
        vectorized=True,
    )


def rational_power(s: float, order: int = _DEFAULT_ORDER) -> SmoothFn:
    """(1 + x^2)^s with exact jets on the whole line."""

    def jet_fn(x, k):
        base = np.zeros(k + 1)
        base[0] = 1.0 + x * x
        if k >= 1:
            base[1] = 2.0 * x
        if k >= 2:
            base[2] = 1.0
        return series.to_derivatives(series.power(base, s))

    return SmoothFn(
        jet_fn,
        order,
        (-math.inf, math.inf),
        eval_fn=lambda x: (1.0 + np.asarray(x, dtype=float) ** 2) ** s,
        vectorized=True,
    )


def from_jet_callable(jet_fn, order, domain, **kw) -> SmoothFn:
    return SmoothFn(jet_fn, order, domain, **kw)


def wronskian_weight(nu: float, order: int = _DEFAULT_ORDER) -> SmoothFn:
    """psi_nu(x) = x^nu (1-x^2)^(-(nu+2)/2) on (0, 1)."""
    expo = -(nu + 2.0) / 2.0

    def jet_fn(x, k):
        var = series.variable(x, k)
        disk = np.zeros(k + 1)
        disk[0] = 1.0 - x * x
        if k >= 1:
            disk[1] = -2.0 * x
        if k >= 2:
            disk[2] = -1.0
        jet = series.mul(series.power(var, nu), series.power(disk, expo))
        return series.to_derivatives(jet)

    def ev(x):
        x = np.asarray(x, dtype=float)
        return x**nu * (1.0 - x * x) ** expo

    return SmoothFn(jet_fn, order, (0.0, 1.0), eval_fn=ev, vectorized=True)


# ---------------------------------------------------------------------------
# the averaging operator
# ---------------------------------------------------------------------------


def orbit_average(f, x: float, rel_tol: float = 1e-10) -> float:
    """int_0^{pi/2} f(x sin t) dt by double-exponential quadrature."""
    if x < 0.0:
        raise DomainError("requires x >= 0")
    if isinstance(f, SmoothFn) and f.vectorized:
        g = lambda ts: f.eval_fn(x * np.sin(ts))
        res = quadrature.integrate(g, 0.0, 0.5 * math.pi, rel_tol, scheme="de", vectorized=True)
    else:
        fe = f.eval if isinstance(f, SmoothFn) else f
        res = quadrature.integrate(
            lambda t: fe(x * math.sin(t)), 0.0, 0.5 * math.pi, rel_tol, scheme="de"
        )
    return res.value


def orbit_average_derivative(f: SmoothFn, k: int, x: float, rel_tol: float = 1e-10) -> float:
    """d^k/dx^k of the orbit average: int f^(k)(x sin t) sin^k t dt."""
    if k == 0:
        return orbit_average(f, x, rel_tol)
    if k > f.order:
        raise CapabilityError(f"requested order {k} exceeds capability {f.order}")

    def g(t: float) -> float:
        s = math.sin(t)
        return f.derivative(k, x * s) * s**k

    return quadrature.integrate(g, 0.0, 0.5 * math.pi, rel_tol, scheme="de").value


def orbit_average_jet(f: SmoothFn, x: float, order: int, rel_tol: float = 1e-10) -> np.ndarray:
    return np.array([orbit_average_derivative(f, k, x, rel_tol) for k in range(order + 1)])


# ---------------------------------------------------------------------------
# Wronskians
# ---------------------------------------------------------------------------


def wronskian(jets: Sequence[np.ndarray]) -> float:
    """Determinant det(f_j^(i)) from the functions' derivative arrays."""
    n = len(jets)
    mat = [[float(jets[j][i]) for j in range(n)] for i in range(n)]
    return _det(mat)


def _det(mat) -> float:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    if n == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    out = 0.0
    sign = 1.0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
        out += sign * mat[0][j] * _det(minor)
        sign = -sign
    return out


def _jet_det(mat) -> np.ndarray:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    out = None
    sign = 1.0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
        term = series.mul(mat[0][j], _jet_det(minor))
        out = sign * term if out is None else out + sign * term
        sign = -sign
    return out


def power_wronskian(nu, f: SmoothFn, x: float) -> float:
    """W[x^nu_1, ..., x^nu_n, f](x) / x^(sum (nu_i - i)); identity for n = 0."""
    nu = _as_tuple(nu)
    n = len(nu)
    if n == 0:
        return f.eval(x)
    if x <= 0.0:
        raise DomainError("power Wronskian is singular at x <= 0")
    fj = f.jet(x, n)
    cols = [np.array([_falling(v, i) * x ** (v - i) for i in range(n + 1)]) for v in nu]
    cols.append(fj[: n + 1])
    w = wronskian(cols)
    return w / x ** (sum(nu) - n * (n + 1) / 2.0)


def power_wronskian_fn(nu, f: SmoothFn) -> SmoothFn:
    """The power Wronskian as a SmoothFn, regular down to x = 0.

    The Wronskian quotient factorizes as V(nu) prod_i (x d/dx - nu_i) with
    V the Vandermonde determinant of the exponents, which extends
    analytically to the origin where the power columns themselves blow up.
    The point evaluation power_wronskian keeps the determinant form; the
    two agree on x > 0 (exercised by the tests).
    """
    nu = _as_tuple(nu)
    n = len(nu)
    if n == 0:
        return f
    vandermonde = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            vandermonde *= nu.nu[j] - nu.nu[i]

    def jet_fn(x, k):
        cur = series.from_derivatives(f.jet(x, n + k))
        var = series.variable(x, n + k)
        for v in nu:
            dcur = series.differentiate(cur)
            cur = series.mul(var[: len(dcur)], dcur) - v * cur[: len(dcur)]
        return vandermonde * series.to_derivatives(cur)[: k + 1]

    return SmoothFn(jet_fn, f.order - n, (max(0.0, f.domain[0]), f.domain[1]))


def conjugated_wronskian(nu, f: SmoothFn, x: float) -> float:
    """(x(1-x^2))^(n(n+1)/2) W[psi_nu_1, .., psi_nu_n, f](x) / prod psi_nu_i(x)."""
    nu = _as_tuple(nu)
    n = len(nu)
    if n == 0:
        return f.eval(x)
    if not 0.0 < x < 1.0:
        raise DomainError("requires x in (0, 1)")
    cols = [wronskian_weight(v).jet(x, n) for v in nu]
    cols.append(f.jet(x, n))
    w = wronskian(cols)
    denom = 1.0
    for v in nu:
        denom *= x**v * (1.0 - x * x) ** (-(v + 2.0) / 2.0)
    return (x * (1.0 - x * x)) ** (n * (n + 1) / 2.0) * w / denom


# ---------------------------------------------------------------------------
# conjugation to the half line
# ---------------------------------------------------------------------------


def conjugate_point(f, x: float) -> float:
    """B[f](x) = f(x / sqrt(1+x^2)) / (1+x^2)."""
    if x < 0.0:
        raise DomainError("requires x >= 0")
    fe = f.eval if isinstance(f, SmoothFn) else f
    return fe(x / math.sqrt(1.0 + x * x)) / (1.0 + x * x)


def conjugate_to_halfline(f: SmoothFn) -> SmoothFn:
    """B[f] as a SmoothFn on [0, inf) with chain-rule jets."""

    def jet_fn(x, k):
        base = np.zeros(k + 1)
        base[0] = 1.0 + x * x
        if k >= 1:
            base[1] = 2.0 * x
        if k >= 2:
            base[2] = 1.0
        w = series.power(base, -1.0)
        phi = series.mul(series.variable(x, k), series.power(base, -0.5))
        fj = series.from_derivatives(f.jet(phi[0], k))
        comp = series.compose(fj, phi)
        return series.to_derivatives(series.mul(w, comp))

    ev = None
    vec = False
    if f.eval_fn is not None:
        if f.vectorized:
            def ev(xs):
                xs = np.asarray(xs, dtype=float)
                return f.eval_fn(xs / np.sqrt(1.0 + xs * xs)) / (1.0 + xs * xs)
            vec = True
        else:
            ev = lambda x: f.eval_fn(x / math.sqrt(1.0 + x * x)) / (1.0 + x * x)
    return SmoothFn(jet_fn, f.order, (0.0, math.inf), eval_fn=ev, vectorized=vec)


# ---------------------------------------------------------------------------
# momenta
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentumVector:
    order: int
    values: tuple
    tail_exponents: tuple
    converged: tuple

    def max_abs(self) -> float:
        return max(abs(v) for v in self.values) if self.values else 0.0


def momentum_halfline(f, n: int, tail_exponent: float, rel_tol: float = 1e-10) -> float:
    """M_n[f] = int_0^inf x^(2n-2) f(x) dx for f = O(x^tail_exponent)."""
    if n < 1:
        raise DomainError("momentum order must be >= 1")
    if 2 * n - 2 + tail_exponent >= -1.0:
        raise DivergenceError(
            f"weight x^{2 * n - 2} against tail x^{tail_exponent} is not integrable"
        )
    fe = f.eval_array if isinstance(f, SmoothFn) else None
    if fe is not None and f.vectorized:
        g = lambda xs: xs ** (2 * n - 2) * f.eval_fn(xs)
        return quadrature.integrate_to_infinity(
            g, 0.0, rel_tol, 2 * n - 2 + tail_exponent, vectorized=True
        ).value
    feval = f.eval if isinstance(f, SmoothFn) else f
    g = lambda x: x ** (2 * n - 2) * feval(x)
    return quadrature.integrate_to_infinity(g, 0.0, rel_tol, 2 * n - 2 + tail_exponent).value


def momentum_unit(f, n: int, rel_tol: float = 1e-9) -> float:
    """N_n[f] = int_0^1 f(x) (1-x^2)^(-1/2) (x/sqrt(1-x^2))^(2n-2) dx.

    Evaluated through x = sin(t), which removes the square-root weight
    analytically: N_n = int_0^{pi/2} f(sin t) tan(t)^(2n-2) dt.  The default
    tolerance allows for the tan^2-amplified rounding floor of the n = 2
    weight; tighter requests may fail to converge for such integrands.
    """
    if n < 1:
        raise DomainError("momentum order must be >= 1")
    feval = f.eval if isinstance(f, SmoothFn) else f

    def g(t: float) -> float:
        return feval(math.sin(t)) * math.tan(t) ** (2 * n - 2)

    res = quadrature.integrate(g, 0.0, 0.5 * math.pi, rel_tol, scheme="de", singular_endpoints=True)
    if not res.converged or not math.isfinite(res.value):
        raise DivergenceError("unit-interval momentum did not converge")
    return res.value


def momentum_vector(f, m: int, tail_exponent: float) -> MomentumVector:
    values = []
    tails = []
    flags = []
    for n in range(1, m + 1):
        tails.append(2 * n - 2 + tail_exponent)
        try:
            values.append(momentum_halfline(f, n, tail_exponent))
            flags.append(True)
        except DivergenceError:
            values.append(math.nan)
            flags.append(False)
    return MomentumVector(m, tuple(values), tuple(tails), tuple(flags))


# ---------------------------------------------------------------------------
# the momentum lift
# ---------------------------------------------------------------------------


class _Antiderivative:
    """A(x) = int_0^x f, cached on a geometric anchor grid.

    Anchors are appended under a lock and never mutated afterwards, so
    concurrent reads are safe once built.  When `tail_exponent < -1` is
    supplied the far tail switches to A(x) = total - int_x^inf f, keeping
    the evaluation relatively accurate where A itself decays.
    """

    _TAIL_SWITCH = 64.0

    def __init__(self, f, tail_exponent: float = None, rel_tol: float = 1e-12):
        self.f = f
        self.rel_tol = rel_tol
        self.tail_exponent = tail_exponent
        self._xs = [0.0]
        self._vals = [0.0]
        self._lock = threading.Lock()
        self._total = None

    def _feval(self, a: float, b: float) -> float:
        fe = self.f.eval if isinstance(self.f, SmoothFn) else self.f
        return quadrature.integrate(fe, a, b, self.rel_tol, scheme="gk").value

    def _tail(self, x: float) -> float:
        fe = self.f.eval if isinstance(self.f, SmoothFn) else self.f
        return quadrature.integrate_to_infinity(
            fe, x, self.rel_tol, self.tail_exponent
        ).value

    def value(self, x: float) -> float:
        if x < 0.0:
            raise DomainError("antiderivative defined for x >= 0")
        if x == 0.0:
            return 0.0
        use_tail = self.tail_exponent is not None and x > self._TAIL_SWITCH
        if use_tail:
            with self._lock:
                if self._total is None:
                    self._total = self._tail(0.0)
            return self._total - self._tail(x)
        with self._lock:
            i = bisect.bisect_right(self._xs, x) - 1
            x0, a0 = self._xs[i], self._vals[i]
            # Grow the anchor grid geometrically so repeated evaluations at
            # increasing arguments integrate short segments only.
            while x > max(1e-3, 2.0 * x0):
                x1 = max(1e-3, 2.0 * x0)
                a1 = a0 + self._feval(x0, x1)
                if self._xs[-1] < x1:
                    self._xs.append(x1)
                    self._vals.append(a1)
                x0, a0 = x1, a1
        return a0 + self._feval(x0, x)


def momentum_lift(f: SmoothFn, m: int, tail_exponent: float = None) -> SmoothFn:
    """The m-fold recursion f_m = x^2 f_{m-1} + x int_0^x f_{m-1}(s) ds.

    This is the form conjugate to the averaging operator: F[f](x) equals
    x^(-2m) F[f_m](x) for all x > 0, and when the first m momenta vanish it
    trades them for decay, f_m ~ a prod((a+2i)/(a+2i-1)) x^(a+2m).  Uses the
    function's exact antiderivative when it carries one, otherwise a cached
    numeric primitive.  The derivative capability is preserved.
    """
    if m < 0:
        raise DomainError("m must be non-negative")
    out = f
    for level in range(m):
        out = _lift_once(out, None if tail_exponent is None else tail_exponent + 2 * level)
    return out


def _lift_once(f: SmoothFn, tail_exponent: float) -> SmoothFn:
    anti = f.antiderivative
    cache = None if anti is not None else _Antiderivative(f, tail_exponent)

    def a_value(x: float) -> float:
        if anti is not None:
            return anti.eval(x)
        return cache.value(x)

    def jet_fn(x, k):
        fj = series.from_derivatives(f.jet(x, k))
        sq = np.zeros(k + 1)
        sq[0] = x * x
        if k >= 1:
            sq[1] = 2.0 * x
        if k >= 2:
            sq[2] = 1.0
        var = series.variable(x, k)
        a_coeff = np.zeros(k + 1)
        a_coeff[0] = a_value(x)
        a_derivs = series.to_derivatives(fj)
        for j in range(1, k + 1):
            a_coeff[j] = a_derivs[j - 1] / math.factorial(j)
        out = series.mul(fj, sq) + series.mul(var, a_coeff)
        return series.to_derivatives(out)

    ev = None
    vec = False
    if f.eval_fn is not None and anti is not None and anti.eval_fn is not None:
        if f.vectorized and anti.vectorized:
            def ev(xs):
                xs = np.asarray(xs, dtype=float)
                return xs * xs * f.eval_fn(xs) + xs * anti.eval_fn(xs)
            vec = True
        else:
            ev = lambda x: x * x * f.eval_fn(x) + x * anti.eval_fn(x)
    else:
        ev = lambda x: x * x * f.eval(x) + x * a_value(x)
    return SmoothFn(jet_fn, f.order, f.domain, eval_fn=ev, vectorized=vec)
