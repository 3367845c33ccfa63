"""The period function, its derivative and critical-orbit counting.

T(h) is computed through the conjugate substitution z = g(x), which turns
the orbit integral into a smooth average and removes the turning-point
singularities; the direct singular quadrature of dx/sqrt(h - V) is kept as
an independent cross-check.  T'(h) comes from the averaging operator acting
on the symmetrized curvature of g^{-1}, the representation that stays
accurate arbitrarily close to the outer boundary.  Zero counting reports
sign changes only: multiplicity is not certifiable numerically, and an
even-order zero surfaces as a collapsing certification gap instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import operators as ops
from . import quadrature, series
from .errors import DomainError, OutOfAnnulusError
from .potential import PotentialCenter
from .specfun import compensator_normalized

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PeriodSample:
    h: float
    T: float
    Tprime: float
    method: str


@dataclass(frozen=True)
class ZeroCount:
    window: tuple
    count: int
    certification_gap: float
    grid_resolution: int
    roots: tuple = ()
    root_residuals: tuple = ()
    needs_refinement: bool = False


# ---------------------------------------------------------------------------
# the period and its derivative
# ---------------------------------------------------------------------------


def _check_h(P: PotentialCenter, h: float):
    if not 0.0 < h < P.h0:
        raise OutOfAnnulusError(f"h = {h} outside (0, {P.h0})")


def period(P: PotentialCenter, h: float, method: str = "g-substitution",
           rel_tol: float = 1e-12) -> float:
    """Minimal period of the orbit at energy h in (0, h0)."""
    _check_h(P, h)
    if method in ("g-substitution", "substitution"):
        gm = P.gmap
        sq = math.sqrt(h)

        def integrand(ts):
            z = sq * np.sin(ts)
            return _inverse_slope_sum(gm, z)

        res = quadrature.integrate(
            integrand, 0.0, 0.5 * math.pi, rel_tol, scheme="de", vectorized=True
        )
        return _SQRT2 * res.value
    if method == "direct":
        # x = mid + rad sin(phi) absorbs both inverse-square-root turning
        # points.  Each half is integrated in the offset u = pi/2 -+ phi so
        # the distance to the turning point, rad (1 - cos u) = 2 rad
        # sin^2(u/2), never cancels; h - V itself is rebuilt from the Taylor
        # expansion at the exact turning point inside a small collar.
        xm = _turning_point(P, h, left=True)
        xp = _turning_point(P, h, left=False)
        mid = 0.5 * (xm + xp)
        rad = 0.5 * (xp - xm)
        k_max = min(P.max_order, 10)
        taylor_m = [float(P.dv(k, xm)) / math.factorial(k) for k in range(1, k_max + 1)]
        taylor_p = [float(P.dv(k, xp)) / math.factorial(k) for k in range(1, k_max + 1)]
        # The expansions are only trusted well inside their radius, which is
        # capped by the distance from the turning point to the domain edge.
        cut_m = 0.01 * rad
        if math.isfinite(P.x_left):
            cut_m = min(cut_m, 0.1 * (xm - P.x_left))
        cut_p = 0.01 * rad
        if math.isfinite(P.x_right):
            cut_p = min(cut_p, 0.1 * (P.x_right - xp))

        def gap_from(w: float, endpoint: float, taylor, cut: float) -> float:
            # w is the signed offset from the turning point, pointing inward.
            if abs(w) < cut:
                return -sum(c * w**k for k, c in enumerate(taylor, start=1))
            return h - float(P.v(endpoint + w))

        def half(endpoint: float, taylor, cut: float, inward: float):
            def g(u: float) -> float:
                w = inward * 2.0 * rad * math.sin(0.5 * u) ** 2
                s = gap_from(w, endpoint, taylor, cut)
                return rad * math.sin(u) / math.sqrt(s) if s > 0.0 else 0.0

            return quadrature.integrate(g, 0.0, 0.5 * math.pi, rel_tol, scheme="de").value

        right = half(xp, taylor_p, cut_p, -1.0)
        left = half(xm, taylor_m, cut_m, +1.0)
        return _SQRT2 * (left + right)
    raise DomainError(f"unknown method {method!r}")


def _inverse_slope_sum(gm, z: np.ndarray) -> np.ndarray:
    """(g^-1)'(z) + (g^-1)'(-z), vectorized, covering the center by series."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < gm._z_cut
    if np.any(small):
        b = gm._inv_series
        ks = np.arange(1, len(b))
        dcoef = b[1:] * ks
        zs = z[small]
        out[small] = np.polyval(dcoef[::-1], zs) + np.polyval(dcoef[::-1], -zs)
    big = ~small
    if np.any(big):
        zb = z[big]
        out[big] = _inverse_slope_one_side(gm, zb) + _inverse_slope_one_side(gm, -zb)
    return out


def _inverse_slope_one_side(gm, z: np.ndarray) -> np.ndarray:
    # (g^-1)'(z) = 1/g'(u) = sgn(z) 2 sqrt(V(u)) / V'(u)
    u = gm._bisect_array(z)
    v = np.asarray(gm.owner.v(u), dtype=float)
    v1 = np.asarray(gm.owner.dv(1, u), dtype=float)
    return np.sign(z) * 2.0 * np.sqrt(v) / v1


def _turning_point(P: PotentialCenter, h: float, left: bool) -> float:
    gm = P.gmap
    if left:
        lo = gm._expand_bracket_left(h)
        f = lambda x: float(P.v(x)) - h
        if f(lo) <= 0.0:
            return lo
        return brentq(f, lo, 0.0, xtol=1e-15 * max(1.0, abs(lo)), rtol=8.9e-16)
    hi = gm._expand_bracket_right(h)
    f = lambda x: float(P.v(x)) - h
    if f(hi) <= 0.0:
        return hi
    return brentq(f, 0.0, hi, xtol=1e-15 * max(1.0, hi), rtol=8.9e-16)


def period_derivative(P: PotentialCenter, h: float, rel_tol: float = 1e-10) -> float:
    """T'(h), through the averaging representation of the curvature integrand."""
    _check_h(P, h)
    sq = math.sqrt(h)

    def integrand(ts):
        return P.dperiod_integrand_array(sq * np.sin(ts))

    res = quadrature.integrate(
        integrand, 0.0, 0.5 * math.pi, rel_tol, scheme="de", vectorized=True
    )
    return res.value / (_SQRT2 * h)


def period_samples(P: PotentialCenter, hs, method: str = "g-substitution"):
    return [PeriodSample(float(h), period(P, float(h), method), period_derivative(P, float(h)), method) for h in hs]


# ---------------------------------------------------------------------------
# batched derivative scans and zero counting
# ---------------------------------------------------------------------------

_rule_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _theta_rule(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Fixed tanh-sinh rule on (0, pi/2): (theta nodes, weights)."""
    cached = _rule_cache.get(level)
    if cached is not None:
        return cached
    r = 0.25 * math.pi
    h = 0.5**level
    thetas = [0.5 * math.pi * 0.5]
    weights = [0.5 * math.pi * r * h]
    for lev in range(0, level + 1):
        delta, w = quadrature._nodes(lev)
        lo = r * delta
        hi = 0.5 * math.pi - r * delta
        keep = (lo > 0.0) & (hi < 0.5 * math.pi)
        thetas.extend(lo[keep])
        weights.extend(h * r * w[keep])
        thetas.extend(hi[keep])
        weights.extend(h * r * w[keep])
    th = np.array(thetas)
    wt = np.array(weights)
    _rule_cache[level] = (th, wt)
    return th, wt


def period_derivative_grid(
    P: PotentialCenter, hs: np.ndarray, level: int = 8, validate: bool = True
) -> np.ndarray:
    """T' on a whole energy grid with one batched fixed-rule evaluation.

    With `validate`, three grid points are re-evaluated with the adaptive
    path and the rule level is raised (up to 11) until they agree to 1e-9.
    """
    hs = np.asarray(hs, dtype=float)
    if validate:
        probes = hs[:: max(1, len(hs) // 3)][:3]
        ref = np.array([period_derivative(P, float(h)) for h in probes])
        while level <= 11:
            got = _grid_eval(P, probes, level)
            scale = np.max(np.abs(ref)) + 1e-300
            if np.max(np.abs(got - ref)) <= 1e-9 * scale:
                break
            level += 1
    return _grid_eval(P, hs, level)


def _grid_eval(P: PotentialCenter, hs: np.ndarray, level: int) -> np.ndarray:
    th, wt = _theta_rule(level)
    zs = np.sqrt(hs)[:, None] * np.sin(th)[None, :]
    vals = P.dperiod_integrand_array(zs.ravel()).reshape(zs.shape)
    return (vals @ wt) / (_SQRT2 * hs)


def count_critical_orbits(
    P: PotentialCenter,
    window: tuple,
    resolution: int = 400,
    level: int = 8,
) -> ZeroCount:
    """Sign changes of T' on a geometric grid pushed toward the window top.

    Roots are bracketed and polished; the certification gap is the smallest
    |T'| seen away from the located roots, so a collapsing gap (tangential
    zero or unresolved pair) flags the window instead of miscounting.
    """
    h_lo, h_hi = float(window[0]), float(window[1])
    if not 0.0 < h_lo < h_hi < P.h0:
        raise DomainError("window must satisfy 0 < h_lo < h_hi < h0")
    d = np.geomspace(P.h0 - h_lo, P.h0 - h_hi, resolution)
    hs = P.h0 - d
    tp = period_derivative_grid(P, hs, level=level)
    scale = float(np.max(np.abs(tp)))
    # An isochronous window has T' at rounding level everywhere; sign flips
    # there are noise, not critical orbits.
    anchor = period(P, float(hs[len(hs) // 2])) / (h_hi - h_lo)
    if scale <= 1e-12 * anchor:
        return ZeroCount(
            window=(h_lo, h_hi),
            count=0,
            certification_gap=scale,
            grid_resolution=resolution,
        )
    sign = np.sign(tp)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    roots = []
    residuals = []
    for i in flips:
        root = brentq(
            lambda h: period_derivative(P, h),
            hs[i],
            hs[i + 1],
            xtol=1e-15 * P.h0,
            rtol=8.9e-16,
        )
        roots.append(root)
        residuals.append(abs(period_derivative(P, root)))
    mask = np.ones(len(hs), dtype=bool)
    for i in flips:
        mask[max(0, i - 1) : i + 3] = False
    gap = float(np.min(np.abs(tp[mask]))) if np.any(mask) else 0.0
    return ZeroCount(
        window=(h_lo, h_hi),
        count=len(flips),
        certification_gap=gap,
        grid_resolution=resolution,
        roots=tuple(roots),
        root_residuals=tuple(residuals),
        needs_refinement=bool(gap < 1e-6 * scale),
    )


# ---------------------------------------------------------------------------
# boundary Wronskian trace
# ---------------------------------------------------------------------------


def dperiod_integrand_fn(P: PotentialCenter, order: int = 4) -> ops.SmoothFn:
    """The rescaled curvature integrand as a SmoothFn on (0, 1).

    f(z) = P[u (g^-1)''(u)] at u = z sqrt(h0); its average satisfies
    F[f](z) = sqrt(2) h0 z^2 T'(h0 z^2).
    """
    if not math.isfinite(P.h0):
        raise DomainError("finite boundary energy required")
    gm = P.gmap
    c = math.sqrt(P.h0)

    def jet_fn(z, k):
        jp = gm.inverse_jet(c * z, k + 2)
        jm = gm.inverse_jet(-c * z, k + 2)
        # coefficient jets in z of A(cz) and A(-cz), A = (g^-1)''
        ap = np.array([jp[j + 2] * c**j / math.factorial(j) for j in range(k + 1)])
        am = np.array(
            [jm[j + 2] * (-c) ** j / math.factorial(j) for j in range(k + 1)]
        )
        var = series.variable(z, k)
        cz = c * var
        jet = series.mul(cz, ap - am)
        return series.to_derivatives(jet)

    return ops.SmoothFn(
        jet_fn,
        order,
        (0.0, 1.0),
        eval_fn=lambda z: P.dperiod_integrand_array(np.asarray(z, dtype=float) * c),
        vectorized=True,
    )


def boundary_weight(P: PotentialCenter, order: int = 4) -> ops.SmoothFn:
    """sqrt(2) h0 z^2 (1-z^2)^(-1/2): the weight pairing T' with the trace."""

    def jet_fn(z, k):
        var = series.variable(z, k)
        sq = series.mul(var, var)
        disk = np.zeros(k + 1)
        disk[0] = 1.0 - z * z
        if k >= 1:
            disk[1] = -2.0 * z
        if k >= 2:
            disk[2] = -1.0
        jet = _SQRT2 * P.h0 * series.mul(sq, series.power(disk, -0.5))
        return series.to_derivatives(jet)

    def ev(z):
        z = np.asarray(z, dtype=float)
        return _SQRT2 * P.h0 * z * z / np.sqrt(1.0 - z * z)

    return ops.SmoothFn(jet_fn, order, (0.0, 1.0), eval_fn=ev, vectorized=True)


def wronskian_criterion_trace(
    P: PotentialCenter,
    nu,
    weight: ops.SmoothFn,
    z_schedule: np.ndarray,
    m: int = 0,
    omega_alpha: float = -1.0,
    rel_tol: float = 1e-10,
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized boundary Wronskian of (psi_nu_1, .., psi_nu_n, weight T').

    Returns (z values, trace values) with
    trace(z) = (1-z)^kappa W[psi, weight T'(z^2 h0)](z) / Omega(z/sqrt(1-z^2), alpha),
    kappa = 1/2 - m + n(n+3)/2 + sum(nu)/2.  A tail bounded away from zero
    is the numerical signature that the zero-count bound applies; with this
    kappa the trace converges to the nonzero limit itself (the half-integer
    shift restores the z^(2m+1) (1-z^2)^((1-2m)/2) factor the conjugation
    chain produces).
    """
    nu = ops._as_tuple(nu)
    n = len(nu)
    kappa = 0.5 - m + n * (n + 3) / 2.0 + 0.5 * sum(nu)
    fr = dperiod_integrand_fn(P, order=max(4, n + 1))
    c = math.sqrt(2.0) * P.h0
    zs = np.asarray(z_schedule, dtype=float)
    out = np.empty_like(zs)
    for idx, z in enumerate(zs):
        z = float(z)
        gjet = ops.orbit_average_jet(fr, z, n, rel_tol)
        # T'(h0 z^2) jet from G = sqrt(2) h0 z^2 T'(h0 z^2)
        var = series.variable(z, n)
        denom = c * series.mul(var, var)
        tp_jet = series.div(series.from_derivatives(gjet), denom)
        col = series.to_derivatives(
            series.mul(series.from_derivatives(weight.jet(z, n)), tp_jet)
        )
        if n == 0:
            w = col[0]
        else:
            jets = [ops.wronskian_weight(v).jet(z, n) for v in nu]
            jets.append(col)
            w = ops.wronskian(jets)
        arg = z / math.sqrt(1.0 - z * z)
        out[idx] = (1.0 - z) ** kappa * w / compensator_normalized(arg, omega_alpha)
    return zs, out
