"""Quantifier estimation and compensator-mode asymptotics.

A function is quantified at a boundary by fitting the local log-log slope
of its values along a geometric schedule and extrapolating; the limit
coefficient comes from the normalized trace.  When the slope locks onto an
odd negative integer while the coefficient keeps drifting logarithmically,
the fit switches to compensator mode, where the correct normalization is
Omega(x, alpha) rather than a plain power.

verify_compensator_limit drives the central asymptotic statement: for f
decaying like a x^alpha with alpha + 2m = -1 and vanishing first m momenta,
x^(2m+1) F[f](x) approaches a b_m(alpha) Omega(x, alpha + 2m).  The trace
is evaluated through the momentum lift, because at large x the direct
average of f loses the entire signal to cancellation once the leading
momentum term is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import operators as ops
from . import series
from .errors import MomentumViolationError, NoConvergenceError, ZeroLimitError
from .specfun import compensator_normalized, lift_prefactor


@dataclass(frozen=True)
class GeometricSchedule:
    """x_k = start * ratio^k for the half-line; distances to the boundary
    d_k = start * ratio^k when the boundary is finite."""

    start: float = 10.0
    ratio: float = math.sqrt(10.0)
    count: int = 15

    def points(self) -> np.ndarray:
        return self.start * self.ratio ** np.arange(self.count)


#: default schedule reaching 1e8 on the half line
HALFLINE_SCHEDULE = GeometricSchedule()
#: default distance schedule for finite boundaries, down to ~2e-8
BOUNDARY_SCHEDULE = GeometricSchedule(start=1e-2, ratio=0.5, count=20)


@dataclass(frozen=True)
class AsymptoticsConfig:
    slope_match_tol: float = 2e-2       # |slope - odd integer| for mode switch
    drift_per_decade: float = 0.05      # coefficient drift marking a log factor
    momentum_tol: float = 1e-8
    trace_last_two_tol: float = 0.02
    residual_tol: float = 0.05
    zero_limit_factor: float = 10.0


DEFAULT_CONFIG = AsymptoticsConfig()


@dataclass(frozen=True)
class Quantifier:
    boundary: float
    alpha_hat: float
    ell_hat: float
    mode: str                 # "power" | "compensator"
    residual: float
    samples: np.ndarray = field(repr=False)

    @property
    def decay_exponent(self) -> float:
        """Exponent of the distance to a finite boundary (= -alpha_hat)."""
        return -self.alpha_hat


@dataclass(frozen=True)
class CompensatorFit:
    alpha: float              # the exponent inside Omega(x, .)
    ell: float
    ratio_trace: np.ndarray
    schedule: np.ndarray
    converged: bool
    final_deviation: float
    improving: bool
    momentum_max: float = 0.0
    commutation_max_rel: float = 0.0


def _aitken(seq: Sequence[float]) -> list[float]:
    out = []
    for i in range(len(seq) - 2):
        d1 = seq[i + 1] - seq[i]
        d2 = seq[i + 2] - seq[i + 1]
        den = d2 - d1
        if abs(den) <= 1e-13 * max(1.0, abs(seq[i + 2])):
            out.append(seq[i + 2])
        else:
            out.append(seq[i + 2] - d2 * d2 / den)
    return out


def _extrapolate(seq: Sequence[float]) -> tuple[float, float]:
    """Aitken-accelerated limit and a residual proxy (tail spread)."""
    cur = list(seq)
    for _ in range(2):
        if len(cur) >= 5:
            cur = _aitken(cur)
    tail = cur[-3:] if len(cur) >= 3 else cur
    limit = tail[-1]
    spread = max(tail) - min(tail)
    return float(limit), float(spread)


def estimate_quantifier(
    f: Callable[[float], float],
    boundary: float = math.inf,
    schedule: GeometricSchedule = None,
    config: AsymptoticsConfig = DEFAULT_CONFIG,
    side: str = "below",
) -> Quantifier:
    """Fit f ~ ell x^alpha at +inf, or lim f(x)(b-x)^alpha = ell at finite b.

    The returned alpha_hat always follows the finite-boundary convention
    lim f(x) (b-x)^alpha = ell (so a function vanishing like (b-x)^s has
    alpha_hat = -s); on the half line alpha_hat is the plain exponent.
    `side` selects the approach at a finite boundary: "below" for a right
    endpoint, "above" for a left one.  Raises NoConvergenceError /
    ZeroLimitError per the fit diagnostics.
    """
    infinite = math.isinf(boundary)
    if schedule is None:
        schedule = HALFLINE_SCHEDULE if infinite else BOUNDARY_SCHEDULE
    if infinite:
        xs = schedule.points()
        abscissa = xs
    else:
        ds = schedule.points()
        if schedule.ratio >= 1.0:
            ds = ds[::-1]
        if side == "below":
            xs = boundary - ds
        elif side == "above":
            xs = boundary + ds
        else:
            raise ValueError("side must be 'below' or 'above'")
        abscissa = ds
    ys = np.array([float(f(float(x))) for x in xs])
    if np.max(np.abs(ys)) == 0.0:
        raise ZeroLimitError("function is identically zero along the schedule")
    if np.any(ys == 0.0) or np.any(~np.isfinite(ys)):
        raise NoConvergenceError("zeros or non-finite values along the schedule")
    la = np.log(abscissa)
    lv = np.log(np.abs(ys))
    slopes = np.diff(lv) / np.diff(la)
    slope_hat, slope_res = _extrapolate(slopes)

    if infinite:
        alpha_hat = slope_hat
        coeff = ys / xs**alpha_hat
    else:
        # slope is in the distance variable; Def-style exponent flips sign
        alpha_hat = -slope_hat
        coeff = ys * abscissa**alpha_hat

    mode = "power"
    ell_hat, ell_res = _extrapolate(coeff)
    if infinite:
        # Compensator detection: slope locked near an odd negative integer
        # while the power-normalized coefficient keeps drifting.
        m2 = round((-alpha_hat - 1.0) / 2.0)
        anchor = -(2.0 * m2 + 1.0)
        if m2 >= 0 and abs(alpha_hat - anchor) < config.slope_match_tol:
            decades = math.log10(schedule.ratio)
            drift = np.abs(np.diff(coeff[-6:])) / np.abs(coeff[-5:])
            per_decade = float(np.median(drift)) / decades if decades > 0 else 0.0
            if per_decade > config.drift_per_decade:
                mode = "compensator"
                alpha_hat = anchor
                logs = np.log(xs)
                coeff = ys * xs ** (2 * m2 + 1) / logs
                ell_hat, ell_res = _extrapolate(coeff)

    residual = max(slope_res, ell_res / max(1e-300, abs(ell_hat)))
    if residual > config.residual_tol:
        raise NoConvergenceError(f"quantifier fit residual {residual:.3g} above threshold")
    if abs(ell_hat) <= config.zero_limit_factor * ell_res:
        raise ZeroLimitError("limit coefficient indistinguishable from zero")
    return Quantifier(boundary, float(alpha_hat), float(ell_hat), mode, residual, ys)


# ---------------------------------------------------------------------------
# built-in calibrated families
# ---------------------------------------------------------------------------


def calibrated_tail(alpha: float, order: int = 8) -> ops.SmoothFn:
    """x (1+x^2)^((alpha-1)/2): analytic on [0, inf), decays like x^alpha."""
    s = (alpha - 1.0) / 2.0
    f = ops.monomial(1.0, order) * ops.rational_power(s, order)
    c = 2.0 * (s + 1.0)

    def anti_jet(x, k):
        base = np.zeros(k + 3)
        base[0] = 1.0 + x * x
        base[1] = 2.0 * x
        if k + 2 >= 2:
            base[2] = 1.0
        out = series.to_derivatives(series.power(base, s + 1.0))[: k + 1] / c
        out[0] = ((1.0 + x * x) ** (s + 1.0) - 1.0) / c
        return out

    f.antiderivative = ops.SmoothFn(
        anti_jet,
        order + 1,
        (0.0, math.inf),
        eval_fn=lambda x: ((1.0 + np.asarray(x, dtype=float) ** 2) ** (s + 1.0) - 1.0) / c,
        vectorized=True,
    )
    return f


def calibrated_pair(alpha: float, beta: float, order: int = 8) -> ops.SmoothFn:
    """Combination of two tails with the first momentum exactly zero.

    f = t_alpha - ((beta+1)/(alpha+1)) t_beta; the primitive is attached in
    the combined form ((1+x^2)^((alpha+1)/2) - (1+x^2)^((beta+1)/2))/(alpha+1)
    whose constant terms cancel exactly, keeping the far tail relatively
    accurate (the summed form loses all precision out there).
    """
    ratio = (beta + 1.0) / (alpha + 1.0)
    f = calibrated_tail(alpha, order) + (-ratio) * calibrated_tail(beta, order)
    sa = (alpha + 1.0) / 2.0
    sb = (beta + 1.0) / 2.0

    def anti_eval(x):
        w = 1.0 + np.asarray(x, dtype=float) ** 2
        return (w**sa - w**sb) / (alpha + 1.0)

    def anti_jet(x, k):
        base = np.zeros(k + 3)
        base[0] = 1.0 + x * x
        base[1] = 2.0 * x
        if k + 2 >= 2:
            base[2] = 1.0
        jet = (series.power(base, sa) - series.power(base, sb)) / (alpha + 1.0)
        out = series.to_derivatives(jet)[: k + 1]
        out[0] = float(anti_eval(x))
        return out

    f.antiderivative = ops.SmoothFn(
        anti_jet, order + 1, (0.0, math.inf), eval_fn=anti_eval, vectorized=True
    )
    return f


def calibrated_wronskian_preimage(order: int = 8) -> ops.SmoothFn:
    """f with (x d/dx - 2)[f] = x/(1+x^2): f(x) = x^2 arctan(1/x) - x.

    The closed form cancels catastrophically for large x, so beyond x = 2
    the evaluation switches to the alternating tail series
    f(x) = -sum_{k>=1} (-1)^(k+1) x^(1-2k) / (2k+1), which the jets follow
    term by term.
    """

    def jet_fn(x, k):
        if x <= 2.0:
            # arctan(1/u) = pi/2 - arctan(u) for u > 0 keeps the jet regular
            # down to the origin.
            var = series.variable(x, k + 2)
            sq = series.mul(var, var)
            at = series.constant(0.5 * math.pi, k + 2) - series.atan(var)
            jet = series.mul(sq, at)[: k + 1] - var[: k + 1]
            return series.to_derivatives(jet)
        out = np.zeros(k + 1)
        sign = -1.0
        for kk in range(1, 60):
            e = 1.0 - 2.0 * kk
            term0 = sign * x**e / (2.0 * kk + 1.0)
            if abs(term0) < 1e-18 * max(1e-300, abs(out[0])):
                break
            fall = 1.0
            for j in range(k + 1):
                out[j] += sign * fall * x ** (e - j) / (2.0 * kk + 1.0)
                fall *= e - j
            sign = -sign
        return out

    def ev(xs):
        xs = np.asarray(xs, dtype=float)
        out = np.zeros_like(xs)
        lo = (xs > 0.0) & (xs <= 2.0)
        hi = xs > 2.0
        if np.any(lo):
            out[lo] = xs[lo] ** 2 * np.arctan(1.0 / xs[lo]) - xs[lo]
        if np.any(hi):
            x = xs[hi]
            acc = np.zeros_like(x)
            sign = -1.0
            for kk in range(1, 60):
                acc += sign * x ** (1.0 - 2.0 * kk) / (2.0 * kk + 1.0)
                sign = -sign
                if np.all(np.abs(x ** (1.0 - 2.0 * (kk + 1))) < 1e-18 * np.abs(acc) + 1e-300):
                    break
            out[hi] = acc
        return out

    return ops.SmoothFn(jet_fn, order, (0.0, math.inf), eval_fn=ev, vectorized=True)


# ---------------------------------------------------------------------------
# compensator-limit verification
# ---------------------------------------------------------------------------


def _trace_for(
    f: ops.SmoothFn,
    m: int,
    alpha: float,
    amplitude: float,
    xs: np.ndarray,
    config: AsymptoticsConfig,
    momentum_max: float = 0.0,
    commutation: float = 0.0,
) -> CompensatorFit:
    lifted = ops.momentum_lift(f, m, tail_exponent=alpha)
    norm = amplitude * lift_prefactor(m, alpha)
    trace = np.array(
        [
            x * ops.orbit_average(lifted, x) / (norm * compensator_normalized(x, alpha + 2 * m))
            for x in xs
        ]
    )
    final_dev = abs(trace[-1] - 1.0)
    improving = bool(abs(trace[-1] - 1.0) < abs(trace[0] - 1.0))
    converged = bool(
        abs(trace[-1] - trace[-2]) <= config.trace_last_two_tol
        and final_dev < abs(trace[len(trace) // 2] - 1.0) + config.trace_last_two_tol
    )
    return CompensatorFit(
        alpha=alpha + 2 * m,
        ell=norm,
        ratio_trace=trace,
        schedule=xs,
        converged=converged,
        final_deviation=final_dev,
        improving=improving,
        momentum_max=momentum_max,
        commutation_max_rel=commutation,
    )


def verify_compensator_limit(
    f_builder: Callable[[float], ops.SmoothFn],
    m: int,
    alpha_grid: Sequence[float],
    schedule: GeometricSchedule = None,
    amplitude: float | Callable[[float], float] = 1.0,
    config: AsymptoticsConfig = DEFAULT_CONFIG,
) -> dict[float, CompensatorFit]:
    """Trace x^(2m+1) F[f](x) / (a b_m Omega(x, alpha+2m)) for each alpha.

    Requires the first m momenta of every f(. ; alpha) to vanish within the
    configured tolerance; the trace is evaluated through the momentum lift
    (x^(2m+1) F[f] = x F[f_m] for all x > 0).
    """
    xs = (schedule or HALFLINE_SCHEDULE).points()
    out = {}
    for alpha in alpha_grid:
        f = f_builder(alpha)
        mom_max = 0.0
        if m >= 1:
            mv = ops.momentum_vector(f, m, alpha)
            mom_max = max(abs(v) for v in mv.values)
            if not all(mv.converged) or mom_max > config.momentum_tol:
                raise MomentumViolationError(
                    f"momenta must vanish to order {m}; max |M_i| = {mom_max:.3g}"
                )
        a = amplitude(alpha) if callable(amplitude) else float(amplitude)
        out[alpha] = _trace_for(f, m, alpha, a, xs, config, momentum_max=mom_max)
    return out


def verify_compensator_limit_wronskian(
    nu,
    f: ops.SmoothFn,
    m: int,
    schedule: GeometricSchedule = None,
    amplitude: float = None,
    config: AsymptoticsConfig = DEFAULT_CONFIG,
    check_commutation: bool = True,
) -> CompensatorFit:
    """The Wronskian-operator version of the compensator limit.

    Quantifies L_nu[f] at infinity first (expecting alpha + 2m = -1), checks
    its momenta, then traces x^(2m+1) (L∘F)[f] against a b_m Omega.  The
    trace itself is computed through F[L f] (the two orders commute); when
    `check_commutation` is set, (L∘F)[f] is also evaluated directly at every
    schedule point and the worst relative deviation is recorded.
    """
    nu = ops._as_tuple(nu)
    xs = (schedule or HALFLINE_SCHEDULE).points()
    lf = ops.power_wronskian_fn(nu, f)
    q = estimate_quantifier(lf.eval, math.inf, config=config)
    alpha = q.alpha_hat if q.mode == "power" else -(2.0 * m + 1.0)
    if abs(alpha + 2 * m + 1.0) > config.slope_match_tol:
        raise NoConvergenceError(
            f"estimated exponent {alpha:.4f} is incompatible with alpha + 2m = -1"
        )
    alpha = -(2.0 * m + 1.0)
    a = q.ell_hat if amplitude is None else float(amplitude)
    mom_max = 0.0
    if m >= 1:
        mv = ops.momentum_vector(lf, m, alpha)
        mom_max = max(abs(v) for v in mv.values)
        if not all(mv.converged) or mom_max > config.momentum_tol:
            raise MomentumViolationError(
                f"momenta of the Wronskian image must vanish to order {m}"
            )
    commutation = 0.0
    if check_commutation and len(nu) > 0:
        for x in xs:
            lhs = ops.power_wronskian(
                nu,
                ops.from_jet_callable(
                    lambda t, k: ops.orbit_average_jet(f, t, k), f.order, (0.0, math.inf)
                ),
                float(x),
            )
            rhs = ops.orbit_average(lf, float(x))
            commutation = max(commutation, abs(lhs - rhs) / max(1e-300, abs(rhs)))
    return _trace_for(lf, m, alpha, a, xs, config, momentum_max=mom_max, commutation=commutation)
