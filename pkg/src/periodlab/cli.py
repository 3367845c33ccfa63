"""Command-line experiment drivers.

Each experiment reads its parameters from a simple key=value config file
(and --tol overrides), runs a deterministic computation, and emits one CSV
with a documented header.  Exit codes: 0 success, 2 an acceptance-style
check failed, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics as asy
from . import families as fam
from . import operators as ops
from . import period as per
from . import specfun as sf
from .errors import ConfigError

EXPERIMENTS = (
    "compensator",
    "compensator-limit",
    "scan-power",
    "scan-loud",
    "verify-identities",
)

_DEFAULTS = {
    "compensator": {
        "x": "2,10,100",
        "alpha_min": -1.9,
        "alpha_max": 3.0,
        "alpha_count": 200,
    },
    "compensator-limit": {
        "m": 0,
        "alphas": "-1.05,-1.0,-0.95",
        "beta": -5.0,
        "x0": 10.0,
        "ratio": math.sqrt(10.0),
        "count": 15,
    },
    "scan-power": {
        "q_min": -0.035,
        "q_max": 0.035,
        "q_count": 3,
        "p_min": 1.965,
        "p_max": 2.035,
        "p_count": 3,
        "window_lo": 1e-1,
        "window_hi": 1e-5,
        "resolution": 400,
    },
    "scan-loud": {
        "d_min": -1.035,
        "d_max": -0.965,
        "d_count": 3,
        "f_min": 1.965,
        "f_max": 2.035,
        "f_count": 3,
        "window_lo": 1e-1,
        "window_hi": 1e-5,
        "resolution": 400,
    },
    "verify-identities": {
        "samples": 10,
    },
}

_TOL_DEFAULTS = {
    "trace_final": 0.1,
    "trace_final_m1": 0.15,
    "identity_rel": 1e-7,
    "momentum": 1e-8,
}


@dataclass
class ExperimentConfig:
    experiment: str
    out: str
    seed: int = 0
    parallel: int = 1
    params: dict = field(default_factory=dict)
    tols: dict = field(default_factory=dict)

    def tol(self, name: str) -> float:
        return self.tols.get(name, _TOL_DEFAULTS[name])


def _parse_config_file(path: str) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _coerce(value, like):
    if isinstance(like, bool):
        return value in ("1", "true", "True")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


def build_config(args) -> ExperimentConfig:
    if args.experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {args.experiment!r}; choose from {', '.join(EXPERIMENTS)}"
        )
    params = dict(_DEFAULTS[args.experiment])
    if args.config:
        for key, value in _parse_config_file(args.config).items():
            if key not in params:
                raise ConfigError(f"unknown config key {key!r} for {args.experiment}")
            params[key] = _coerce(value, params[key])
    tols = {}
    for item in args.tol or []:
        if "=" not in item:
            raise ConfigError("--tol expects NAME=VALUE")
        name, value = item.split("=", 1)
        if name not in _TOL_DEFAULTS:
            raise ConfigError(f"unknown tolerance {name!r}")
        tols[name] = float(value)
    if args.parallel < 1:
        raise ConfigError("--parallel must be >= 1")
    return ExperimentConfig(
        experiment=args.experiment,
        out=args.out,
        seed=args.seed,
        parallel=args.parallel,
        params=params,
        tols=tols,
    )


def _write_csv(path: str, header, rows):
    handle = open(path, "w", newline="", encoding="utf-8") if path else sys.stdout
    try:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if path:
            handle.close()


def _floats(text: str):
    return [float(v) for v in str(text).split(",") if v.strip()]


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def cmd_compensator(cfg: ExperimentConfig) -> int:
    xs = _floats(cfg.params["x"])
    alphas = np.linspace(
        float(cfg.params["alpha_min"]),
        float(cfg.params["alpha_max"]),
        int(cfg.params["alpha_count"]),
    )
    rows = []
    for x in xs:
        for a in alphas:
            omega = sf.compensator(x, a)
            big = sf.compensator_normalized(x, a) if x > 1.0 else ""
            g = "" if a == -1.0 else sf.sine_power_integral(a)
            k = sf.sine_power_finite_part(a)
            rows.append([x, a, omega, big, g, k])
    _write_csv(
        cfg.out,
        ["x", "alpha", "compensator", "compensator_normalized",
         "sine_power_integral", "sine_power_finite_part"],
        rows,
    )
    return 0


def cmd_compensator_limit(cfg: ExperimentConfig) -> int:
    m = int(cfg.params["m"])
    alphas = _floats(cfg.params["alphas"])
    schedule = asy.GeometricSchedule(
        float(cfg.params["x0"]), float(cfg.params["ratio"]), int(cfg.params["count"])
    )
    if m == 0:
        builder = asy.calibrated_tail
    else:
        beta = float(cfg.params["beta"])
        builder = lambda a: asy.calibrated_pair(a, beta)
    config = asy.AsymptoticsConfig(momentum_tol=cfg.tol("momentum"))
    fits = asy.verify_compensator_limit(builder, m, alphas, schedule, config=config)
    tol = cfg.tol("trace_final") if m == 0 else cfg.tol("trace_final_m1")
    rows = []
    failed = False
    for a, fit in fits.items():
        ok = fit.final_deviation <= tol and fit.improving
        failed = failed or not ok
        for x, tr in zip(fit.schedule, fit.ratio_trace):
            rows.append([a, m, x, tr, fit.final_deviation, int(ok)])
    _write_csv(
        cfg.out,
        ["alpha", "m", "x", "trace", "final_deviation", "accepted"],
        rows,
    )
    return 2 if failed else 0


def _scan_power_cell(cell):
    (q, p), window_lo, window_hi, resolution = cell
    try:
        prm = fam.PowerParams(q, p)
        C = fam.power_center(prm)
        win = (C.h0 * (1.0 - window_lo), C.h0 * (1.0 - window_hi))
        zc = per.count_critical_orbits(C, win, resolution=resolution)
        return [q, p, C.h0, zc.count, zc.certification_gap, int(zc.needs_refinement), "ok"]
    except Exception as exc:  # per-cell domain errors are data, not crashes
        return [q, p, "", "", "", "", f"error: {exc}"]


def _scan_loud_cell(cell):
    (d, f), window_lo, window_hi, resolution = cell
    try:
        prm = fam.LoudParams(d, f)
        C = fam.loud_center(prm)
        win = (C.h0 * (1.0 - window_lo), C.h0 * (1.0 - window_hi))
        zc = per.count_critical_orbits(C, win, resolution=resolution)
        return [d, f, C.h0, zc.count, zc.certification_gap, int(zc.needs_refinement), "ok"]
    except Exception as exc:
        return [d, f, "", "", "", "", f"error: {exc}"]


def _run_cells(worker, cells, parallel: int):
    if parallel <= 1:
        return [worker(c) for c in cells]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(worker, cells))


def cmd_scan_power(cfg: ExperimentConfig) -> int:
    p = cfg.params
    qs = np.linspace(float(p["q_min"]), float(p["q_max"]), int(p["q_count"]))
    ps = np.linspace(float(p["p_min"]), float(p["p_max"]), int(p["p_count"]))
    cells = [
        ((float(q), float(pp)), float(p["window_lo"]), float(p["window_hi"]), int(p["resolution"]))
        for q in qs
        for pp in ps
    ]
    rows = _run_cells(_scan_power_cell, cells, cfg.parallel)
    _write_csv(
        cfg.out,
        ["q", "p", "h0", "count", "certification_gap", "needs_refinement", "status"],
        rows,
    )
    counts = [r[3] for r in rows if r[3] != ""]
    print(f"scan-power: max count = {max(counts) if counts else 'n/a'} over {len(rows)} cells")
    return 0


def cmd_scan_loud(cfg: ExperimentConfig) -> int:
    p = cfg.params
    ds = np.linspace(float(p["d_min"]), float(p["d_max"]), int(p["d_count"]))
    fs = np.linspace(float(p["f_min"]), float(p["f_max"]), int(p["f_count"]))
    cells = [
        ((float(d), float(f)), float(p["window_lo"]), float(p["window_hi"]), int(p["resolution"]))
        for d in ds
        for f in fs
    ]
    rows = _run_cells(_scan_loud_cell, cells, cfg.parallel)
    l_root = fam.loud_nondegeneracy_root()
    d_mid = float(np.median(ds))
    f_mid = float(np.median(fs))
    try:
        xi = fam.loud_xi(fam.LoudParams(d_mid, f_mid)).estimate
    except Exception:
        xi = ""
    rows = [r + [l_root, xi] for r in rows]
    _write_csv(
        cfg.out,
        ["D", "F", "h0", "count", "certification_gap", "needs_refinement", "status",
         "L_root", "xi_estimate"],
        rows,
    )
    counts = [r[3] for r in rows if r[3] != ""]
    print(f"scan-loud: max count = {max(counts) if counts else 'n/a'} over {len(rows)} cells")
    return 0


def cmd_verify_identities(cfg: ExperimentConfig) -> int:
    n_samples = int(cfg.params["samples"])
    tol = cfg.tol("identity_rel")
    rng = np.random.default_rng(cfg.seed)

    def rand_smooth():
        return ops.polynomial(rng.uniform(-1.0, 1.0, 4)) * ops.rational_power(
            rng.uniform(-1.5, 0.5)
        )

    def rand_tuple(n):
        while True:
            nu = tuple(np.round(rng.uniform(-0.5, 2.5, n), 6))
            if len(set(nu)) == n:
                return nu

    checks = []

    def record(name, err):
        checks.append((name, err, err <= tol))

    worst = 0.0
    for _ in range(n_samples):
        nu1 = float(rng.uniform(-0.5, 2.0))
        x = float(rng.uniform(0.3, 2.0))
        got = ops.conjugate_point(ops.wronskian_weight(nu1), x)
        want = x**nu1
        worst = max(worst, abs(got - want) / max(1e-12, abs(want)))
    record("conjugation_of_weights_is_power", worst)

    worst = 0.0
    for _ in range(n_samples):
        n = int(rng.integers(1, 3))
        nu = rand_tuple(n)
        f = rand_smooth()
        x = float(rng.uniform(0.2, 4.0))
        lhs = ops.conjugate_point(lambda t: ops.conjugated_wronskian(nu, f, t), x)
        rhs = ops.power_wronskian(nu, ops.conjugate_to_halfline(f), x)
        worst = max(worst, abs(lhs - rhs) / max(1e-12, abs(rhs)))
    record("conjugation_intertwines_wronskians", worst)

    worst = 0.0
    for _ in range(n_samples):
        f = rand_smooth()
        x = float(rng.uniform(0.2, 4.0))
        lhs = ops.orbit_average(ops.conjugate_to_halfline(f), x)
        rhs = math.sqrt(1.0 + x * x) * ops.conjugate_point(
            lambda z: ops.orbit_average(f, z), x
        )
        worst = max(worst, abs(lhs - rhs) / max(1e-12, abs(rhs)))
    record("average_conjugation_factor", worst)

    worst = 0.0
    for _ in range(n_samples):
        f = rand_smooth()
        n = int(rng.integers(1, 3))
        if n == 2:
            f = f * ops.polynomial([1.0, 0.0, -1.0])
        lhs = ops.momentum_unit(f, n)
        rhs = ops.momentum_halfline(ops.conjugate_to_halfline(f), n, -2.0 * n)
        worst = max(worst, abs(lhs - rhs) / max(1e-10, abs(lhs)))
    record("momenta_agree_under_conjugation", worst)

    worst = 0.0
    for _ in range(n_samples):
        n = int(rng.integers(1, 3))
        nu = rand_tuple(n)
        f = rand_smooth()
        x = float(rng.uniform(0.5, 4.0))
        lhs = ops.orbit_average(ops.power_wronskian_fn(nu, f), x)
        rhs = ops.power_wronskian(
            nu,
            ops.from_jet_callable(
                lambda t, k, ff=f: ops.orbit_average_jet(ff, t, k),
                f.order,
                (0.0, math.inf),
            ),
            x,
        )
        worst = max(worst, abs(lhs - rhs) / max(1e-12, abs(rhs)))
    record("average_commutes_with_wronskian", worst)

    worst = 0.0
    pair = asy.calibrated_pair(-3.0, -5.0)
    for m in (1, 2):
        fm = ops.momentum_lift(pair, m)
        for x in (2.0, 10.0):
            lhs = ops.orbit_average(pair, x)
            rhs = x ** (-2 * m) * ops.orbit_average(fm, x)
            worst = max(worst, abs(lhs - rhs) / abs(lhs))
    record("momentum_lift_identity", worst)

    worst = 0.0
    for _ in range(n_samples):
        fs = [rand_smooth() for _ in range(3)]
        g = rand_smooth()
        x = float(rng.uniform(0.3, 2.0))
        lhs = ops.wronskian([(g * f).jet(x, 2) for f in fs])
        rhs = g.eval(x) ** 3 * ops.wronskian([f.jet(x, 2) for f in fs])
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    record("wronskian_product_rule", worst)

    from . import series as S

    worst = 0.0
    for _ in range(n_samples):
        fs = [rand_smooth() for _ in range(3)]
        x = float(rng.uniform(0.3, 2.0))
        phi0 = x / math.sqrt(1.0 + x * x)
        base = np.array([1.0 + x * x, 2.0 * x, 1.0])
        phi_jet = S.mul(S.variable(x, 2), S.power(base, -0.5))
        comp = [
            S.to_derivatives(S.compose(S.from_derivatives(f.jet(phi0, 2)), phi_jet))
            for f in fs
        ]
        lhs = ops.wronskian(comp)
        dphi = S.to_derivatives(phi_jet)[1]
        rhs = dphi**3 * ops.wronskian([f.jet(phi0, 2) for f in fs])
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    record("wronskian_composition_rule", worst)

    rows = [[name, n_samples, err, tol, int(ok)] for name, err, ok in checks]
    _write_csv(cfg.out, ["identity", "samples", "max_rel_err", "tol", "pass"], rows)
    return 0 if all(ok for _, _, ok in checks) else 2


_RUNNERS = {
    "compensator": cmd_compensator,
    "compensator-limit": cmd_compensator_limit,
    "scan-power": cmd_scan_power,
    "scan-loud": cmd_scan_loud,
    "verify-identities": cmd_verify_identities,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="periodlab",
        description="Numerical experiments on the period function of potential centers.",
    )
    parser.add_argument("--experiment", required=True, help=", ".join(EXPERIMENTS))
    parser.add_argument("--config", default=None, help="key=value parameter file")
    parser.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    parser.add_argument("--tol", action="append", help="tolerance override NAME=VALUE")
    parser.add_argument("--parallel", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    return _RUNNERS[cfg.experiment](cfg)


if __name__ == "__main__":
    sys.exit(main())
