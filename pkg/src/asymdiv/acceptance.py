"""Pipeline run with pass/fail flags against the reproduction thresholds.

Only thresholds that concern the requested tuple are evaluated; everything
else in the summary is informational.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .jsonio import to_jsonable

DELTA_RATIO_X = 100_000
DELTA_RATIO_MAX = 0.05
SLOPE_TOL = {(1, 1): 0.03, (1, 2): 0.04, (1, 1, 1): 0.06}
CONSTANT_RTOL = 0.10
K1_RTOL = 0.25
FIT_SKIP_LOW = 4


def dirichlet_constant() -> float:
    """zeta(3/2)^4 / (6 pi^2 zeta(3)), the mean-square constant for a = (1,1)."""
    with mpmath.workdps(30):
        return float(mpmath.zeta(1.5) ** 4 / (6 * mpmath.pi**2 * mpmath.zeta(3)))


def sandwich_ratios(table, points=7):
    """sum_{n<=x} dhat^2 / x^(2-1/a_k) at x = N/2^i, and whether consecutive ratios stay within x^0.1."""
    ak = table.a.a[-1]
    xs = [table.N // 2**i for i in range(points)]
    pre = table.prefix_dhatsq
    r = [float(pre[x]) / x ** (2 - 1 / ak) for x in xs]
    ok = all(max(r[i] / r[i + 1], r[i + 1] / r[i]) <= xs[i + 1] ** 0.1 for i in range(points - 1))
    return xs, r, bool(ok)


def _check(name, passed, **detail):
    return {"check": name, "passed": bool(passed), **to_jsonable(detail)}


def pipeline_report(cfg) -> dict:
    from .cli import exponents_report, _table_summary
    from .mainterm import compute_main_term, eval_main_term
    from .meansquare import FitError, delta_at, fit_power_law, mean_square
    from .sieve import load_or_build, series_constant
    from .voronoi import CalibrationError, calibrate, k1_constant

    a = cfg.a
    checks = []
    out = {"exponents": exponents_report(a)}
    table = load_or_build(a, cfg.N, cfg.cache)
    out["table"] = _table_summary(table, cfg)
    M = compute_main_term(a, cfg.precision)
    out["main_term"] = M.to_json()

    x = min(DELTA_RATIO_X, cfg.N)
    d = float(delta_at(table, M, x))
    H = eval_main_term(M, x)
    ratio = abs(d) / abs(H)
    checks.append(_check("delta_ratio", ratio < DELTA_RATIO_MAX, x=x, ratio=ratio, bound=DELTA_RATIO_MAX))

    prof = mean_square(table, M, cfg.T, cfg.quad_order)
    fit = None
    try:
        fit = fit_power_law(prof, skip_low=FIT_SKIP_LOW)
    except FitError as exc:
        out["fit_error"] = str(exc)
    out["meansquare"] = prof.to_json()
    if fit is not None and a.a in SLOPE_TOL:
        target = float(prof.predicted_exponent)
        tol = SLOPE_TOL[a.a]
        checks.append(_check("slope", abs(fit.slope - target) <= tol, slope=fit.slope,
                             target=prof.predicted_exponent, tol=tol))
    emp_const = prof.ratios[-1]
    if a.a == (1, 1):
        c = dirichlet_constant()
        checks.append(_check("meansquare_constant", abs(emp_const / c - 1) <= CONSTANT_RTOL,
                             value=emp_const, target=c, rtol=CONSTANT_RTOL))

    if cfg.window[1] <= cfg.N:
        try:
            cal = calibrate(a, table, M, cfg.window, cfg.samples, min(cfg.M_prime, cfg.N))
        except (CalibrationError, ValueError) as exc:
            out["voronoi_error"] = str(exc)
        else:
            out["voronoi"] = cal.to_json()
            p = cal.params
            if a.a == (1, 1):
                checks.append(_check("omega", abs(p.omega / (4 * math.pi) - 1) <= 0.01,
                                     omega=p.omega, target=4 * math.pi))
                checks.append(_check("phase", abs(p.phase + 0.25) <= 0.05, phase=p.phase, target=-0.25))
                if p.M_prime >= 1000:
                    checks.append(_check("residual_ratio", cal.residual_ratio < 0.2,
                                         residual_ratio=cal.residual_ratio))
                s = 2 - Fraction(a.k - 1) / (2 * a.alpha)
                series, tail = series_constant(table, s)
                k1 = k1_constant(p.kappa, series, a)
                checks.append(_check("k1_constant", abs(k1 / emp_const - 1) <= K1_RTOL,
                                     k1=k1, empirical=emp_const, series_tail=tail, rtol=K1_RTOL))
    out["checks"] = checks
    out["passed"] = all(c["passed"] for c in checks)
    return out
