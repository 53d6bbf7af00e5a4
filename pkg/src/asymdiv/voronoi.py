"""Truncated oscillatory series for Delta(a;y) and its calibration.

    R1(y) = kappa * y^theta0 * sum_{n<=M'} dhat(n) / n^(1-theta0)
                  * cos(omega * (y n)^(1/(2 alpha)) + phase * pi)

kappa, phase and omega are not pinned down analytically for general a, so
they are fitted: omega from the lowest significant peak of a tapered
periodogram in u = y^(1/(2 alpha)), then (kappa, phase) by linear least
squares on the cos/sin components with omega refined by a 1-d search.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .exponents import as_tuple, derive_constants
from .jsonio import SCHEMA, to_jsonable
from .meansquare import delta_at
from .sieve import DivisorTable

_BLOCK = 512


class CalibrationError(RuntimeError):
    pass


@dataclass
class TruncatedSeriesParams:
    a: tuple
    M_prime: int
    kappa: float
    phase: float
    omega: float

    def __post_init__(self):
        self.a = as_tuple(self.a).a
        if self.M_prime < 1:
            raise ValueError("M_prime must be >= 1")
        if not self.omega > 0:
            raise ValueError("omega must be positive")


def nominal_omega(a) -> float:
    """h*pi, the nominal frequency multiplier of the oscillatory series."""
    return derive_constants(a, digits=20).h_float * math.pi


def _terms(table: DivisorTable, M_prime: int, theta0: float):
    if M_prime > table.N:
        raise ValueError(f"M_prime={M_prime} exceeds table range N={table.N}")
    n = np.nonzero(table.dhat[1:M_prime + 1])[0] + 1
    amp = table.dhat[n].astype(np.float64) * n.astype(np.float64) ** (theta0 - 1)
    return n.astype(np.float64), amp


def _basis(a, table, y, omega, M_prime):
    """(C, S): y^theta0 * sum amp_n cos/sin(omega (y n)^(1/2alpha))."""
    dc = derive_constants(a, digits=20)
    theta0, inv2a = float(dc.theta0), 1.0 / float(2 * dc.alpha)
    n, amp = _terms(table, M_prime, theta0)
    y = np.asarray(y, dtype=np.float64)
    u = y**inv2a
    nu = n**inv2a
    C = np.empty_like(y)
    S = np.empty_like(y)
    for s in range(0, y.size, _BLOCK):
        ph = omega * u[s:s + _BLOCK, None] * nu[None, :]
        C[s:s + _BLOCK] = np.cos(ph) @ amp
        S[s:s + _BLOCK] = np.sin(ph) @ amp
    scale = y**theta0
    return C * scale, S * scale


def eval_truncated(params: TruncatedSeriesParams, table: DivisorTable, y):
    y_arr = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if np.any(y_arr < 1):
        raise ValueError("y must be >= 1")
    if params.kappa == 0:
        out = np.zeros_like(y_arr)
    else:
        C, S = _basis(params.a, table, y_arr, params.omega, params.M_prime)
        c, s = math.cos(math.pi * params.phase), math.sin(math.pi * params.phase)
        out = params.kappa * (c * C - s * S)
    return float(out[0]) if np.ndim(y) == 0 else out


@dataclass
class CalibrationResult:
    params: TruncatedSeriesParams
    residual_ratio: float
    nominal_omega: float
    peak_omega: float
    omega_ratio: float
    peak_significance: float
    window: tuple
    samples: int
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = to_jsonable(self)
        d["schema"] = SCHEMA
        return d


def periodogram(u, f, freqs):
    """Hann-tapered power |sum w_i f_i du_i exp(-i omega u_i)|^2 on ``freqs``."""
    span = u[-1] - u[0]
    w = np.sin(np.pi * (u - u[0]) / span) ** 2 * np.gradient(u)
    g = w * f
    P = np.empty(freqs.size)
    for s in range(0, freqs.size, _BLOCK):
        ph = np.outer(freqs[s:s + _BLOCK], u)
        P[s:s + _BLOCK] = (np.cos(ph) @ g) ** 2 + (np.sin(ph) @ g) ** 2
    return P


def _fit_linear(delta, C, S):
    X = np.column_stack([C, S])
    coef, *_ = np.linalg.lstsq(X, delta, rcond=None)
    resid = delta - X @ coef
    return coef, float(np.mean(resid**2))


def fit_params(a, table, y, delta, omega, M_prime):
    """Least-squares (kappa, phase) at fixed omega; returns (kappa, phase, mean square residual)."""
    C, S = _basis(a, table, y, omega, M_prime)
    (A, B), ms = _fit_linear(delta, C, S)
    # kappa cos(phase pi) = A, -kappa sin(phase pi) = B
    kappa = math.hypot(A, B)
    phase = math.atan2(-B, A) / math.pi
    if phase <= -1:
        phase += 2
    return kappa, phase, ms


def calibrate_samples(a, table, y, delta, M_prime: int = 1000, band=None,
                      fit_terms: int | None = None, min_rel_power: float = 0.1) -> CalibrationResult:
    """Calibrate against given samples (y_i, Delta_i), y ascending."""
    a = as_tuple(a)
    y = np.asarray(y, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)
    dc = derive_constants(a, digits=20)
    inv2a, theta0 = 1.0 / float(2 * dc.alpha), float(dc.theta0)
    u = y**inv2a
    f = delta / y**theta0
    nom = nominal_omega(a)
    lo, hi = band if band is not None else (0.5 * nom, 4.0 * a.a[-1] * nom)
    span = u[-1] - u[0]
    res = 2 * math.pi / span
    freqs = np.arange(lo, hi, res / 8)
    if freqs.size < 8:
        raise CalibrationError(f"window too short: u-span {span:.3g} resolves nothing in [{lo:.3g}, {hi:.3g}]")
    P = periodogram(u, f, freqs)
    med = float(np.median(P))
    interior = (P[1:-1] > P[:-2]) & (P[1:-1] >= P[2:])
    peaks = np.nonzero(interior)[0] + 1
    good = [i for i in peaks if P[i] > 3 * med and P[i] >= min_rel_power * P.max()]
    if not good:
        raise CalibrationError("no periodogram peak above 3x median")
    i = good[0]
    # parabolic refinement on the log power
    l0, l1, l2 = np.log(P[i - 1:i + 2])
    denom = l0 - 2 * l1 + l2
    off = 0.5 * (l0 - l2) / denom if denom != 0 else 0.0
    peak = float(freqs[i] + off * (freqs[1] - freqs[0]))
    sig = float(P[i] / med) if med > 0 else math.inf

    m_fit = min(M_prime, fit_terms) if fit_terms else M_prime

    def objective(om):
        return fit_params(a, table, y, delta, om, m_fit)[2]

    opt = optimize.minimize_scalar(objective, bounds=(peak - res / 2, peak + res / 2),
                                   method="bounded", options={"xatol": 1e-10 * peak})
    omega = float(opt.x)
    kappa, phase, ms = fit_params(a, table, y, delta, omega, M_prime)
    ratio = ms / float(np.mean(delta**2))
    params = TruncatedSeriesParams(a.a, M_prime, kappa, phase, omega)
    return CalibrationResult(params, ratio, nom, peak, omega / nom, sig,
                             (float(y[0]), float(y[-1])), int(y.size))


def sample_points(window, samples: int) -> np.ndarray:
    """Distinct half-integers spread evenly over the window."""
    y1, y2 = window
    base = np.floor(np.linspace(y1, y2 - 1, samples))
    return np.unique(base) + 0.5


def calibrate(a, table: DivisorTable, M, window, samples: int = 10_000,
              M_prime: int = 1000, **kw) -> CalibrationResult:
    """Calibrate against Delta(a;y) measured at half-integers in ``window``."""
    a = as_tuple(a)
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    y1, y2 = window
    if not (1 <= y1 < y2 <= table.N):
        raise ValueError(f"window {window} outside table range [1, {table.N}]")
    y = sample_points(window, samples)
    delta = delta_at(table, M, y)
    out = calibrate_samples(a, table, y, delta, M_prime, **kw)
    out.window = (float(y1), float(y2))
    return out


def write_overlay_csv(path, y, delta, r1):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y", "delta", "R1"])
        for row in zip(y, delta, r1):
            w.writerow([repr(float(v)) for v in row])


def k1_constant(kappa: float, series_value: float, a) -> float:
    """kappa^2/2 * sum dhat^2 n^-(2-(k-1)/2alpha) / (1 + (k-1)/2alpha)."""
    a = as_tuple(a)
    e = float(a.k - 1) / float(2 * a.alpha)
    return kappa**2 / 2 * series_value / (1 + e)
