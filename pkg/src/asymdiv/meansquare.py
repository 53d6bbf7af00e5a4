"""Delta(a;x) and the mean square V(T) = int_1^T Delta^2(a;x) dx.

On each interval between consecutive integers the counting sum is a
constant D_m, so V(T) is a sum of integrals of (D_m - H(x))^2 with H
analytic; each is done by Gauss-Legendre and the pieces are reduced
with math.fsum.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .exponents import as_tuple
from .jsonio import SCHEMA, to_jsonable
from .mainterm import MainTerm, eval_main_term, eval_main_term_array
from .sieve import DivisorTable, summatory

_CHUNK = 1 << 17


class FitError(ValueError):
    pass


def delta_at(table: DivisorTable, M: MainTerm, x):
    """Primed counting sum minus H; scalar or array x in [1, N]."""
    if np.ndim(x) == 0:
        return summatory(table, x, "d") - eval_main_term(M, float(x))
    x = np.asarray(x, dtype=np.float64)
    return summatory(table, x, "d") - eval_main_term_array(M, x)


def predicted_exponent(a) -> Fraction:
    a = as_tuple(a)
    return 1 + Fraction(a.k - 1) / (2 * a.alpha)


def checkpoints(T: float) -> list[float]:
    """T/2^i for i = 0 .. floor(log2 T) - 4, ascending."""
    if T <= 1:
        return [1.0]
    top = max(0, int(math.floor(math.log2(T))) - 4)
    return sorted(T / 2**i for i in range(top + 1))


@dataclass
class MeanSquareProfile:
    a: tuple
    T: list
    V: list
    quad_order: int
    quad_error: float
    quad_warning: bool
    predicted_exponent: Fraction
    predicted_constant: float | None = None
    fit: dict = field(default_factory=dict)

    @property
    def ratios(self) -> list[float]:
        p = float(self.predicted_exponent)
        return [v / t**p for t, v in zip(self.T, self.V)]

    def to_json(self) -> dict:
        d = to_jsonable(self)
        d["ratios"] = self.ratios
        d["schema"] = SCHEMA
        return d

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["T", "V", "ratio"])
            for t, v, r in zip(self.T, self.V, self.ratios):
                w.writerow([repr(t), repr(v), repr(r)])

    def write_loglog(self, path):
        with open(path, "w") as fh:
            fh.write("# log10(T) log10(V)\n")
            for t, v in zip(self.T, self.V):
                if v > 0:
                    fh.write(f"{math.log10(t)!r} {math.log10(v)!r}\n")

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)


def _interval_integrals(table, M, lo, hi, order):
    """Integrals of (D - H)^2 over [lo_i, hi_i] with no integer strictly inside."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    out = np.empty(lo.size)
    pre = table.prefix_d
    for s in range(0, lo.size, _CHUNK):
        l, h = lo[s:s + _CHUNK], hi[s:s + _CHUNK]
        D = pre[np.floor(l).astype(np.int64)].astype(np.float64)
        half = (h - l) / 2
        x = (l + h)[:, None] / 2 + half[:, None] * nodes[None, :]
        f = (D[:, None] - eval_main_term_array(M, x)) ** 2
        out[s:s + _CHUNK] = half * (f @ weights)
    return out


def mean_square(table: DivisorTable, M: MainTerm, T: float, quad_order: int = 8,
                points=None, rtol: float = 1e-9) -> MeanSquareProfile:
    """V at geometric checkpoints (or at ``points``) up to T."""
    if not 4 <= quad_order <= 16:
        raise ValueError("quad_order must lie in [4, 16]")
    if T > table.N:
        raise ValueError(f"T={T} exceeds table range N={table.N}")
    if T < 1:
        raise ValueError("T must be >= 1")
    cps = sorted(points) if points is not None else checkpoints(T)
    cuts = np.union1d(np.arange(1, math.floor(T) + 1, dtype=np.float64), np.array(cps, dtype=np.float64))
    cuts = cuts[(cuts >= 1) & (cuts <= T)]
    lo, hi = cuts[:-1], cuts[1:]
    pieces = _interval_integrals(table, M, lo, hi, quad_order)
    coarse = _interval_integrals(table, M, lo, hi, max(4, quad_order // 2))
    # cumulative fsum at each checkpoint
    ends = np.searchsorted(hi, cps, side="right")
    seg_sums, seg_coarse, prev = [], [], 0
    for e in ends:
        seg_sums.append(math.fsum(pieces[prev:e]))
        seg_coarse.append(math.fsum(coarse[prev:e]))
        prev = e
    V = [math.fsum(seg_sums[: i + 1]) for i in range(len(cps))]
    Vc = math.fsum(seg_coarse)
    qerr = abs(V[-1] - Vc)
    warn = qerr > rtol * max(V[-1], 1e-300)
    a = table.a
    return MeanSquareProfile(a.a, [float(c) for c in cps], V, quad_order, qerr, bool(warn),
                             predicted_exponent(a))


@dataclass
class PowerLawFit:
    slope: float
    constant: float
    slope_stderr: float
    intercept_stderr: float
    residuals: list
    ratios: list
    predicted_exponent: float
    n_points: int


def fit_power_law(profile, skip_low: int = 4) -> PowerLawFit:
    """Least squares of log V against log T over the checkpoints.

    ``profile`` may be a MeanSquareProfile or a ``(T, V)`` pair of sequences.
    ``skip_low`` drops that many of the smallest checkpoints, where the
    lower-order terms of V are still comparable to the leading one.
    """
    if isinstance(profile, MeanSquareProfile):
        T, V, p = profile.T, profile.V, float(profile.predicted_exponent)
    else:
        T, V = profile
        p = float("nan")
    T = np.asarray(T, dtype=np.float64)[skip_low:]
    V = np.asarray(V, dtype=np.float64)[skip_low:]
    if T.size < 5:
        raise FitError(f"need >= 5 checkpoints, have {T.size}")
    if np.any(V <= 0):
        raise FitError("V vanishes at some checkpoint; log-log fit undefined")
    x, y = np.log(T), np.log(V)
    res = stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    out = PowerLawFit(float(res.slope), float(math.exp(res.intercept)), float(res.stderr),
                      float(res.intercept_stderr), resid.tolist(),
                      (V / T**p).tolist() if p == p else [], p, int(T.size))
    if isinstance(profile, MeanSquareProfile):
        profile.fit = to_jsonable(out)
    return out
