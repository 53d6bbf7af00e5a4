"""Truncated Laurent series with error bounds, and zeta expansions.

Zeta Taylor/Laurent coefficients come from one Euler-Maclaurin kernel
expanded as a power series in t = w - w0:

    zeta(w) = sum_{n<N} n^-w + N^(1-w)/(w-1) + N^-w/2
              + sum_{j=1}^{M} B_2j/(2j)! (w)_(2j-1) N^(1-w-2j) + R_M(w)

with |R_M(w)| <= 4 |(w)_2M| N^(1-Re w-2M) / ((2 pi)^2M (Re w + 2M - 1)).
Every term is analytic in t apart from N^(1-w)/(w-1) at w0 = 1, which
supplies the pole. Coefficient bounds for R_M follow from Cauchy's
estimate on |t| = 1.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

GUARD_DIGITS = 20
MAX_ORDER = 30
MAX_EM_DEPTH = 400


class PrecisionError(ArithmeticError):
    pass


def _mp(q) -> mpf:
    q = Fraction(q)
    return mpf(q.numerator) / q.denominator


@dataclass
class LaurentSeries:
    """sum_i coeffs[i] * t^(valuation + i) + O(t^(valuation + len(coeffs))).

    ``errors[i]`` bounds the absolute error of ``coeffs[i]``.
    """

    center: Fraction
    valuation: int
    coeffs: list
    errors: list

    def __post_init__(self):
        if len(self.errors) != len(self.coeffs):
            raise ValueError("coeffs and errors differ in length")

    @property
    def top(self) -> int:
        """Highest order whose coefficient is known."""
        return self.valuation + len(self.coeffs) - 1

    def __getitem__(self, order: int):
        i = order - self.valuation
        if i < 0:
            return mpf(0)
        if i >= len(self.coeffs):
            raise IndexError(f"order {order} beyond truncation {self.top}")
        return self.coeffs[i]

    def error(self, order: int):
        i = order - self.valuation
        return mpf(0) if i < 0 else self.errors[i]

    def residue(self):
        return self[-1]

    def truncate(self, length: int) -> "LaurentSeries":
        return LaurentSeries(self.center, self.valuation, self.coeffs[:length], self.errors[:length])

    def scale_variable(self, c) -> "LaurentSeries":
        """Series of f(c*t) given f(t)."""
        c = mpf(c)
        co, er = [], []
        for i, (v, e) in enumerate(zip(self.coeffs, self.errors)):
            f = c ** (self.valuation + i)
            co.append(v * f)
            er.append(e * abs(f))
        return LaurentSeries(self.center, self.valuation, co, er)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            c = mpf(other)
            return LaurentSeries(self.center, self.valuation, [v * c for v in self.coeffs],
                                 [e * abs(c) for e in self.errors])
        n = min(len(self.coeffs), len(other.coeffs))
        A, B, eA, eB = self.coeffs, other.coeffs, self.errors, other.errors
        co, er = [], []
        for i in range(n):
            s = mpf(0)
            e = mpf(0)
            for j in range(i + 1):
                s += A[j] * B[i - j]
                e += abs(A[j]) * eB[i - j] + eA[j] * abs(B[i - j]) + eA[j] * eB[i - j]
            co.append(s)
            er.append(e)
        return LaurentSeries(self.center, self.valuation + other.valuation, co, er)

    __rmul__ = __mul__

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        lo = min(self.valuation, other.valuation)
        hi = min(self.top, other.top)
        co = [self[o] + other[o] for o in range(lo, hi + 1)]
        er = [self.error(o) + other.error(o) for o in range(lo, hi + 1)]
        return LaurentSeries(self.center, lo, co, er)


# --------------------------------------------------------------------------
# power series helpers (plain coefficient lists, length n)


def _ps_mul(A, B, n):
    return [mpmath.fsum(A[j] * B[i - j] for j in range(i + 1) if j < len(A) and i - j < len(B))
            for i in range(n)]


def _ps_exp_linear(c, n):
    """Coefficients of exp(c t)."""
    out = [mpf(1)]
    for i in range(1, n):
        out.append(out[-1] * c / i)
    return out


def _ps_inv_linear(b, n):
    """Coefficients of 1/(b + t)."""
    return [(-1) ** i / b ** (i + 1) for i in range(n)]


def _em_remainder_bound(w0: mpf, N: int, M: int, rho: mpf) -> mpf:
    sigma = w0 - rho
    if sigma + 2 * M - 1 <= 0:
        return mpmath.inf
    poch = mpf(1)
    for i in range(2 * M):
        poch *= abs(w0 + i) + rho
    return 4 * poch * mpf(N) ** (1 - sigma - 2 * M) / ((2 * mpmath.pi) ** (2 * M) * (sigma + 2 * M - 1))


def _em_series(w0: Fraction, n: int, digits: int, N: int | None = None, max_depth: int = MAX_EM_DEPTH):
    """Euler-Maclaurin expansion of zeta(w0 + t); returns (valuation, coeffs, errors)."""
    target = mpf(10) ** (-(digits + 5))
    rho = mpf(1)
    w = _mp(w0)
    pole = w0 == 1
    if N is None:
        N = max(12, digits + 10, int(abs(float(w0))) + 12)
    M = 1
    while True:
        bound = _em_remainder_bound(w, N, M, rho)
        if bound < target * rho ** (n + 1):
            break
        M += 1
        if M > max_depth:
            raise PrecisionError(
                f"Euler-Maclaurin depth {max_depth} cannot reach {digits} digits at w0={w0}"
            )
    lnN = mpmath.log(N)
    coeffs = [mpf(0)] * n
    # direct sum: n^-w0 * exp(-t ln n)
    for m in range(2, N):
        c = mpf(m) ** (-w)
        f = -mpmath.log(m)
        for i in range(n):
            coeffs[i] += c
            c = c * f / (i + 1)
    coeffs[0] += 1
    eN = _ps_exp_linear(-lnN, n + 1)
    Nw = mpf(N) ** (-w)
    for i in range(n):
        coeffs[i] += Nw / 2 * eN[i]
    # Bernoulli tail: B_2j/(2j)! (w0+t)_(2j-1) N^(1-w0-2j) exp(-t lnN)
    rising = [mpf(1)]
    for j in range(1, M + 1):
        for shift in ((2 * j - 3, 2 * j - 2) if j > 1 else (0,)):
            # multiply rising by (w0 + shift + t)
            b = w + shift
            rising = [b * rising[i] + (rising[i - 1] if i else 0) for i in range(len(rising))] + [rising[-1]]
        fac = mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j) * mpf(N) ** (1 - w - 2 * j)
        term = _ps_mul(rising, eN, n)
        for i in range(n):
            coeffs[i] += fac * term[i]
    # N^(1-w)/(w-1)
    N1w = mpf(N) ** (1 - w)
    if pole:
        # exp(-t lnN)/t: one extra leading coefficient of order -1
        coeffs = [mpf(0)] + coeffs
        for i in range(n + 1):
            coeffs[i] += eN[i]
        valuation = -1
        coeffs = coeffs[:n + 1]
    else:
        inv = _ps_inv_linear(w - 1, n)
        term = _ps_mul(eN, inv, n)
        for i in range(n):
            coeffs[i] += N1w * term[i]
        valuation = 0
    rounding = mpf(10) ** (-(mpmath.mp.dps - 5))
    errors = []
    for idx, c in enumerate(coeffs):
        order = valuation + idx
        trunc = bound / rho ** order if order >= 0 else mpf(0)
        errors.append(trunc + rounding * (1 + abs(c)) * N)
    return valuation, coeffs, errors


_memo: dict = {}
_memo_lock = threading.Lock()


def zeta_laurent(w0, order: int, precision: int = 50) -> LaurentSeries:
    """Expansion of zeta(w) about w0 through (w - w0)^order.

    At w0 = 1 the series starts at order -1 (simple pole, residue 1) and
    its regular part carries the Stieltjes constants.
    """
    w0 = Fraction(w0)
    if order > MAX_ORDER:
        raise ValueError(f"order {order} > {MAX_ORDER}")
    if order < -1:
        raise ValueError("order must be >= -1")
    key = (w0, order, precision)
    with _memo_lock:
        hit = _memo.get(key)
    if hit is not None:
        return hit
    n = order + 1 if w0 != 1 else order + 1
    n = max(n, 1)
    with mpmath.workdps(precision + GUARD_DIGITS):
        val, co, er = _em_series(w0, n, precision)
        if w0 == 1:
            co, er = co[: order + 2], er[: order + 2]
        else:
            co, er = co[: order + 1], er[: order + 1]
        series = LaurentSeries(w0, val, co, er)
    with _memo_lock:
        _memo.setdefault(key, series)
    return series


def stieltjes(m: int, precision: int = 50) -> mpf:
    """gamma_m from zeta(1+t) = 1/t + sum (-1)^m gamma_m t^m / m!."""
    ser = zeta_laurent(1, max(m, 0), precision)
    with mpmath.workdps(precision + GUARD_DIGITS):
        return (-1) ** m * mpmath.factorial(m) * ser[m]


def zeta_value(w0, precision: int = 50) -> mpf:
    w0 = Fraction(w0)
    if w0 == 1:
        raise ValueError("zeta has a pole at 1")
    return zeta_laurent(w0, 0, precision)[0]
