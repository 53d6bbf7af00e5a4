"""Main term H(a;x): residues of prod_j zeta(a_j s) x^s / s at s = 1/v.

For each distinct exponent value v of multiplicity m, the residue is
x^(1/v) * P_v(log x) with deg P_v = m - 1. The residue at s = 0 (equal to
(-1/2)^k) is not part of H and is only reported for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mpf

from .exponents import ExponentTuple, as_tuple
from .laurent import GUARD_DIGITS, LaurentSeries, PrecisionError, zeta_laurent


@dataclass
class MainTerm:
    a: ExponentTuple
    # (exponent 1/v, [p_0, ..., p_{m-1}]) with H = sum x^e * sum p_i log^i x
    terms: list
    errors: list
    precision: int
    truncation: int
    residue_at_zero: Fraction = field(default=Fraction(0))

    def coefficients_float(self):
        return [(float(e), np.array([float(p) for p in poly])) for e, poly in self.terms]

    def to_json(self, digits: int | None = None) -> dict:
        from .jsonio import rational

        digits = digits or self.precision
        return {
            "a": list(self.a.a),
            "precision": self.precision,
            "terms": [
                {
                    "exponent": rational(e),
                    "logpoly": [mpmath.nstr(p, digits, strip_zeros=False) for p in poly],
                    "errors": [mpmath.nstr(err, 3) for err in errs],
                }
                for (e, poly), errs in zip(self.terms, self.errors)
            ],
            "residue_at_zero": rational(self.residue_at_zero),
        }


def _factor(aj: int, v: int, length: int, precision: int) -> LaurentSeries:
    """zeta(aj * s) expanded in t = s - 1/v."""
    w0 = Fraction(aj, v)
    if w0 == 1:
        base = zeta_laurent(1, length - 2, precision)
    else:
        base = zeta_laurent(w0, length - 1, precision)
    return base.scale_variable(aj)


def compute_main_term(a, precision: int = 50, truncation: int | None = None) -> MainTerm:
    """Residue polynomials for every distinct exponent value.

    ``truncation`` is the number of Laurent terms kept per factor; the
    default is the pole order plus two.
    """
    a = as_tuple(a)
    terms, errors = [], []
    tol = mpf(10) ** (-precision)
    with mpmath.workdps(precision + GUARD_DIGITS):
        for v, mult in a.distinct():
            length = max(truncation or mult + 2, mult)
            prod = None
            for aj in a.a:
                f = _factor(aj, v, length, precision).truncate(length)
                prod = f if prod is None else prod * f
            assert prod.valuation == -mult
            s0 = mpf(1) / v
            poly, perr = [], []
            for l in range(mult):
                acc, err = mpf(0), mpf(0)
                for i in range(l, mult):
                    w = (-1) ** (i - l) * s0 ** (-(i - l) - 1) / mpmath.factorial(l)
                    acc += prod[-1 - i] * w
                    err += prod.error(-1 - i) * abs(w)
                poly.append(acc)
                perr.append(err)
                if err > tol * max(1, abs(acc)):
                    raise PrecisionError(
                        f"coefficient log^{l} at exponent 1/{v} has error {mpmath.nstr(err, 3)}"
                    )
            terms.append((Fraction(1, v), poly))
            errors.append(perr)
    return MainTerm(a, terms, errors, precision, truncation or 0, Fraction(-1, 2) ** a.k)


def eval_main_term(M: MainTerm, x) -> float:
    """H(x) for scalar x >= 1, evaluated in high precision."""
    if x < 1:
        raise ValueError("x must be >= 1")
    with mpmath.workdps(M.precision + GUARD_DIGITS):
        X = mpf(x)
        L = mpmath.log(X)
        total = mpf(0)
        for e, poly in M.terms:
            total += X ** (mpf(e.numerator) / e.denominator) * mpmath.polyval(poly[::-1], L)
        return float(total)


def eval_main_term_array(M: MainTerm, x) -> np.ndarray:
    """Vectorised float64 evaluation for quadrature and sampling."""
    x = np.asarray(x, dtype=np.float64)
    L = np.log(x)
    out = np.zeros_like(x)
    for e, poly in M.coefficients_float():
        out += x**e * np.polyval(poly[::-1], L)
    return out
