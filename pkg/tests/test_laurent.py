from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymdiv import laurent
from asymdiv.laurent import LaurentSeries, PrecisionError, stieltjes, zeta_laurent, zeta_value


def close(x, y, digits):
    return abs(x - y) <= mpmath.mpf(10) ** (-digits) * max(1, abs(y))


@pytest.mark.parametrize("m", range(6))
def test_stieltjes_against_mpmath(m):
    with mpmath.workdps(70):
        assert close(stieltjes(m, 50), mpmath.stieltjes(m), 48)


@pytest.mark.parametrize("w0", [F(1, 2), F(2), F(3, 4), F(1, 3), F(5, 2), F(-1, 2)])
def test_taylor_coefficients(w0):
    s = zeta_laurent(w0, 4, 50)
    with mpmath.workdps(70):
        w = mpmath.mpf(w0.numerator) / w0.denominator
        for i in range(5):
            ref = mpmath.zeta(w, 1, i) / mpmath.factorial(i)
            assert close(s[i], ref, 45), (w0, i)
            assert s.error(i) < mpmath.mpf(10) ** -45


def test_pole_structure():
    s = zeta_laurent(1, 3, 40)
    assert s.valuation == -1
    assert s.residue() == 1
    with mpmath.workdps(60):
        assert close(s[0], mpmath.euler, 38)


def test_zeta_value():
    with mpmath.workdps(60):
        assert close(zeta_value(F(1, 2), 50), mpmath.zeta(mpmath.mpf(1) / 2), 48)
        assert close(zeta_value(2, 50), mpmath.pi**2 / 6, 48)
    with pytest.raises(ValueError):
        zeta_value(1)


def test_order_limits():
    with pytest.raises(ValueError):
        zeta_laurent(2, laurent.MAX_ORDER + 1)
    with pytest.raises(ValueError):
        zeta_laurent(2, -2)


def test_depth_exhaustion_raises():
    with mpmath.workdps(80):
        with pytest.raises(PrecisionError, match="depth"):
            laurent._em_series(F(1, 2), 3, 60, N=12, max_depth=2)


def _series(center, val, coeffs):
    return LaurentSeries(center, val, [mpmath.mpf(c) for c in coeffs], [mpmath.mpf(0)] * len(coeffs))


def test_multiply_and_residue():
    # (1/t + 2 + 3t)(1 + t) = 1/t + 3 + 5t + ...
    p = _series(0, -1, [1, 2, 3]) * _series(0, 0, [1, 1, 0])
    assert p.valuation == -1
    assert [p[i] for i in (-1, 0, 1)] == [1, 3, 5]
    assert p.residue() == 1


def test_scale_variable():
    s = _series(0, -1, [1, 2, 4]).scale_variable(2)
    # f(2t): 1/(2t) + 2 + 8t
    assert [s[i] for i in (-1, 0, 1)] == [mpmath.mpf(1) / 2, 2, 8]


@settings(max_examples=40)
@given(st.lists(st.sampled_from([F(1, 2), F(2, 3), F(3, 2), F(2), F(1)]), min_size=2, max_size=4))
def test_residue_invariant_under_reordering(centers):
    with mpmath.workdps(50):
        factors = [zeta_laurent(c, 4, 30) for c in centers]
        fwd = factors[0]
        for f in factors[1:]:
            fwd = fwd * f
        rev = factors[-1]
        for f in reversed(factors[:-1]):
            rev = rev * f
        if fwd.valuation <= -1:
            assert abs(fwd.residue() - rev.residue()) <= fwd.error(-1) + rev.error(-1) + mpmath.mpf(10) ** -40
        for i in range(fwd.valuation, fwd.top + 1):
            assert abs(fwd[i] - rev[i]) <= fwd.error(i) + rev.error(i) + mpmath.mpf(10) ** -40
