"""Exact exponent arithmetic for the asymmetric divisor problem.

Everything here is rational (``fractions.Fraction``) except ``h``, which is
irrational in general and carried as an mpmath real with an error bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath


class DomainError(ValueError):
    """An argument lies outside the region where a formula is defined."""


class InapplicableError(ValueError):
    """A theorem hypothesis fails for the given exponent tuple."""


@dataclass(frozen=True)
class ExponentTuple:
    """Sorted tuple of positive integer exponents ``a_1 <= ... <= a_k``.

    Input order is irrelevant; the stored tuple is always sorted.
    """

    a: tuple[int, ...]

    def __init__(self, a: Iterable[int]):
        vals = tuple(sorted(int(x) for x in a))
        if not vals:
            raise ValueError("exponent tuple must be non-empty")
        if vals[0] < 1:
            raise ValueError(f"exponents must be positive integers, got {vals}")
        object.__setattr__(self, "a", vals)

    @classmethod
    def parse(cls, text: str) -> "ExponentTuple":
        try:
            return cls(int(t) for t in text.replace(" ", "").split(",") if t)
        except ValueError as exc:
            raise ValueError(f"cannot parse exponent tuple {text!r}: {exc}") from None

    @property
    def k(self) -> int:
        return len(self.a)

    @property
    def total(self) -> int:
        return sum(self.a)

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.total, 2)

    def distinct(self) -> list[tuple[int, int]]:
        """(value, multiplicity) pairs in increasing order."""
        out: list[tuple[int, int]] = []
        for v in self.a:
            if out and out[-1][0] == v:
                out[-1] = (v, out[-1][1] + 1)
            else:
                out.append((v, 1))
        return out

    def __iter__(self):
        return iter(self.a)

    def __len__(self):
        return len(self.a)

    def __str__(self):
        return ",".join(map(str, self.a))


def as_tuple(a) -> ExponentTuple:
    return a if isinstance(a, ExponentTuple) else ExponentTuple(a)


# --------------------------------------------------------------------------
# derived constants


@dataclass(frozen=True)
class DerivedConstants:
    alpha: Fraction
    theta0: Fraction
    lambda0: Fraction
    h: mpmath.mpf
    h_error: mpmath.mpf
    digits: int

    @property
    def h_float(self) -> float:
        return float(self.h)


def derive_constants(a, digits: int = 50) -> DerivedConstants:
    a = as_tuple(a)
    alpha = a.alpha
    theta0 = Fraction(a.k - 1, 4) / alpha
    lambda0 = Fraction(a.k + 1, 4) / alpha - 2
    assert lambda0 == theta0 + 1 / (2 * alpha) - 2
    with mpmath.workdps(digits + 15):
        al = mpmath.mpf(alpha.numerator) / alpha.denominator
        h = 2 * al
        for aj in a:
            h *= mpmath.power(aj, -aj / al)
        # guard digits dominate the rounding error of k+1 correctly rounded ops
        err = abs(h) * (a.k + 2) * mpmath.mpf(10) ** (-(digits + 10))
        return DerivedConstants(alpha, theta0, lambda0, h, err, digits)


# --------------------------------------------------------------------------
# g_k, the conjectured mean-square growth parameter


def ivic_r_and_g(a) -> tuple[int, Fraction]:
    a = as_tuple(a)
    if a.k < 2:
        raise DomainError("g_k is undefined for k = 1")
    r = 2
    for cand in range(2, a.k + 1):
        if (cand - 2) * a.a[cand - 1] <= sum(a.a[: cand - 1]):
            r = cand
    g = Fraction(r - 1, 2 * sum(a.a[:r]))
    assert (r == a.k) == ((a.k - 2) * a.a[-1] <= sum(a.a[:-1]))
    return r, g


# --------------------------------------------------------------------------
# moment profile m(sigma)


@dataclass(frozen=True)
class MomentProfile:
    """Piecewise lower bound for m(sigma) on [1/2, 1).

    ``pieces`` holds ``(lo, hi, c0, c1)`` with ``1/m(s) = c0 + c1*s`` on
    ``[lo, hi]``; the last piece is half-open at ``hi = 1``.
    """

    pieces: tuple[tuple[Fraction, Fraction, Fraction, Fraction], ...]
    name: str = "custom"

    def __post_init__(self):
        ps = self.pieces
        if not ps or ps[0][0] != Fraction(1, 2) or ps[-1][1] != 1:
            raise ValueError("profile must cover [1/2, 1)")
        for (lo, hi, c0, c1), nxt in zip(ps, ps[1:] + (None,)):
            if not lo < hi:
                raise ValueError(f"empty piece [{lo}, {hi}]")
            if c1 > 0:
                raise ValueError("1/m must be non-increasing (m non-decreasing)")
            if c0 + c1 * lo > Fraction(1, 4):
                raise ValueError(f"profile violates m >= 4 at sigma={lo}")
            if nxt is not None:
                if nxt[0] != hi:
                    raise ValueError("pieces must be contiguous")
                if c0 + c1 * hi != nxt[2] + nxt[3] * hi:
                    raise ValueError(f"1/m is discontinuous at sigma={hi}")

    @property
    def breakpoints(self) -> list[Fraction]:
        return [p[1] for p in self.pieces[:-1]]

    def piece(self, s: Fraction):
        for p in self.pieces:
            if s <= p[1]:
                return p
        return self.pieces[-1]

    def inv_m(self, s: Fraction) -> Fraction:
        if not Fraction(1, 2) <= s < 1:
            raise DomainError(f"sigma={s} outside [1/2, 1)")
        _, _, c0, c1 = self.piece(s)
        return c0 + c1 * s

    def m(self, s: Fraction) -> Fraction:
        v = self.inv_m(s)
        return 1 / v if v else Fraction(0)

    @classmethod
    def from_breakpoints(cls, points: Sequence[tuple], name: str = "custom") -> "MomentProfile":
        """Build from ``(sigma, 1/m)`` knots; 1/m is interpolated linearly."""
        pts = [(Fraction(s), Fraction(v)) for s, v in points]
        pieces = []
        for (s0, v0), (s1, v1) in zip(pts, pts[1:]):
            c1 = (v1 - v0) / (s1 - s0)
            pieces.append((s0, s1, v0 - c1 * s0, c1))
        return cls(tuple(pieces), name)


DEFAULT_PROFILE = MomentProfile(
    (
        (Fraction(1, 2), Fraction(5, 8), Fraction(3, 4), Fraction(-1)),
        (Fraction(5, 8), Fraction(1), Fraction(1, 3), Fraction(-1, 3)),
    ),
    name="weak",
)


def sigma_floor(a) -> Fraction:
    a = as_tuple(a)
    return 1 - Fraction(1, 2 * a.a[-1])


def critical_sigma(a) -> Fraction:
    """1 - (k-1)/(4 alpha): sigma* must lie strictly below this."""
    a = as_tuple(a)
    return 1 - Fraction(a.k - 1, 4) / a.alpha


def H_sigma(a, sigma, profile: MomentProfile = DEFAULT_PROFILE) -> Fraction:
    a = as_tuple(a)
    sigma = Fraction(sigma)
    total = Fraction(0)
    for j, aj in enumerate(a.a, 1):
        sj = aj * sigma - aj + 1
        if not Fraction(1, 2) <= sj < 1:
            raise DomainError(f"sigma_{j} = {sj} (a_{j}={aj}, sigma={sigma}) outside [1/2, 1)")
        total += profile.inv_m(sj)
    return total


# --------------------------------------------------------------------------
# sigma*


@dataclass(frozen=True)
class SigmaStarResult:
    sigma_star: Fraction
    method: str
    floor_active: bool
    theorem1_applicable: bool
    critical: Fraction = field(default=Fraction(0))


def lemma7_sigma(a) -> tuple[Fraction, int]:
    """Closed-form k=3 bound and the case (1..4) that produced it."""
    a = as_tuple(a)
    if a.k != 3:
        raise DomainError("the closed-form bound needs k = 3")
    a1, a2, a3 = a.a
    if not a3 < a1 + a2:
        raise InapplicableError(f"a3={a3} >= a1+a2={a1 + a2}")
    if 3 * (a2 + a3) <= 7 * a1:
        return 1 - Fraction(5, 4 * (a1 + a2 + a3)), 1
    if 3 * a3 + a1 <= 5 * a2:
        if 3 * a3 < a1 + 3 * a2:
            return 1 - Fraction(3, a1 + 3 * a2 + 3 * a3), 2
        return 1 - Fraction(1, 2 * a3), 3
    return 1 - Fraction(1, 2 * a3), 4


def _affine_H(a: ExponentTuple, profile: MomentProfile, at: Fraction) -> tuple[Fraction, Fraction]:
    """Coefficients (A, B) with H(sigma) = A + B*sigma near ``at`` (a cell interior)."""
    A = B = Fraction(0)
    for aj in a.a:
        _, _, c0, c1 = profile.piece(aj * at - aj + 1)
        # 1/m(aj*s - aj + 1) = c0 + c1*(aj*s - aj + 1)
        A += c0 + c1 * (1 - aj)
        B += c1 * aj
    return A, B


def solve_sigma_star(a, profile: MomentProfile = DEFAULT_PROFILE) -> tuple[Fraction, bool]:
    """Smallest sigma in [floor, 1) with H(sigma) <= 1/2, by walking affine cells.

    Returns ``(sigma, floor_active)``.
    """
    a = as_tuple(a)
    lo = sigma_floor(a)
    half = Fraction(1, 2)
    if H_sigma(a, lo, profile) <= half:
        return lo, True
    cuts = {lo, Fraction(1)}
    for aj in set(a.a):
        for p in profile.breakpoints:
            s = 1 - (1 - p) / aj
            if lo < s < 1:
                cuts.add(s)
    cuts = sorted(cuts)
    for left, right in zip(cuts, cuts[1:]):
        A, B = _affine_H(a, profile, (left + right) / 2)
        if A + B * right <= half:
            if B == 0:
                return left, False
            root = (half - A) / B
            assert left <= root <= right
            if root >= 1:
                break
            return root, False
    raise DomainError(f"H(sigma) stays above 1/2 on [{lo}, 1) for a={a.a}")


def sigma_star(a, profile: MomentProfile = DEFAULT_PROFILE) -> SigmaStarResult:
    """Upper bound for sigma*, exact relative to ``profile``."""
    a = as_tuple(a)
    floor = sigma_floor(a)
    if a.k == 2:
        value, method = floor, "k2-exact"
    elif a.k == 3 and a.a[2] < a.a[0] + a.a[1] and profile == DEFAULT_PROFILE:
        value, case = lemma7_sigma(a)
        method = {1: "lemma7-case1", 2: "lemma7-case2"}.get(case, "lemma7-case3or4")
    else:
        value, _ = solve_sigma_star(a, profile)
        method = "general-solver"
    value = max(value, floor)
    crit = critical_sigma(a)
    return SigmaStarResult(value, method, value == floor, value < crit, crit)


# --------------------------------------------------------------------------
# eta


def eta(a, sigma_star_value) -> Fraction:
    """Exponent saving of the mean-square remainder."""
    a = as_tuple(a)
    s = Fraction(sigma_star_value)
    alpha = a.alpha
    if not s < critical_sigma(a):
        raise InapplicableError(
            f"sigma*={s} is not below 1-(k-1)/(4 alpha)={critical_sigma(a)}"
        )
    num = 2 * (1 - s) - Fraction(a.k - 1) / (2 * alpha)
    den = 2 * alpha * (3 - 2 * s - Fraction(1, a.a[-1])) - 1
    out = num / den
    assert out > 0
    return out


def eta3(a) -> tuple[Fraction, str]:
    a = as_tuple(a)
    if a.k != 3:
        raise DomainError("eta3 needs k = 3")
    a1, a2, a3 = a.a
    if not a3 < a1 + a2:
        raise InapplicableError(f"a3 < a1 + a2 fails: {a3} >= {a1 + a2}")
    S = a1 + a2 + a3
    if 3 * (a2 + a3) <= 7 * a1:
        return 1 / (S * (3 + 2 * S * (1 - Fraction(1, a3)))), "case1"
    if 3 * a3 + a1 <= 5 * a2 and 3 * a3 < a1 + 3 * a2:
        T = a1 + 3 * a2 + 3 * a3
        return Fraction(4 * a1 * a3, S * (S * T * (a3 - 1) + a3 * (5 * a1 + 3 * a2 + 3 * a3))), "case2"
    return Fraction(a1 + a2 - a3, a3 * S * (S - 1)), "case3"


# --------------------------------------------------------------------------
# applicability report


@dataclass(frozen=True)
class ApplicabilityReport:
    a: tuple[int, ...]
    shape_condition: bool
    sigma: SigmaStarResult
    applicable: bool
    main_exponent: Fraction
    ivic_r: int | None
    ivic_g: Fraction | None
    ivic_exponent: Fraction | None
    exponents_coincide: bool | None
    eta: Fraction | None
    eta3: tuple[Fraction, str] | None
    reasons: list[str]


def check_applicability(a, profile: MomentProfile = DEFAULT_PROFILE) -> ApplicabilityReport:
    a = as_tuple(a)
    k, alpha = a.k, a.alpha
    reasons = []
    shape = (k - 2) * a.a[-1] < sum(a.a[:-1])
    if not shape:
        reasons.append("(k-2)a_k >= a_1+...+a_{k-1}")
    sres = sigma_star(a, profile)
    if not sres.theorem1_applicable:
        reasons.append(f"sigma* bound {sres.sigma_star} >= 1-(k-1)/(4 alpha) = {sres.critical}")
    applicable = shape and sres.theorem1_applicable
    main_exp = 1 + Fraction(k - 1) / (2 * alpha)
    r = g = ivic_exp = coincide = None
    if k >= 2:
        r, g = ivic_r_and_g(a)
        ivic_exp = 1 + 2 * g
        coincide = ivic_exp == main_exp
        if r == k:
            assert coincide
    e = eta(a, sres.sigma_star) if applicable else None
    e3 = None
    if k == 3 and a.a[2] < a.a[0] + a.a[1]:
        e3 = eta3(a)
    return ApplicabilityReport(a.a, shape, sres, applicable, main_exp, r, g, ivic_exp,
                               coincide, e, e3, reasons)
