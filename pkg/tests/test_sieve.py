import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asymdiv import _kernels, cachefile
from asymdiv.exponents import DomainError
from asymdiv.sieve import (
    MemoryBudgetError,
    SieveOverflowError,
    build_table,
    iroot,
    load_or_build,
    series_constant,
    summatory,
)

from conftest import brute_force, tuples_upto

ORACLE_TUPLES = tuples_upto(3, 4)


def test_oracle_tuple_count():
    assert len(ORACLE_TUPLES) == 34


@pytest.mark.parametrize("a", ORACLE_TUPLES, ids=lambda t: "-".join(map(str, t)))
def test_matches_brute_force(a):
    N = 10_000
    t = build_table(a, N)
    d, dh, c = brute_force(a, N)
    assert t.d.tolist() == d
    assert t.dhat.tolist() == dh
    assert t.c.tolist() == c


@pytest.mark.parametrize("a", [(1, 2, 3), (2, 2, 3), (1, 1, 4)])
def test_permutation_invariance(a):
    t1 = build_table(a, 3000)
    t2 = build_table(tuple(reversed(a)), 3000)
    for w in ("d", "dhat", "c"):
        assert np.array_equal(t1.array(w), t2.array(w))


@pytest.mark.parametrize("a", [(1, 1), (1, 1, 1), (2, 3), (1, 2, 2)])
def test_dhat_relations(a):
    t = build_table(a, 5000)
    d, dh = t.d[1:], t.dhat[1:]
    assert np.all(dh[d >= 1] >= 1)
    assert np.all((d == 0) == (dh == 0))
    if set(a) == {1}:
        assert np.array_equal(d, dh)


def test_known_values():
    t = build_table((1, 1), 100)
    assert t.d[12] == 6 and t.d[97] == 2 and t.d[0] == 0
    t = build_table((1, 2), 100)
    # 72 = n1 * n2^2 with n2 in {1,2,3,6}; dhat weights by n2
    assert t.d[72] == 4 and t.dhat[72] == 1 + 2 + 3 + 6


@given(st.integers(1, 10**15), st.integers(1, 12))
def test_iroot(N, a):
    m = iroot(N, a)
    assert m**a <= N < (m + 1) ** a


# ---------------------------------------------------------------- errors


def test_memory_budget():
    with pytest.raises(MemoryBudgetError):
        build_table((1, 1), 10**6, memory_budget=1000)


def test_power_pass_reports_overflow():
    old = np.array([0, 2**63, 2**63], dtype=np.uint64)
    new = np.zeros(3, dtype=np.uint64)
    assert _kernels.power_pass(old, new, np.uint64(2), 1, 0) == 2


def test_first_pass_weight_overflow():
    # c weights m^(2(a-1)); for a=40, m=2 gives 2^78
    with pytest.raises(SieveOverflowError):
        build_table((40,), 2**40, memory_budget=2**60)


def test_checked_cumsum_overflow():
    arr = np.array([0, 2**63, 2**63], dtype=np.uint64)
    out = np.empty_like(arr)
    assert _kernels.checked_cumsum(arr, out) == 2


# ---------------------------------------------------------------- cache


def test_cache_round_trip(tmp_path):
    t = build_table((1, 2, 3), 20_000)
    path = tmp_path / cachefile.cache_name(t.a, t.N)
    h = cachefile.write_table(t, path)
    back = cachefile.read_table(path, expect_a=(1, 2, 3), expect_N=20_000)
    assert back.meta["checksum"] == f"{h:016x}"
    for w in ("d", "dhat", "c"):
        assert np.array_equal(back.array(w), t.array(w))
    assert not list(tmp_path.glob("*.tmp"))


def test_fnv_reference():
    # published FNV-1a 64-bit vectors
    assert cachefile.fnv1a64(b"") == 0xCBF29CE484222325
    assert cachefile.fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert cachefile.fnv1a64(b"foobar") == 0x85944171F73967E8
    assert cachefile.fnv1a64(b"bar", cachefile.fnv1a64(b"foo")) == cachefile.fnv1a64(b"foobar")


@pytest.mark.parametrize("where", ["body", "trailer"])
def test_cache_corruption_detected(tmp_path, where):
    t = build_table((1, 1), 5000)
    path = tmp_path / "t.bin"
    cachefile.write_table(t, path)
    raw = bytearray(path.read_bytes())
    raw[-3 if where == "trailer" else 500] ^= 0x10
    path.write_bytes(bytes(raw))
    with pytest.raises(cachefile.CacheError, match="checksum"):
        cachefile.read_table(path)


def test_cache_header_mismatches(tmp_path):
    t = build_table((1, 1), 1000)
    path = tmp_path / "t.bin"
    cachefile.write_table(t, path)
    with pytest.raises(cachefile.CacheError, match="tuple"):
        cachefile.read_table(path, expect_a=(1, 2))
    with pytest.raises(cachefile.CacheError, match="N="):
        cachefile.read_table(path, expect_N=999)
    path.write_bytes(path.read_bytes()[:-100])
    with pytest.raises(cachefile.CacheError, match="size"):
        cachefile.read_table(path)
    path.write_bytes(b"XXXX" + bytes(40))
    with pytest.raises(cachefile.CacheError, match="magic"):
        cachefile.read_table(path)


def test_load_or_build_rebuilds_corrupt(tmp_path):
    t = load_or_build((1, 2), 3000, tmp_path)
    assert t.meta["source"] == "built"
    path = tmp_path / cachefile.cache_name((1, 2), 3000)
    assert load_or_build((1, 2), 3000, tmp_path).meta["source"] == "cache"
    raw = bytearray(path.read_bytes())
    raw[100] ^= 1
    path.write_bytes(bytes(raw))
    again = load_or_build((1, 2), 3000, tmp_path)
    assert again.meta["source"] == "built"
    assert np.array_equal(again.d, t.d)


# ---------------------------------------------------------------- summatory


def test_summatory_halving():
    t = build_table((1, 1), 100)
    assert summatory(t, 10.5) == 27
    assert summatory(t, 10) == 27 - 4 / 2
    assert summatory(t, 1) == 0.5
    xs = np.array([1.0, 10.0, 10.5, 100.0])
    assert summatory(t, xs).tolist() == [0.5, 25.0, 27.0, summatory(t, 100.0)]


def test_summatory_dhat_and_squares():
    t = build_table((1, 2), 200)
    n = int(150)
    assert summatory(t, n + 0.5, "dhat") == int(t.dhat[: n + 1].sum())
    assert summatory(t, n + 0.5, "dsq") == float((t.d[: n + 1].astype(float) ** 2).sum())
    assert summatory(t, 150, "dhatsq") == float((t.dhat[:151].astype(float) ** 2).sum()) - t.dhat[150] ** 2 / 2


def test_summatory_domain():
    t = build_table((1, 1), 100)
    with pytest.raises(DomainError):
        summatory(t, 0.5)
    with pytest.raises(DomainError):
        summatory(t, 101)
    with pytest.raises(ValueError):
        summatory(t, 5, "c2")


@given(st.floats(1, 2000))
def test_summatory_monotone_in_x(x):
    t = _small_table()
    assert summatory(t, x) <= summatory(t, min(x + 0.5, 2000))


_SMALL = {}


def _small_table():
    if "t" not in _SMALL:
        _SMALL["t"] = build_table((1, 1, 2), 2000)
    return _SMALL["t"]


# ---------------------------------------------------------------- series constant


def test_series_constant_dirichlet_sigma3():
    # sum d(n)^2 n^-s = zeta(s)^4 / zeta(2s)
    t = build_table((1, 1), 200_000)
    value, tail = series_constant(t, 3)
    with mpmath.workdps(30):
        exact = float(mpmath.zeta(3) ** 4 / mpmath.zeta(6))
    assert value < exact
    assert exact - value <= tail
    assert tail < 1e-5


def test_series_constant_divergent():
    t = build_table((1, 2), 1000)
    with pytest.raises(DomainError):
        series_constant(t, 1.5)


def test_sandwich_small_scale():
    from asymdiv.acceptance import sandwich_ratios

    t = build_table((1, 2), 2**17)
    xs, r, ok = sandwich_ratios(t)
    assert ok
    assert xs[0] == 2**17 and xs[-1] == 2**11
    assert all(math.isfinite(v) and v > 0 for v in r)
