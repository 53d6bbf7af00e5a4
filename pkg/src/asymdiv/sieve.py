"""Tables of d(a;n), dhat(a;n) and c(a;n) for n <= N.

d     counts ordered tuples with n_1^a_1 ... n_k^a_k = n,
dhat  weights each tuple by prod n_j^(a_j - 1),
c     weights each tuple by prod n_j^(2(a_j - 1)).

All three are built by k successive multiplicative convolutions against the
(weighted) indicator of a_j-th powers, smallest a_j first.
"""

from __future__ import annotations

import logging
import math
import time
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from . import _kernels
from .exponents import DomainError, ExponentTuple, as_tuple

log = logging.getLogger(__name__)

DEFAULT_MEMORY_BUDGET = 3 * 2**30
WEIGHTS = {"d": 0, "dhat": 1, "c": 2}


class SieveOverflowError(OverflowError):
    def __init__(self, n: int, j: int, which: str):
        super().__init__(f"u64 overflow in {which}[{n}] during pass j={j}")
        self.n, self.j, self.which = n, j, which


class MemoryBudgetError(MemoryError):
    pass


def iroot(N: int, a: int) -> int:
    """Largest m with m**a <= N."""
    m = int(round(N ** (1.0 / a)))
    while m**a > N:
        m -= 1
    while (m + 1) ** a <= N:
        m += 1
    return m


def estimate_bytes(N: int) -> int:
    # three finished arrays plus two working buffers
    return 5 * 8 * (N + 1)


class DivisorTable:
    """Arrays indexed by n (slot 0 is unused and zero)."""

    def __init__(self, a, N: int, d, dhat, c, meta: dict | None = None):
        self.a = as_tuple(a)
        self.N = int(N)
        self.d, self.dhat, self.c = d, dhat, c
        self.meta = dict(meta or {})

    def __repr__(self):
        return f"DivisorTable(a={self.a.a}, N={self.N})"

    def array(self, which: str) -> np.ndarray:
        return {"d": self.d, "dhat": self.dhat, "c": self.c}[which]

    def _prefix(self, which: str) -> np.ndarray:
        out = np.empty(self.N + 1, dtype=np.uint64)
        bad = _kernels.checked_cumsum(np.ascontiguousarray(self.array(which)), out)
        if bad >= 0:
            raise SieveOverflowError(int(bad), -1, f"prefix({which})")
        return out

    @cached_property
    def prefix_d(self):
        return self._prefix("d")

    @cached_property
    def prefix_dhat(self):
        return self._prefix("dhat")

    @cached_property
    def prefix_c(self):
        return self._prefix("c")

    @cached_property
    def prefix_dsq(self):
        return np.cumsum(self.d.astype(np.float64) ** 2)

    @cached_property
    def prefix_dhatsq(self):
        return np.cumsum(self.dhat.astype(np.float64) ** 2)

    def prefix(self, which: str) -> np.ndarray:
        return getattr(self, "prefix_" + which)


def build_table(a, N: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> DivisorTable:
    a = as_tuple(a)
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    need = estimate_bytes(N)
    if need > memory_budget:
        raise MemoryBudgetError(
            f"table for N={N} needs ~{need / 2**20:.0f} MiB, budget {memory_budget / 2**20:.0f} MiB"
        )
    a0 = a.a[0]
    top = iroot(N, a0)
    for which, wexp in WEIGHTS.items():
        # largest first-pass weight, checked before anything is allocated
        if top ** (wexp * (a0 - 1)) >= 2**64:
            raise SieveOverflowError(top**a0, 1, which)
    t0 = time.perf_counter()
    arrays = {}
    for which, wexp in WEIGHTS.items():
        cur = np.zeros(N + 1, dtype=np.uint64)
        # first pass straight from the unit at n=1: only m**a0 entries
        m = np.arange(1, top + 1, dtype=np.uint64)
        cur[m**a0] = m ** (wexp * (a0 - 1))
        buf = np.empty_like(cur)
        for j, aj in enumerate(a.a[1:], 2):
            buf[:] = 0
            bad = _kernels.power_pass(cur, buf, np.uint64(N), aj, wexp)
            if bad >= 0:
                raise SieveOverflowError(int(bad), j, which)
            cur, buf = buf, cur
        del buf
        arrays[which] = cur
    elapsed = time.perf_counter() - t0
    log.info("built table a=%s N=%d in %.2fs", a, N, elapsed)
    meta = {"build_seconds": elapsed, "built_at": time.time(), "source": "built"}
    return DivisorTable(a, N, arrays["d"], arrays["dhat"], arrays["c"], meta)


def load_or_build(a, N: int, cache_dir=None, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> DivisorTable:
    """Reuse a cache file in ``cache_dir`` when (a, N, version) match, else build and write one."""
    from . import cachefile

    a = as_tuple(a)
    if cache_dir is None:
        return build_table(a, N, memory_budget)
    path = Path(cache_dir) / cachefile.cache_name(a, N)
    if path.exists():
        try:
            return cachefile.read_table(path, expect_a=a, expect_N=N)
        except cachefile.CacheError as exc:
            log.warning("rebuilding %s: %s", path, exc)
    table = build_table(a, N, memory_budget)
    cachefile.write_table(table, path)
    return table


# --------------------------------------------------------------------------
# summatory functions


_SUMMABLE = ("d", "dhat", "dsq", "dhatsq")


def summatory(table: DivisorTable, x, which: str = "d"):
    """Primed sum over n <= x: the term at integer x counts with weight 1/2.

    ``x`` may be a scalar or an array; returns float(s).
    """
    if which not in _SUMMABLE:
        raise ValueError(f"which must be one of {_SUMMABLE}")
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa < 1) or np.any(xa > table.N):
        raise DomainError(f"x must lie in [1, {table.N}]")
    pre = table.prefix(which)
    n = np.floor(xa).astype(np.int64)
    full = pre[n].astype(np.float64)
    at_int = xa == n
    if np.any(at_int):
        base = which.removesuffix("sq")
        vals = table.array(base)[n].astype(np.float64)
        if which.endswith("sq"):
            vals = vals**2
        full = np.where(at_int, full - vals / 2, full)
    return float(full) if np.ndim(x) == 0 else full


def series_constant(table: DivisorTable, s) -> tuple[float, float]:
    """sum_{n<=N} dhat(n)^2 / n^s and an estimated bound on the omitted tail.

    The tail estimate assumes sum_{n<=x} dhat^2 <= C x^(beta+eps) beyond N,
    with beta = 2 - 1/a_k, eps = (s - beta)/2 and C the largest observed
    ratio over x = N/2^i (i <= 6); partial summation then gives
    tail <= C s/(s-beta-eps) N^(beta+eps-s) - S(N) N^(-s).
    """
    s = Fraction(s)
    beta = 2 - Fraction(1, table.a.a[-1])
    if s <= beta:
        raise DomainError(f"series diverges: s={s} <= 2 - 1/a_k = {beta}")
    sf = float(s)
    n = np.arange(1, table.N + 1, dtype=np.float64)
    sq = table.dhat[1:].astype(np.float64) ** 2
    value = math.fsum(sq * n**-sf)
    eps = float(s - beta) / 2
    expo = float(beta) + eps
    pre = table.prefix_dhatsq
    C = 0.0
    for i in range(7):
        x = table.N >> i
        if x < 1:
            break
        C = max(C, pre[x] / x**expo)
    tail = C * sf / (sf - expo) * table.N ** (expo - sf) - pre[table.N] * table.N**-sf
    return value, max(tail, 0.0)
