import itertools
import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", message=".*TBB.*")


def tuples_upto(k_max, entry_max):
    out = []
    for k in range(1, k_max + 1):
        out.extend(itertools.combinations_with_replacement(range(1, entry_max + 1), k))
    return out


def brute_force(a, N):
    """d, dhat, c by enumerating every tuple with prod n_j^a_j <= N (Python ints)."""
    d = [0] * (N + 1)
    dh = [0] * (N + 1)
    c = [0] * (N + 1)

    def rec(j, prod, w):
        if j == len(a):
            d[prod] += 1
            dh[prod] += w
            c[prod] += w * w
            return
        m = 1
        while prod * m ** a[j] <= N:
            rec(j + 1, prod * m ** a[j], w * m ** (a[j] - 1))
            m += 1

    rec(0, 1, 1)
    return d, dh, c


@pytest.fixture(scope="session")
def table_cache(tmp_path_factory):
    return tmp_path_factory.mktemp("tables")


@pytest.fixture(scope="session")
def tables(table_cache):
    from asymdiv.sieve import load_or_build

    memo = {}

    def get(a, N):
        key = (tuple(a), int(N))
        if key not in memo:
            memo[key] = load_or_build(a, N, table_cache)
        return memo[key]

    return get


@pytest.fixture(scope="session")
def main_terms():
    from asymdiv.mainterm import compute_main_term

    memo = {}

    def get(a, precision=50):
        key = (tuple(a), precision)
        if key not in memo:
            memo[key] = compute_main_term(a, precision)
        return memo[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
