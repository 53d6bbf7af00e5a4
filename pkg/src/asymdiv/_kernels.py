"""Compiled inner loops (numba)."""

import numba
import numpy as np

U64_MAX = np.uint64(0xFFFFFFFFFFFFFFFF)
FNV_OFFSET = np.uint64(0xCBF29CE484222325)
FNV_PRIME = np.uint64(0x100000001B3)


@numba.njit(cache=True)
def power_pass(old, new, N, a, weight_exp):
    """new[n * m**a] += old[n] * m**(weight_exp * (a-1)) for all n * m**a <= N.

    Returns -1 on success, otherwise the output index that would overflow.
    ``new`` must be zeroed by the caller.
    """
    m = np.uint64(1)
    while True:
        q = np.uint64(1)
        for _ in range(a):
            q *= m
        if q > N:
            break
        w = np.uint64(1)
        for _ in range(weight_exp * (a - 1)):
            if w > U64_MAX // m:
                return np.int64(q)
            w *= m
        lim = U64_MAX // w
        top = np.int64(N // q)
        for i in range(1, top + 1):
            n = np.uint64(i)
            v = old[n]
            if v == 0:
                continue
            idx = n * q
            if v > lim:
                return np.int64(idx)
            p = v * w
            s = new[idx] + p
            if s < p:
                return np.int64(idx)
            new[idx] = s
        m += np.uint64(1)
    return np.int64(-1)


@numba.njit(cache=True)
def checked_cumsum(arr, out):
    """Prefix sums into ``out``; returns the first index that overflows or -1."""
    acc = np.uint64(0)
    for i in range(arr.shape[0]):
        s = acc + arr[i]
        if s < acc:
            return np.int64(i)
        acc = s
        out[i] = acc
    return np.int64(-1)


@numba.njit(cache=True)
def fnv1a_update(h, data):
    for i in range(data.shape[0]):
        h ^= np.uint64(data[i])
        h *= FNV_PRIME
    return h
