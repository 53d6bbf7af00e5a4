"""Binary cache for DivisorTable.

Layout (little-endian)::

    b"DVLB"  u32 version  u32 k  u32[k] a  u64 N
    u64[N] d  u64[N] dhat  u64[N] c        (entries for n = 1..N)
    u64 FNV-1a-64 of every preceding byte
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from . import _kernels
from .exponents import as_tuple
from .sieve import DivisorTable

MAGIC = b"DVLB"
VERSION = 1
_CHUNK = 1 << 24


class CacheError(RuntimeError):
    pass


def cache_name(a, N: int) -> str:
    a = as_tuple(a)
    return f"dvlb_v{VERSION}_a{'-'.join(map(str, a.a))}_N{N}.bin"


def header_bytes(a, N: int) -> bytes:
    a = as_tuple(a)
    return MAGIC + struct.pack(f"<II{a.k}IQ", VERSION, a.k, *a.a, N)


def fnv1a64(data, h: int | None = None) -> int:
    buf = np.frombuffer(memoryview(data).cast("B"), dtype=np.uint8)
    hv = _kernels.FNV_OFFSET if h is None else np.uint64(h)
    for start in range(0, buf.size, _CHUNK):
        hv = _kernels.fnv1a_update(hv, buf[start:start + _CHUNK])
    return int(hv)


def write_table(table: DivisorTable, path) -> int:
    """Write atomically (temp file + rename); returns the checksum."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    head = header_bytes(table.a, table.N)
    h = fnv1a64(head)
    with open(tmp, "wb") as fh:
        fh.write(head)
        for arr in (table.d, table.dhat, table.c):
            body = np.ascontiguousarray(arr[1:], dtype="<u8")
            h = fnv1a64(body, h)
            body.tofile(fh)
        fh.write(struct.pack("<Q", h))
    os.replace(tmp, path)
    table.meta["checksum"] = f"{h:016x}"
    return h


def read_table(path, expect_a=None, expect_N: int | None = None, verify: bool = True) -> DivisorTable:
    """Memory-map a cache file. Raises CacheError on any mismatch or corruption."""
    path = Path(path)
    raw = np.memmap(path, dtype=np.uint8, mode="r")
    if raw.size < 16 or bytes(raw[:4]) != MAGIC:
        raise CacheError(f"{path}: bad magic")
    version, k = struct.unpack("<II", bytes(raw[4:12]))
    if version != VERSION:
        raise CacheError(f"{path}: format version {version} != {VERSION}")
    hlen = 12 + 4 * k + 8
    a = struct.unpack(f"<{k}I", bytes(raw[12:12 + 4 * k]))
    (N,) = struct.unpack("<Q", bytes(raw[12 + 4 * k:hlen]))
    if expect_a is not None and tuple(as_tuple(expect_a).a) != tuple(a):
        raise CacheError(f"{path}: tuple {a} != {as_tuple(expect_a).a}")
    if expect_N is not None and N != expect_N:
        raise CacheError(f"{path}: N={N} != {expect_N}")
    total = hlen + 3 * 8 * N + 8
    if raw.size != total:
        raise CacheError(f"{path}: size {raw.size} != {total}")
    (stored,) = struct.unpack("<Q", bytes(raw[-8:]))
    if verify and fnv1a64(raw[:-8]) != stored:
        raise CacheError(f"{path}: checksum mismatch")
    arrays = []
    for i in range(3):
        body = np.memmap(path, dtype="<u8", mode="r", offset=hlen + i * 8 * N, shape=(N,))
        arr = np.empty(N + 1, dtype=np.uint64)
        arr[0] = 0
        arr[1:] = body
        arrays.append(arr)
    meta = {"source": "cache", "path": str(path), "checksum": f"{stored:016x}"}
    return DivisorTable(a, N, *arrays, meta=meta)
