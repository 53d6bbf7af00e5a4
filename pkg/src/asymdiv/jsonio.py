"""JSON helpers: exact rationals travel as {"num": int, "den": int}."""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction

import mpmath
import numpy as np

SCHEMA = "asymdiv/1"


def rational(q) -> dict:
    q = Fraction(q)
    return {"num": q.numerator, "den": q.denominator}


def from_rational(obj) -> Fraction:
    return Fraction(int(obj["num"]), int(obj["den"]))


def to_jsonable(obj):
    if isinstance(obj, Fraction):
        return rational(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj if np.isfinite(obj) else str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return to_jsonable(float(obj))
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, mpmath.mpf):
        return mpmath.nstr(obj, 30)
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "a") and hasattr(obj.a, "a"):
        return list(obj.a.a)
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True)
