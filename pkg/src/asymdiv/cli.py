"""Command-line driver.

    asymdiv exponents --a 2,3,4
    asymdiv meansquare --a 1,1 --T 1e6 --out runs/
    asymdiv report --a 1,1 --N 1e6 --deterministic
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import exponents as ex
from .jsonio import SCHEMA, rational, to_jsonable
from .laurent import PrecisionError

log = logging.getLogger("asymdiv")

EXIT_OK, EXIT_CONFIG, EXIT_INAPPLICABLE, EXIT_NUMERIC = 0, 2, 3, 4
COMMANDS = ("exponents", "sieve", "main-term", "delta", "meansquare", "voronoi", "report")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    a: ex.ExponentTuple
    N: int = 10**6
    T: float = 10**6
    precision: int = 50
    quad_order: int = 8
    M_prime: int = 1000
    window: tuple = (10_000.0, 20_000.0)
    samples: int = 10_000
    grid: tuple = (1.5, 1000.5, 1.0)
    out: Path = Path("out")
    cache: Path | None = None
    threads: int = 1
    deterministic: bool = False
    require_applicable: bool = False

    def validate(self):
        for key in ("N", "T", "precision", "quad_order", "M_prime", "samples", "threads"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"{key}: must be positive, got {getattr(self, key)}")
        if self.T > self.N:
            raise ConfigError(f"T: {self.T} exceeds N={self.N}")
        if not 4 <= self.quad_order <= 16:
            raise ConfigError(f"quad_order: must lie in [4, 16], got {self.quad_order}")
        w1, w2 = self.window
        if not 1 <= w1 < w2:
            raise ConfigError(f"window: need 1 <= y1 < y2, got {self.window}")


def _num(key, text, integer=False):
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {text!r} as a number") from None
    if integer:
        if v != int(v):
            raise ConfigError(f"{key}: expected an integer, got {text!r}")
        return int(v)
    return v


def _floats(key, text, n):
    parts = [p for p in str(text).replace(":", ",").split(",") if p.strip()]
    if len(parts) != n:
        raise ConfigError(f"{key}: expected {n} comma-separated numbers, got {text!r}")
    return tuple(_num(key, p) for p in parts)


_CONVERT = {
    "a": lambda t: _tuple(t),
    "N": lambda t: _num("N", t, True),
    "T": lambda t: _num("T", t),
    "precision": lambda t: _num("precision", t, True),
    "quad_order": lambda t: _num("quad_order", t, True),
    "M_prime": lambda t: _num("M_prime", t, True),
    "window": lambda t: _floats("window", t, 2),
    "samples": lambda t: _num("samples", t, True),
    "grid": lambda t: _floats("grid", t, 3),
    "out": Path,
    "cache": Path,
    "threads": lambda t: _num("threads", t, True),
    "deterministic": lambda t: str(t).lower() in ("1", "true", "yes", "on"),
    "require_applicable": lambda t: str(t).lower() in ("1", "true", "yes", "on"),
}


def _tuple(text):
    try:
        return ex.ExponentTuple.parse(str(text))
    except ValueError as exc:
        raise ConfigError(f"a: {exc}") from None


def read_config_file(path) -> dict:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERT:
            raise ConfigError(f"{key}: unknown config key (line {lineno})")
        out[key] = val
    return out


def build_config(ns: argparse.Namespace) -> ExperimentConfig:
    raw = read_config_file(ns.config) if ns.config else {}
    for key in _CONVERT:
        val = getattr(ns, key, None)
        if val is not None and val is not False:
            raw[key] = val
    if "a" not in raw:
        raise ConfigError("a: exponent tuple is required (--a 1,1)")
    kw = {k: _CONVERT[k](v) for k, v in raw.items()}
    if "N" in kw and "T" not in kw:
        kw["T"] = float(kw["N"])
    if "T" in kw and "N" not in kw:
        kw["N"] = int(math.ceil(kw["T"]))
    cfg = ExperimentConfig(**kw)
    cfg.validate()
    return cfg


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="asymdiv", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--a", help="exponent tuple, e.g. 1,1 or 2,3,4")
    p.add_argument("--N", help="sieve limit")
    p.add_argument("--T", help="mean-square horizon (<= N)")
    p.add_argument("--precision", help="decimal digits for main-term coefficients")
    p.add_argument("--quad-order", dest="quad_order", help="Gauss-Legendre nodes per interval (4..16)")
    p.add_argument("--M-prime", dest="M_prime", help="truncation length of the oscillatory series")
    p.add_argument("--window", help="calibration window y1,y2")
    p.add_argument("--samples", help="calibration sample count")
    p.add_argument("--grid", help="delta grid start,stop,step")
    p.add_argument("--out", help="output directory")
    p.add_argument("--cache", help="table cache directory")
    p.add_argument("--threads", help="worker cap for compiled kernels")
    p.add_argument("--deterministic", action="store_true", help="omit timestamps and timings")
    p.add_argument("--require-applicable", dest="require_applicable", action="store_true",
                   help="exit 3 when the mean-square hypotheses fail")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


# --------------------------------------------------------------------------
# outputs


class Outputs:
    """Tracks files written so a failed run can remove them."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        p = self.root / name
        self.written.append(p)
        return p

    def json(self, name: str, obj) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")
        return p

    def rollback(self):
        for p in self.written:
            p.unlink(missing_ok=True)
        self.written.clear()


def _envelope(cfg: ExperimentConfig, command: str, body: dict) -> dict:
    out = {"schema": SCHEMA, "command": command, "a": list(cfg.a.a)}
    if not cfg.deterministic:
        out["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    out.update(body)
    return out


# --------------------------------------------------------------------------
# commands


def exponents_report(a, profile=ex.DEFAULT_PROFILE) -> dict:
    a = ex.as_tuple(a)
    dc = ex.derive_constants(a)
    rep = ex.check_applicability(a, profile)
    out = {
        "constants": {
            "alpha": rational(dc.alpha),
            "theta0": rational(dc.theta0),
            "lambda0": rational(dc.lambda0),
            "h": str(dc.h)[:52],
            "h_error": f"{float(dc.h_error):.3e}",
        },
        "sigma_star": {
            "value": rational(rep.sigma.sigma_star),
            "method": rep.sigma.method,
            "floor_active": rep.sigma.floor_active,
            "theorem1_applicable": rep.sigma.theorem1_applicable,
            "critical": rational(rep.sigma.critical),
            "profile": profile.name,
        },
        "applicability": {
            "applicable": rep.applicable,
            "shape_condition": rep.shape_condition,
            "reasons": rep.reasons,
            "main_exponent": rational(rep.main_exponent),
            "ivic_exponent": rational(rep.ivic_exponent) if rep.ivic_exponent is not None else None,
            "exponents_coincide": rep.exponents_coincide,
        },
        "ivic": {"r": rep.ivic_r, "g": rational(rep.ivic_g)} if rep.ivic_r else None,
        "eta": rational(rep.eta) if rep.eta is not None else None,
        "eta3": {"value": rational(rep.eta3[0]), "case": rep.eta3[1]} if rep.eta3 else None,
    }
    return out


def _table(cfg):
    from .sieve import load_or_build

    t = load_or_build(cfg.a, cfg.N, cfg.cache)
    return t


def _table_summary(t, cfg) -> dict:
    out = {"N": t.N, "sum_d": int(t.prefix_d[-1]), "sum_dhat": int(t.prefix_dhat[-1]),
           "sum_c": int(t.prefix_c[-1]), "source": t.meta.get("source")}
    if "checksum" in t.meta:
        out["checksum"] = t.meta["checksum"]
    if not cfg.deterministic and "build_seconds" in t.meta:
        out["build_seconds"] = t.meta["build_seconds"]
    return out


def cmd_exponents(cfg, outs):
    body = exponents_report(cfg.a)
    outs.json("exponents.json", _envelope(cfg, "exponents", body))
    if cfg.require_applicable and not body["applicability"]["applicable"]:
        raise ex.InapplicableError("; ".join(body["applicability"]["reasons"]))
    return body


def cmd_sieve(cfg, outs):
    t = _table(cfg)
    body = {"table": _table_summary(t, cfg)}
    outs.json("sieve.json", _envelope(cfg, "sieve", body))
    return body


def cmd_main_term(cfg, outs):
    from .mainterm import compute_main_term

    M = compute_main_term(cfg.a, cfg.precision)
    body = {"main_term": M.to_json()}
    outs.json("main_term.json", _envelope(cfg, "main-term", body))
    return body


def cmd_delta(cfg, outs):
    from .mainterm import compute_main_term
    from .meansquare import delta_at

    start, stop, step = cfg.grid
    stop = min(stop, cfg.N)
    if start < 1 or step <= 0 or stop < start:
        raise ConfigError(f"grid: bad range {cfg.grid} for N={cfg.N}")
    x = np.arange(start, stop + step / 2, step)
    t = _table(cfg)
    M = compute_main_term(cfg.a, cfg.precision)
    d = delta_at(t, M, x)
    p = outs.path("delta.csv")
    with open(p, "w") as fh:
        fh.write("x,delta\n")
        for xi, di in zip(x, d):
            fh.write(f"{xi!r},{di!r}\n")
    body = {"points": int(x.size), "rms": float(np.sqrt(np.mean(d**2)))}
    outs.json("delta.json", _envelope(cfg, "delta", body))
    return body


def _meansquare(cfg, t, M):
    from .meansquare import FitError, fit_power_law, mean_square

    prof = mean_square(t, M, cfg.T, cfg.quad_order)
    try:
        fit = fit_power_law(prof)
    except FitError as exc:
        log.warning("no power-law fit: %s", exc)
        fit = None
    return prof, fit


def cmd_meansquare(cfg, outs):
    from .mainterm import compute_main_term

    t = _table(cfg)
    M = compute_main_term(cfg.a, cfg.precision)
    prof, fit = _meansquare(cfg, t, M)
    prof.write_csv(outs.path("meansquare.csv"))
    prof.write_loglog(outs.path("meansquare_loglog.dat"))
    body = {"profile": prof.to_json(), "fit": to_jsonable(fit)}
    outs.json("meansquare.json", _envelope(cfg, "meansquare", body))
    return body


def cmd_voronoi(cfg, outs):
    from .mainterm import compute_main_term
    from .meansquare import delta_at
    from .voronoi import calibrate, eval_truncated, sample_points, write_overlay_csv

    if cfg.window[1] > cfg.N:
        raise ConfigError(f"window: {cfg.window} exceeds N={cfg.N}")
    t = _table(cfg)
    M = compute_main_term(cfg.a, cfg.precision)
    res = calibrate(cfg.a, t, M, cfg.window, cfg.samples, cfg.M_prime)
    y = sample_points(cfg.window, min(cfg.samples, 2000))
    write_overlay_csv(outs.path("voronoi_overlay.csv"), y, delta_at(t, M, y), eval_truncated(res.params, t, y))
    body = {"calibration": res.to_json()}
    outs.json("voronoi.json", _envelope(cfg, "voronoi", body))
    return body


def cmd_report(cfg, outs):
    """Full pipeline with pass/fail flags for the thresholds that apply to this tuple."""
    from . import acceptance

    body = acceptance.pipeline_report(cfg)
    outs.json("report.json", _envelope(cfg, "report", body))
    return body


HANDLERS = {
    "exponents": cmd_exponents,
    "sieve": cmd_sieve,
    "main-term": cmd_main_term,
    "delta": cmd_delta,
    "meansquare": cmd_meansquare,
    "voronoi": cmd_voronoi,
    "report": cmd_report,
}


def _error(kind: str, exc: BaseException, code: int) -> int:
    sys.stderr.write(json.dumps({"error": {"type": kind, "exception": type(exc).__name__,
                                           "message": str(exc), "exit_code": code}}) + "\n")
    return code


def main(argv=None) -> int:
    from .sieve import MemoryBudgetError, SieveOverflowError

    parser = make_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(ns)
    except ConfigError as exc:
        return _error("config", exc, EXIT_CONFIG)
    if cfg.threads:
        import numba

        # workqueue is always available and needs no external runtime
        numba.config.THREADING_LAYER = "workqueue"
        numba.set_num_threads(max(1, min(cfg.threads, numba.config.NUMBA_NUM_THREADS)))
    outs = Outputs(cfg.out)
    try:
        body = HANDLERS[ns.command](cfg, outs)
    except ConfigError as exc:
        outs.rollback()
        return _error("config", exc, EXIT_CONFIG)
    except ex.InapplicableError as exc:
        outs.rollback()
        return _error("inapplicable", exc, EXIT_INAPPLICABLE)
    except (PrecisionError, SieveOverflowError, MemoryBudgetError, ArithmeticError, ValueError,
            RuntimeError) as exc:
        outs.rollback()
        return _error("numeric", exc, EXIT_NUMERIC)
    sys.stdout.write(json.dumps(to_jsonable(_envelope(cfg, ns.command, body)), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
