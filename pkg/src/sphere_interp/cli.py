"""Command line front end: ``coeffs``, ``verify`` and ``plotdata``.

Every command takes an optional JSON config (``--config``); flags override it.
Exit codes: 0 pass, 1 residual failure or flagged results, 2 usage or config error.
Usage errors are printed to stderr as a JSON list.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .checks import DEFAULT_THRESHOLDS, SUITES, Context, run_checks
from .harmonics import zonal_table
from .kernels import CoefficientCache, closed_cmax
from .kloosterman import closed_form_table
from .results import COEFF_CSV_COLUMNS, CoefficientResult, fmt17
from .series import DEFAULT_CONTOUR_CMAX, coeff_contour

__all__ = ["main", "ConfigError", "load_config", "cmd_coeffs", "cmd_verify", "cmd_plotdata"]

PROFILES = ("desk", "deep", "fast")
EXTRA_COLUMNS = ["c_max", "flagged", "truncation_error", "note"]


class ConfigError(ValueError):
    """Invalid configuration; carries a list of messages."""

    def __init__(self, errors: Sequence[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "coeffs": {
        "p": [8],
        "n": [1, 5],
        "r": [0.0],
        "methods": ["contour", "closed_form"],
        "tilde": False,
        "tol": 1e-6,
        "c_max": DEFAULT_CONTOUR_CMAX,
    },
    "verify": {
        "thresholds": {},
    },
    "plotdata": {
        "p": 6,
        "n": 1,
        "tilde": False,
        "r_grid": [0.0, 4.0, 0.05],
        "tol": 1e-6,
        "c_max": None,
        "kernel": {"d": 5, "n": 1, "x_norm": 1.0, "m_max": 8, "t_points": 41},
    },
}
COMMON_KEYS = {"profile", "threads", "out", "only"}
KERNEL_KEYS = set(DEFAULTS["plotdata"]["kernel"])


def _int_range(v, name: str, errors: List[str]) -> List[int]:
    """``[lo, hi]`` inclusive, or a single integer."""
    if isinstance(v, bool):
        errors.append(f"{name}: expected an integer or [lo, hi]")
        return []
    if isinstance(v, int):
        return [v]
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        out = list(range(v[0], v[1] + 1))
        if not out:
            errors.append(f"{name}: empty range {v}")
        return out
    errors.append(f"{name}: expected an integer or [lo, hi]")
    return []


def _positive(cfg: dict, key: str, errors: List[str]) -> None:
    v = cfg.get(key)
    if v is not None and not (isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0):
        errors.append(f"{key}: must be > 0")


def load_config(command: str, path: Optional[str], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Merge defaults, the JSON file and flag overrides; reject unknown keys."""
    cfg = json.loads(json.dumps(DEFAULTS[command]))
    cfg.update({"profile": "desk", "threads": 1, "out": None, "only": None})
    errors: List[str] = []
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"config: {exc}"])
        if not isinstance(user, dict):
            raise ConfigError(["config: top level must be an object"])
        allowed = set(DEFAULTS[command]) | COMMON_KEYS
        for k in sorted(user):
            if k not in allowed:
                errors.append(f"unknown key {k!r} for {command}")
        if command == "plotdata" and isinstance(user.get("kernel"), dict):
            for k in sorted(user["kernel"]):
                if k not in KERNEL_KEYS:
                    errors.append(f"unknown key 'kernel.{k}'")
            kern = dict(cfg["kernel"])
            kern.update(user["kernel"])
            user = dict(user, kernel=kern)
        cfg.update({k: v for k, v in user.items() if k in allowed})
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    if cfg["profile"] not in PROFILES:
        errors.append(f"profile: expected one of {PROFILES}")
    if not isinstance(cfg["threads"], int) or cfg["threads"] < 1:
        errors.append("threads: must be a positive integer")
    _positive(cfg, "tol", errors)
    _positive(cfg, "c_max", errors)

    if command == "coeffs":
        cfg["p"] = cfg["p"] if isinstance(cfg["p"], list) else [cfg["p"]]
        cfg["n"] = _int_range(cfg["n"], "n", errors)
        if not cfg["p"] or any(not isinstance(p, int) or isinstance(p, bool) or p < 5 for p in cfg["p"]):
            errors.append("p: need a nonempty set of integers >= 5")
        rs = cfg["r"] if isinstance(cfg["r"], list) else [cfg["r"]]
        if not rs or any(not isinstance(r, (int, float)) or isinstance(r, bool) or r < 0 for r in rs):
            errors.append("r: need a nonempty list of reals >= 0")
        cfg["r"] = [float(r) for r in rs] if not errors else rs
        if not cfg["methods"] or any(m not in ("contour", "closed_form") for m in cfg["methods"]):
            errors.append("methods: subset of ['contour', 'closed_form']")
    elif command == "verify":
        th = cfg["thresholds"]
        if not isinstance(th, dict):
            errors.append("thresholds: must be an object")
        else:
            for k, v in sorted(th.items()):
                if k not in DEFAULT_THRESHOLDS:
                    errors.append(f"unknown threshold {k!r}")
                elif not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                    errors.append(f"threshold {k!r} must be > 0")
        if cfg["only"] is not None:
            names = cfg["only"] if isinstance(cfg["only"], list) else str(cfg["only"]).split(",")
            names = [s.strip() for s in names if s.strip()]
            bad = [s for s in names if s not in SUITES]
            if bad or not names:
                errors.append(f"only: unknown suite(s) {bad}; choose from {sorted(SUITES)}")
            cfg["only"] = names
    elif command == "plotdata":
        p = cfg["p"]
        if not isinstance(p, int) or isinstance(p, bool) or p < 5:
            errors.append("p: integer >= 5")
        if not isinstance(cfg["n"], int) or cfg["n"] < 1:
            errors.append("n: integer >= 1")
        g = cfg["r_grid"]
        if not (isinstance(g, list) and len(g) == 3 and all(isinstance(v, (int, float)) for v in g)
                and g[0] >= 0 and g[2] > 0 and g[1] >= g[0]):
            errors.append("r_grid: [start >= 0, stop >= start, step > 0]")
        k = cfg["kernel"]
        if not isinstance(k, dict):
            errors.append("kernel: must be an object")
        else:
            if not isinstance(k["d"], int) or k["d"] < 5:
                errors.append("kernel.d: integer >= 5")
            if not isinstance(k["n"], int) or k["n"] < 1:
                errors.append("kernel.n: integer >= 1")
            if not isinstance(k["m_max"], int) or k["m_max"] < 0:
                errors.append("kernel.m_max: integer >= 0")
            if not isinstance(k["t_points"], int) or k["t_points"] < 2:
                errors.append("kernel.t_points: integer >= 2")
            if not isinstance(k["x_norm"], (int, float)) or k["x_norm"] <= 0:
                errors.append("kernel.x_norm: real > 0")
    if errors:
        raise ConfigError(errors)
    return cfg


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _rows_to_csv(results: Sequence[CoefficientResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COEFF_CSV_COLUMNS + EXTRA_COLUMNS)
    for res in results:
        w.writerow(res.csv_row() + [str(res.c_max), str(int(res.flagged)),
                                    fmt17(res.extra.get("truncation_error", float("nan"))), res.note])
    return buf.getvalue()


def _coeff_rows(cfg: Dict[str, Any]) -> List[CoefficientResult]:
    """Both methods at the same truncation ``c <= c_max``; rows ordered by ``(p, r, n, method)``."""
    C = int(cfg["c_max"])
    tol = float(cfg["tol"])
    tilde = bool(cfg["tilde"])
    pos = [n for n in cfg["n"] if n >= 1]
    table = closed_form_table(cfg["p"], max(pos), cfg["r"], C, tilde=tilde,
                              threads=cfg["threads"]) if pos and "closed_form" in cfg["methods"] else None
    items = [(p, r, n) for p in cfg["p"] for r in cfg["r"] for n in cfg["n"]]

    def contour(item):
        p, r, n = item
        res = coeff_contour(p, n, r, min(tol, 1e-10), tilde=tilde, c_max=C, tail_estimate=False)
        res.flagged = "not converged" in res.note or res.error_estimate > tol
        res.extra["truncation_error"] = float("nan")
        return res

    def closed(item):
        p, r, n = item
        if n <= 0:
            return CoefficientResult(p, n, r, 0j, "closed_form", 0.0, tilde=tilde, c_max=C, note="vanishing",
                                     extra={"truncation_error": 0.0})
        idx = table.index(p, r, n)
        part = complex(table.partial[idx])
        trunc = float(abs(part - table.extrapolated[idx]) + table.error[idx])
        # rounding of the c-sum only; the truncation itself is the target
        est = 1e-14 * (1.0 + abs(part))
        return CoefficientResult(p, n, r, part, "closed_form", est, tilde=tilde, c_max=C, flagged=est > tol,
                                 note="partial", extra={"truncation_error": trunc})

    results: List[CoefficientResult] = []
    cont = {}
    if "contour" in cfg["methods"]:
        if cfg["threads"] > 1:
            with ThreadPoolExecutor(max_workers=cfg["threads"]) as ex:
                cont = dict(zip(items, ex.map(contour, items)))
        else:
            cont = {it: contour(it) for it in items}
    for it in items:
        if "contour" in cfg["methods"]:
            results.append(cont[it])
        if "closed_form" in cfg["methods"]:
            results.append(closed(it))
    return results


def cmd_coeffs(cfg: Dict[str, Any]) -> int:
    results = _coeff_rows(cfg)
    _write(_rows_to_csv(results), cfg["out"])
    return 1 if any(r.flagged for r in results) else 0


def cmd_verify(cfg: Dict[str, Any]) -> int:
    ctx = Context(profile=cfg["profile"], threads=cfg["threads"], thresholds=cfg["thresholds"])
    results = run_checks(cfg["only"], ctx)
    for res in results:
        print(res.line(), file=sys.stderr)
    doc = {"profile": cfg["profile"], "passed": all(r.passed for r in results),
           "checks": [r.to_dict() for r in results]}
    _write(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n", cfg["out"])
    return 0 if doc["passed"] else 1


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _kernel_slice(cfg: Dict[str, Any], cache: CoefficientCache) -> str:
    """Per-``m`` partial sums of ``A_n(x, zeta)`` against ``t = x.zeta/|x|``."""
    k = cfg["kernel"]
    d, n, R, M = k["d"], k["n"], float(k["x_norm"]), k["m_max"]
    tilde = bool(cfg["tilde"])
    ts = np.linspace(-1.0, 1.0, k["t_points"])
    ps = [d + 2 * m for m in range(M + 1)]
    cache.ensure(ps, n, [R], tilde)
    Z = zonal_table(d, M, ts)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "n", "x_norm", "t", "m", "re", "im", "error_estimate", "flagged"])
    acc = np.zeros(ts.shape, dtype=complex)
    err = 0.0
    for m in range(M + 1):
        res = cache.get(d + 2 * m, n, R, tilde)
        scale = (R ** m if m else 1.0) * n ** (-0.5 * m) * ((1j) ** m if tilde else 1.0)
        acc = acc + res.value * scale * Z[m]
        err += res.error_estimate * abs(scale) * float(np.max(np.abs(Z[m])))
        for t, v in zip(ts, acc):
            w.writerow([str(d), str(n), fmt17(R), fmt17(t), str(m), fmt17(v.real), fmt17(v.imag), fmt17(err),
                        str(int(res.flagged))])
    return buf.getvalue()


def cmd_plotdata(cfg: Dict[str, Any]) -> int:
    p, n = cfg["p"], cfg["n"]
    tilde = bool(cfg["tilde"])
    rs = _grid(*cfg["r_grid"])
    C = int(cfg["c_max"]) if cfg["c_max"] else closed_cmax(p, cfg["profile"])
    tab = closed_form_table([p], n, [float(r) for r in rs], C, tilde=tilde, threads=cfg["threads"])
    results = []
    for r in rs:
        idx = tab.index(p, float(r), n)
        err = float(tab.error[idx])
        results.append(CoefficientResult(p, n, float(r), complex(tab.extrapolated[idx]), "closed_form", err,
                                         tilde=tilde, c_max=C, flagged=err > cfg["tol"], note="extrapolated",
                                         extra={"truncation_error": err}))
    radial = _rows_to_csv(results)
    cache = CoefficientCache(profile=cfg["profile"], tol=cfg["tol"], threads=cfg["threads"])
    kernel = _kernel_slice(cfg, cache)
    if cfg["out"] is None:
        sys.stdout.write(radial)
        sys.stdout.write("\n")
        sys.stdout.write(kernel)
    else:
        _write(radial, cfg["out"])
        _write(kernel, _kernel_path(cfg["out"]))
    return 1 if any(r.flagged for r in results) else 0


def _kernel_path(out: str) -> str:
    stem, dot, ext = out.rpartition(".")
    return f"{stem}_kernel.{ext}" if dot and "/" not in ext else out + "_kernel"


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

COMMANDS = {"coeffs": cmd_coeffs, "verify": cmd_verify, "plotdata": cmd_plotdata}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError([message])


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sphere-interp", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--out", help="output path (default stdout)")
    ap.add_argument("--only", help="comma-separated suites for verify")
    ap.add_argument("--threads", type=int, help="worker threads")
    ap.add_argument("--profile", choices=PROFILES, help="truncation profile")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.only is not None and args.command != "verify":
            raise ConfigError(["--only applies to verify"])
        cfg = load_config(args.command, args.config,
                          {"out": args.out, "only": args.only, "threads": args.threads, "profile": args.profile})
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        json.dump({"errors": exc.errors}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
