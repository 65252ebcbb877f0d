"""Command-line interface.

Subcommands: ``solve``, ``profile``, ``boundary``, ``mode-map``,
``l-curve`` and ``verify``.  Exit status 0 means success, 1 a residual or
verification failure, 2 a structural or validation error (reported as a
JSON object on stderr).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import checks as checks_mod
from . import coefficients as coef
from . import reconstruction as rec
from . import spectrum as sp
from .dispersion import PlasmaParameters
from .errors import PlasmaError, ValidationError
from .numerics import QuadratureSpec

LOG_ENV = "HALFSPACE_PLASMA_LOG"
RESIDUAL_TOL = 1e-6
log = logging.getLogger("halfspace_plasma")

_SECTIONS = {
    "params": {"gamma", "eps", "alpha_p", "e0"},
    "grids": {"x", "mu", "gamma", "eps", "l_mu"},
    "output": {"format", "out", "precision"},
    "tolerances": {"rel_tol", "abs_tol", "max_depth"},
    "threads": None,
    "time": None,
}


# ---------------------------------------------------------------- configuration

@dataclass
class RunConfig:
    params: dict = field(default_factory=lambda: {"gamma": 0.0, "eps": 0.1, "alpha_p": 1.0, "e0": 1.0 + 0j})
    grids: dict = field(default_factory=dict)
    output: dict = field(default_factory=lambda: {"format": None, "out": None, "precision": 12})
    tolerances: dict = field(default_factory=dict)
    threads: int = 1
    time: float | None = None

    def plasma(self) -> PlasmaParameters:
        return PlasmaParameters(**self.params)

    def quadrature(self, base: QuadratureSpec) -> QuadratureSpec:
        if not self.tolerances:
            return base
        return QuadratureSpec(
            rel_tol=float(self.tolerances.get("rel_tol", base.rel_tol)),
            abs_tol=float(self.tolerances.get("abs_tol", base.abs_tol)),
            max_depth=int(self.tolerances.get("max_depth", base.max_depth)),
            endpoint_mode=base.endpoint_mode,
        )


def parse_complex(text) -> complex:
    """``"re,im"`` (or a bare real, or a two-element list) to complex."""
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise ValidationError("e0", "expected [re, im]")
        return complex(float(text[0]), float(text[1]))
    if isinstance(text, (int, float)):
        return complex(text)
    parts = str(text).split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ValidationError("e0", f"expected 're,im', got {text!r}")


def parse_range(text, name) -> np.ndarray:
    """``"start:stop:count"`` to an inclusive linear grid."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValidationError(name, f"expected start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ValidationError(name, f"bad range {text!r}") from exc
    if count < 2:
        raise ValidationError(name, "count must be >= 2")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ValidationError(name, "range must be finite")
    return np.linspace(start, stop, count)


def load_config(path) -> RunConfig:
    """Read a JSON config file; unknown keys are rejected."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError("config", str(exc)) from exc
    cfg = RunConfig()
    apply_mapping(cfg, raw)
    return cfg


def apply_mapping(cfg: RunConfig, raw: dict):
    if not isinstance(raw, dict):
        raise ValidationError("config", "top level must be an object")
    for key, value in raw.items():
        if key not in _SECTIONS:
            raise ValidationError("config", f"unknown key {key!r}")
        allowed = _SECTIONS[key]
        if allowed is None:
            setattr(cfg, key, value)
            continue
        if not isinstance(value, dict):
            raise ValidationError(key, "must be an object")
        for sub in value:
            if sub not in allowed:
                raise ValidationError("config", f"unknown key {key}.{sub}")
        getattr(cfg, key).update(value)
    if "e0" in cfg.params:
        cfg.params["e0"] = parse_complex(cfg.params["e0"])


# ---------------------------------------------------------------- serialization

def _num(v, prec):
    return float(f"{float(v):.{prec}e}")


def _cjson(v, prec):
    v = complex(v)
    return {"re": _num(v.real, prec), "im": _num(v.imag, prec)}


def _fmt(v, prec):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.{prec}e}"


def render_csv(columns, rows, prec) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v, prec) for v in row])
    return buf.getvalue()


def render_json(obj) -> str:
    return json.dumps({"version": __version__, **obj}, indent=2) + "\n"


def _table_json(command, columns, rows, prec, extra=None):
    def conv(v):
        if v is None or isinstance(v, str):
            return v
        if isinstance(v, (int, np.integer)):
            return int(v)
        return _num(v, prec)

    body = {"command": command, "columns": list(columns), "rows": [[conv(v) for v in r] for r in rows]}
    if extra:
        body.update(extra)
    return render_json(body)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. `| head`); silence the flush at exit too
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())


# ---------------------------------------------------------------- commands

def _solved(cfg):
    p = cfg.plasma()
    cs = coef.solve_all(p, qspec=cfg.quadrature(coef.LOG_SPEC), check=False)
    return p, cs


def _time_factor(cfg, p):
    if cfg.time is None:
        return 1.0
    omega1 = (1.0 + p.gamma) / p.eps
    return complex(np.exp(-1j * omega1 * float(cfg.time)))


def cmd_solve(cfg, fmt, prec):
    p, cs = _solved(cfg)
    s = cs.classification
    res = cs.residuals
    ok = res.worst <= RESIDUAL_TOL
    coeffs = {k: getattr(cs, k) for k in ("e_infty", "e_debye", "a1", "a0", "c1", "z0a1")}
    if fmt == "csv":
        rows = [(k, v.real, v.imag) for k, v in coeffs.items()]
        rows.append(("kappa", s.kappa, 0.0))
        if s.eta0 is not None:
            rows.append(("eta0", s.eta0.real, s.eta0.imag))
        rows += [(f"residual_{k}", v, 0.0) for k, v in zip(("pole", "field", "accommodation"), res.as_tuple())]
        return render_csv(["quantity", "re", "im"], rows, prec), ok
    body = {
        "command": "solve",
        "params": {"gamma": p.gamma, "eps": p.eps, "alpha_p": p.alpha_p, "e0": _cjson(p.e0, prec)},
        "classification": {
            "kappa": s.kappa,
            "n_zeros": s.n_zeros,
            "region": s.region,
            "eta0": None if s.eta0 is None else _cjson(s.eta0, prec),
        },
        "coefficients": {k: _cjson(v, prec) for k, v in coeffs.items()},
        "residuals": {k: _num(v, prec) for k, v in zip(("pole", "field", "accommodation"), res.as_tuple())},
        "ok": ok,
    }
    return render_json(body), ok


def cmd_profile(cfg, fmt, prec):
    p, cs = _solved(cfg)
    x = parse_range(cfg.grids["x"], "x") if "x" in cfg.grids else None
    prof = rec.field_profile(cs, x, cfg.quadrature(rec.FIELD_SPEC))
    e = prof.e_values * _time_factor(cfg, p)
    rows = [(xi, v.real, v.imag, abs(v)) for xi, v in zip(prof.x_grid, e)]
    cols = ["x", "re_e", "im_e", "abs_e"]
    ok = cs.residuals.worst <= RESIDUAL_TOL
    if fmt == "json":
        return _table_json("profile", cols, rows, prec, {"e_infty": _cjson(prof.e_infty, prec)}), ok
    return render_csv(cols, rows, prec), ok


def cmd_boundary(cfg, fmt, prec):
    p, cs = _solved(cfg)
    mu = parse_range(cfg.grids["mu"], "mu") if "mu" in cfg.grids else None
    bd = rec.boundary_distribution(cs, mu, cfg.quadrature(rec.BOUNDARY_SPEC))
    h = bd.h_values * _time_factor(cfg, p)
    rows = [(m, v.real, v.imag, abs(v)) for m, v in zip(bd.mu_grid, h)]
    cols = ["mu", "re_h", "im_h", "abs_h"]
    ok = cs.residuals.worst <= RESIDUAL_TOL
    if fmt == "json":
        return _table_json("boundary", cols, rows, prec, {"a1": _cjson(cs.a1, prec)}), ok
    return render_csv(cols, rows, prec), ok


def _map_cell(args):
    g, e = args
    try:
        k = sp.winding_index(PlasmaParameters(g, e))
    except sp.NearLError:
        return g, e, None, sp.NEAR_L
    except PlasmaError as exc:
        log.info("cell (%g, %g) failed: %s", g, e, exc)
        return g, e, None, "error"
    region = {0: sp.D_MINUS, 1: sp.D_PLUS}.get(k, sp.ANOMALOUS)
    return g, e, k, region


def cmd_mode_map(cfg, fmt, prec, threads):
    gammas = parse_range(cfg.grids.get("gamma", "-0.99:3:50"), "gamma")
    epss = parse_range(cfg.grids.get("eps", "0.05:3:50"), "eps")
    if np.any(epss <= 0):
        raise ValidationError("eps", "sweep values must be > 0")
    cells = [(float(g), float(e)) for g in gammas for e in epss]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_map_cell, cells))
    else:
        rows = [_map_cell(c) for c in cells]
    failed = sum(r[3] == "error" for r in rows)
    ok = failed <= 0.01 * len(rows)
    cols = ["gamma", "eps", "kappa", "region"]
    if fmt == "json":
        return _table_json("mode-map", cols, rows, prec, {"failed_cells": failed}), ok
    return render_csv(cols, rows, prec), ok


def cmd_l_curve(cfg, fmt, prec):
    grid = parse_range(cfg.grids["l_mu"], "l_mu") if "l_mu" in cfg.grids else None
    curve = sp.l_curve(grid)
    rows = [(pt.mu, pt.gamma, pt.eps) for pt in curve.points]
    if curve.skipped:
        log.info("skipped %d grid values with negative radicands", len(curve.skipped))
    cols = ["mu", "gamma", "eps"]
    if fmt == "json":
        return _table_json("l-curve", cols, rows, prec, {"skipped": [_num(m, prec) for m in curve.skipped]}), True
    return render_csv(cols, rows, prec), True


def cmd_verify(cfg, fmt, prec, as_json):
    results = checks_mod.run_battery()
    ok = all(c.passed for c in results)
    if as_json or fmt == "json":
        body = {
            "command": "verify",
            "passed": ok,
            "checks": [{"name": c.name, "value": _num(c.value, prec), "tol": c.tol, "passed": c.passed} for c in results],
        }
        return render_json(body), ok
    width = max(len(c.name) for c in results)
    lines = [f"{c.name:<{width}}  {c.value:.3e}  <= {c.tol:.0e}  {'PASS' if c.passed else 'FAIL'}" for c in results]
    failed = [c.name for c in results if not c.passed]
    lines.append(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        lines.append("failed: " + ", ".join(failed))
    return "\n".join(lines) + "\n", ok


# ---------------------------------------------------------------- argument parsing

def _common_parser(suppress):
    d = argparse.SUPPRESS if suppress else None
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--config", default=d, help="JSON configuration file")
    g.add_argument("--out", default=d, help="output path (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), default=d)
    g.add_argument("--precision", type=int, default=d, help="significant decimals (default 12)")
    g.add_argument("--threads", type=int, default=d, help="worker threads for sweeps")
    return g


def _param_parser():
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--gamma", type=float, default=argparse.SUPPRESS)
    g.add_argument("--eps", type=float, default=argparse.SUPPRESS)
    g.add_argument("--alpha-p", dest="alpha_p", type=float, default=argparse.SUPPRESS)
    g.add_argument("--e0", default=argparse.SUPPRESS, help="complex amplitude as re,im")
    return g


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halfspace-plasma",
        description="Field penetration into a half-space of degenerate plasma.",
        parents=[_common_parser(False)],
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common, params = _common_parser(True), _param_parser()
    sub.add_parser("solve", parents=[common, params], help="coefficients, spectrum and residuals")
    pr = sub.add_parser("profile", parents=[common, params], help="field e(x) as CSV")
    pr.add_argument("--x-grid", default=argparse.SUPPRESS, help="start:stop:count")
    pr.add_argument("--time", type=float, default=argparse.SUPPRESS, help="multiply in exp(-i omega1 t)")
    b = sub.add_parser("boundary", parents=[common, params], help="wall distribution h(0, mu) as CSV")
    b.add_argument("--mu-grid", default=argparse.SUPPRESS, help="start:stop:count")
    b.add_argument("--time", type=float, default=argparse.SUPPRESS, help="multiply in exp(-i omega1 t)")
    m = sub.add_parser("mode-map", parents=[common], help="kappa over a (gamma, eps) sweep")
    m.add_argument("--gamma-range", default=argparse.SUPPRESS, help="start:stop:count")
    m.add_argument("--eps-range", default=argparse.SUPPRESS, help="start:stop:count")
    lc = sub.add_parser("l-curve", parents=[common], help="points of the mode-existence curve")
    lc.add_argument("--mu-grid", default=argparse.SUPPRESS, help="start:stop:count")
    v = sub.add_parser("verify", parents=[common], help="run the self-check battery")
    v.add_argument("--json", action="store_true", help="machine-readable results")
    return parser


def _resolve(args) -> tuple:
    ns = vars(args)
    cfg = load_config(ns["config"]) if ns.get("config") else RunConfig()
    for key in ("gamma", "eps", "alpha_p"):
        if key in ns:
            cfg.params[key] = ns[key]
    if "e0" in ns:
        cfg.params["e0"] = parse_complex(ns["e0"])
    grid_flags = {"x_grid": "x", "gamma_range": "gamma", "eps_range": "eps"}
    for flag, key in grid_flags.items():
        if flag in ns:
            cfg.grids[key] = ns[flag]
    if "mu_grid" in ns:
        cfg.grids["l_mu" if ns["command"] == "l-curve" else "mu"] = ns["mu_grid"]
    if "time" in ns:
        cfg.time = ns["time"]
    for key in ("format", "out", "precision"):
        if ns.get(key) is not None:
            cfg.output[key] = ns[key]
    if ns.get("threads") is not None:
        cfg.threads = ns["threads"]
    prec = cfg.output.get("precision")
    prec = 12 if prec is None else int(prec)
    if not 1 <= prec <= 17:
        raise ValidationError("precision", "must lie in [1, 17]")
    if int(cfg.threads) < 1:
        raise ValidationError("threads", "must be >= 1")
    return cfg, prec


_DEFAULT_FORMAT = {"solve": "json", "verify": "text", "profile": "csv", "boundary": "csv", "mode-map": "csv", "l-curve": "csv"}


def main(argv=None) -> int:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, prec = _resolve(args)
        fmt = cfg.output.get("format") or _DEFAULT_FORMAT[args.command]
        cmd = args.command
        if cmd == "solve":
            text, ok = cmd_solve(cfg, fmt, prec)
        elif cmd == "profile":
            text, ok = cmd_profile(cfg, fmt, prec)
        elif cmd == "boundary":
            text, ok = cmd_boundary(cfg, fmt, prec)
        elif cmd == "mode-map":
            text, ok = cmd_mode_map(cfg, fmt, prec, int(cfg.threads))
        elif cmd == "l-curve":
            text, ok = cmd_l_curve(cfg, fmt, prec)
        else:
            text, ok = cmd_verify(cfg, fmt, prec, getattr(args, "json", False))
    except (PlasmaError, ValueError, TypeError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ValidationError):
            err["field"] = exc.field
        sys.stderr.write(json.dumps(err) + "\n")
        return 2
    _emit(text, cfg.output.get("out"))
    if not ok:
        sys.stderr.write(json.dumps({"error": "ResidualFailure", "message": "residuals exceed tolerance"}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
