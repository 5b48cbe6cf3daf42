"""Command-line front end: ``padic-landscape <command> [options]``.

Every command prints a long-format table (CSV by default, or JSON with the
columns as arrays plus a metadata object).  Options may also come from a JSON
file given with ``--config``; flags on the command line win.

Exit codes: 0 success, 2 configuration error, 3 numeric refusal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import ConfigurationError, DivergenceError, NonMonotoneSymbolError, PreconditionError
from .evolution import heat_kernel_density, solve_radial
from .kernels import (
    LandscapeKernel,
    check_symbol_monotone,
    classify_recurrence,
    custom_table,
    jump_radius_weights,
    regularized_linear,
    regularized_log,
    synthetic_power_symbol,
)
from .montecarlo import JumpLaw, SimConfig, simulate_first_passage, survival_curve, trial_rng
from .radial import RadialFunction, indicator
from .survival import first_passage_density, survival_bounds, survival_series

COMMANDS = ("kernel", "symbol", "heat", "solve", "survival", "volterra", "mc")

DEFAULTS = {
    "family": "linear",
    "p": 2,
    "n": 1,
    "alpha": 2.0,
    "beta": None,
    "F": 1.0,
    "s": 1.0,
    "table_file": None,
    "t": None,
    "t_grid": None,
    "kmin": -10,
    "kmax": 10,
    "k": None,
    "u0_radius": 0,
    "h": 0.01,
    "tmax": 10.0,
    "trials": 10_000,
    "seed": 0,
    "workers": 1,
    "horizon": 100.0,
    "no_thinning": False,
    "mode": "survival",
    "format": "csv",
    "out": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def _options(parser):
    S = argparse.SUPPRESS
    g = parser.add_argument_group("kernel")
    g.add_argument("--family", choices=["linear", "log", "synthetic", "table"], default=S)
    g.add_argument("--p", type=int, default=S)
    g.add_argument("--n", type=int, default=S)
    g.add_argument("--alpha", type=float, default=S)
    g.add_argument("--beta", type=float, default=S)
    g.add_argument("--F", type=float, default=S)
    g.add_argument("--s", type=float, default=S)
    g.add_argument("--table-file", dest="table_file", default=S, help="CSV with columns k,J")
    g = parser.add_argument_group("grid")
    g.add_argument("--t", type=float, default=S)
    g.add_argument("--t-grid", dest="t_grid", default=S, metavar="A:B:STEP")
    g.add_argument("--kmin", type=int, default=S)
    g.add_argument("--kmax", type=int, default=S)
    g.add_argument("--k", type=int, default=S, help="single sphere index")
    g.add_argument("--u0-radius", dest="u0_radius", type=int, default=S, help="initial data is the indicator of this ball")
    g.add_argument("--h", type=float, default=S)
    g.add_argument("--tmax", type=float, default=S)
    g = parser.add_argument_group("simulation")
    g.add_argument("--trials", type=int, default=S)
    g.add_argument("--seed", type=int, default=S)
    g.add_argument("--workers", type=int, default=S)
    g.add_argument("--horizon", type=float, default=S)
    g.add_argument("--no-thinning", dest="no_thinning", action="store_true", default=S)
    g = parser.add_argument_group("output")
    g.add_argument("--format", choices=["csv", "json"], default=S)
    g.add_argument("--out", default=S)
    g.add_argument("--config", default=S, help="JSON file of option values")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="padic-landscape", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "kernel": "normalization, J on the window, jump weights, recurrence class",
        "symbol": "psi(p^m) on the window",
        "heat": "heat-kernel density on spheres",
        "solve": "radial solution from the indicator of a ball",
        "survival": "S(t) with its power-law bounds",
        "volterra": "exit density g and first-return density f",
        "mc": "Monte Carlo: survival, passage or jumps",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        if name == "mc":
            p.add_argument("mode", choices=["survival", "passage", "jumps"], nargs="?", default=argparse.SUPPRESS)
        _options(p)
    return parser


def resolve_config(argv) -> dict:
    """Merge defaults, the optional JSON file, and flags (in increasing priority)."""
    args = vars(build_parser().parse_args(argv))
    cfg = dict(DEFAULTS)
    path = args.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")
        unknown = sorted(set(data) - set(DEFAULTS))
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(data)
    cfg.update(args)
    return cfg


def parse_t_grid(text: str) -> np.ndarray:
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise ConfigurationError(f"--t-grid expects A:B:STEP, got {text!r}") from exc
    if step <= 0 or b < a:
        raise ConfigurationError(f"--t-grid needs STEP > 0 and B >= A, got {text!r}")
    count = int(round((b - a) / step)) + 1
    return np.linspace(a, a + (count - 1) * step, count)


def _times(cfg, default=1.0) -> np.ndarray:
    if cfg["t_grid"] is not None:
        return parse_t_grid(cfg["t_grid"])
    ts = np.array([default if cfg["t"] is None else cfg["t"]], dtype=float)
    if np.any(ts < 0):
        raise ConfigurationError("t must be >= 0")
    return ts


def _window(cfg):
    if cfg["k"] is not None:
        return cfg["k"], cfg["k"]
    if cfg["kmin"] > cfg["kmax"]:
        raise ConfigurationError("kmin must not exceed kmax")
    return cfg["kmin"], cfg["kmax"]


def _load_table(path, p, n) -> RadialFunction:
    if path is None:
        raise ConfigurationError("family 'table' needs --table-file")
    try:
        with open(path, newline="") as fh:
            rows = [(int(r["k"]), float(r["J"])) for r in csv.DictReader(fh)]
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigurationError(f"cannot read kernel table {path}: {exc}") from exc
    if not rows:
        raise ConfigurationError("kernel table is empty")
    rows.sort()
    ks = [k for k, _ in rows]
    if ks != list(range(ks[0], ks[-1] + 1)):
        raise ConfigurationError("kernel table must list consecutive k")
    values = [v for _, v in rows]
    return RadialFunction(p, n, ks[0], values, values[0])


def make_kernel(cfg) -> LandscapeKernel:
    family, p, n = cfg["family"], int(cfg["p"]), int(cfg["n"])
    if family == "linear":
        return regularized_linear(p, n, cfg["alpha"])
    if family == "log":
        if cfg["beta"] is None:
            raise ConfigurationError("family 'log' needs --beta")
        return regularized_log(p, n, cfg["alpha"], cfg["beta"])
    if family == "synthetic":
        return synthetic_power_symbol(p, n, cfg["F"], cfg["s"])
    if family == "table":
        return custom_table(_load_table(cfg["table_file"], p, n))
    raise ConfigurationError(f"unknown family {family!r}")


# -- commands: each returns (columns dict, extra metadata) ------------------


def cmd_kernel(kernel, cfg):
    if not kernel.density_backed:
        raise ConfigurationError("the synthetic family has no density")
    lo, hi = _window(cfg)
    ks = np.arange(lo, hi + 1)
    jw = jump_radius_weights(kernel)
    w = np.array([jw.weight(int(k)) for k in ks])
    rows = ks.size
    cols = {
        "k": ks,
        "radius": np.power(float(kernel.p), ks.astype(float)),
        "J": np.asarray(kernel.density(ks), dtype=float),
        "w": w,
        "c": [kernel.c if kernel.c is not None else math.nan] * rows,
        "inside_ball_mass": [jw.inside_ball_mass] * rows,
        "classification": [classify_recurrence(kernel)] * rows,
    }
    return cols, {}


def cmd_symbol(kernel, cfg):
    lo, hi = _window(cfg)
    ms = np.arange(lo, hi + 1)
    report = check_symbol_monotone(kernel)
    cols = {"m": ms, "radius": np.power(float(kernel.p), ms.astype(float)), "psi": np.asarray(kernel.psi(ms), dtype=float)}
    return cols, {"monotone": report.passed}


def cmd_heat(kernel, cfg):
    lo, hi = _window(cfg)
    ks = np.arange(lo, hi + 1)
    cols = {"t": [], "k": [], "radius": [], "density": [], "atom": []}
    for t in _times(cfg):
        dens = np.atleast_1d(heat_kernel_density(kernel, t, ks))
        atom = math.exp(-t * kernel.psi_at_infinity) if t > 0 else 1.0
        cols["t"].extend([t] * ks.size)
        cols["k"].extend(ks.tolist())
        cols["radius"].extend(np.power(float(kernel.p), ks.astype(float)).tolist())
        cols["density"].extend(dens.tolist())
        cols["atom"].extend([atom] * ks.size)
    return cols, {}


def cmd_solve(kernel, cfg):
    lo, hi = _window(cfg)
    r = int(cfg["u0_radius"])
    u0 = indicator(kernel.p, kernel.n, r)
    ks = np.arange(lo, hi + 1)
    cols = {"t": [], "k": [], "radius": [], "u": [], "mass": []}
    for t in _times(cfg):
        sol = solve_radial(kernel, t, u0, M=-r)
        cols["t"].extend([t] * ks.size)
        cols["k"].extend(ks.tolist())
        cols["radius"].extend(np.power(float(kernel.p), ks.astype(float)).tolist())
        cols["u"].extend(np.asarray(sol.u(ks), dtype=float).tolist())
        cols["mass"].extend([sol.mass()] * ks.size)
    return cols, {"u0_radius": r}


def cmd_survival(kernel, cfg):
    ts = _times(cfg)
    S = np.atleast_1d(survival_series(kernel, ts))
    bounds = []
    for t in ts:
        try:
            bounds.append(survival_bounds(kernel, t) if t > 0 else (math.nan,) * 3)
        except PreconditionError:
            bounds.append((math.nan,) * 3)
    b = np.array(bounds).reshape(-1, 3)
    pn = float(kernel.p) ** kernel.n
    cols = {"t": ts, "S": S, "stated_lower": b[:, 0], "corrected_lower": b[:, 1], "rigorous_lower": b[:, 0] / pn**2, "upper": b[:, 2]}
    return cols, {}


def cmd_volterra(kernel, cfg):
    h, tmax = float(cfg["h"]), float(cfg["tmax"])
    if not (h > 0 and tmax > 0):
        raise ConfigurationError("--h and --tmax must be positive")
    d = first_passage_density(kernel, tmax, h)
    return {"t": d.times, "g": d.g, "f": d.f, "cdf": d.cdf()}, {"h": h}


def cmd_mc(kernel, cfg):
    mode = cfg["mode"]
    sim = SimConfig(
        kernel,
        trials=int(cfg["trials"]),
        horizon=float(cfg["horizon"]),
        seed=int(cfg["seed"]),
        workers=int(cfg["workers"]),
        thinning=not cfg["no_thinning"],
    )
    meta = {"mode": mode, "trials": sim.trials, "thinning": sim.thinning}
    if mode == "survival":
        ts = _times(cfg)
        est, se = survival_curve(sim, ts)
        n = ts.size
        cols = {"t": ts, "estimate": est, "stderr": se, "series": np.atleast_1d(survival_series(kernel, ts)), "seed": [sim.seed] * n}
    elif mode == "passage":
        res = simulate_first_passage(sim)
        n = res.horizons.size
        frac = res.return_fraction if res.defined else np.full(n, math.nan)
        se = np.sqrt(frac * (1.0 - frac) / sim.trials)
        cols = {"horizon": res.horizons, "return_fraction": frac, "stderr": se, "seed": [sim.seed] * n}
        meta["exited"] = res.exited
    else:
        law = JumpLaw(kernel)
        rng = trial_rng(sim.seed, 0)
        draws = np.array([law.sample_radius(rng) for _ in range(sim.trials)])
        lo, hi = _window(cfg)
        js = np.arange(0, max(hi, 1) + 1)
        expected = np.array([law.weights.inside_ball_mass] + [law.weights.weight(int(j)) for j in js[1:]])
        observed = np.array([np.count_nonzero(draws == j) for j in js]) / sim.trials
        cols = {
            "j": js,
            "expected": expected,
            "observed": observed,
            "stderr": np.sqrt(expected * (1.0 - expected) / sim.trials),
            "seed": [sim.seed] * js.size,
        }
    return cols, meta


HANDLERS = {
    "kernel": cmd_kernel,
    "symbol": cmd_symbol,
    "heat": cmd_heat,
    "solve": cmd_solve,
    "survival": cmd_survival,
    "volterra": cmd_volterra,
    "mc": cmd_mc,
}


# -- output -------------------------------------------------------------------


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if math.isnan(v) or math.isinf(v) else v
    return v


def render(cols: dict, meta: dict, fmt: str) -> str:
    names = list(cols)
    data = [list(cols[name]) for name in names]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*data):
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()
    doc = {
        "columns": {name: [_json_value(v) for v in col] for name, col in zip(names, data)},
        "metadata": {k: _json_value(v) for k, v in meta.items()},
    }
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_output(text: str, path) -> None:
    """Write to ``path`` via a temporary file and rename, or to stdout."""
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        if cfg["format"] not in ("csv", "json"):
            raise ConfigurationError(f"unknown format {cfg['format']!r}")
        kernel = make_kernel(cfg)
        cols, extra = HANDLERS[cfg["command"]](kernel, cfg)
        meta = {"command": cfg["command"], **kernel.record(), "seed": int(cfg["seed"]), "version": __version__, **extra}
        write_output(render(cols, meta, cfg["format"]), cfg["out"])
    except (ConfigurationError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NonMonotoneSymbolError, PreconditionError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
