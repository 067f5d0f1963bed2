"""Command-line experiment runner.

    forced-burgers <subcommand> --config run.json --out out/ [--seed 0] [--jobs 1]

Subcommands: evolve, alpha-curve, period, graphs, oracle-compare, corollary.
Exit codes: 0 success, 1 configuration error, 2 no convergence / no period.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import entropy as en
from . import graphs as gr
from .errors import ConfigError, NoConvergence, NoPeriodDetected
from .grid import fourier_series, l1_distance, random_smooth
from .hamiltonian import HamiltonianSpec
from .lax_oleinik import LaxOleinikConfig

PRESETS = {
    "free": lambda d: HamiltonianSpec.free(),
    "pendulum": lambda d: HamiltonianSpec.pendulum(float(d.get("amp", 0.2))),
    "forced_pendulum": lambda d: HamiltonianSpec.forced_pendulum(float(d.get("amp", 0.2))),
}

COMMANDS = ("evolve", "alpha-curve", "period", "graphs", "oracle-compare", "corollary")


# -- config ---------------------------------------------------------------------

def parse_spec(data):
    if isinstance(data, dict) and "preset" in data:
        name = data["preset"]
        if name not in PRESETS:
            raise ConfigError("spec.preset", f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        return PRESETS[name](data)
    return HamiltonianSpec.from_dict(data)


def parse_grid(data):
    if not isinstance(data, dict):
        raise ConfigError("grid", "expected a JSON object")
    try:
        return LaxOleinikConfig(n=int(data.get("n", 512)), m=int(data.get("m", 64)),
                                v_max=float(data.get("v_max", 4.0)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("grid", str(exc)) from None


def initial_data(block, n, rng):
    """Initial ``y``: constant plus Fourier terms plus an optional random smooth part."""
    if not isinstance(block, dict):
        raise ConfigError("initial", "expected a JSON object")
    const = _number(block, "constant", 0.0, "initial")
    terms = block.get("fourier", [])
    for i, t in enumerate(terms):
        if not (isinstance(t, list) and len(t) == 3):
            raise ConfigError(f"initial.fourier[{i}]", "expected [k, amp_cos, amp_sin]")
    y = fourier_series(n, [(int(k), float(a), float(b)) for k, a, b in terms], const)
    if "random" in block:
        r = block["random"]
        y = y + random_smooth(rng, n, int(r.get("modes", 4)), _positive(r, "amplitude", 0.5, "initial.random"))
    return y


def _number(block, key, default, where):
    v = block.get(key, default)
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key}", f"expected a finite number, got {v!r}")
    return float(v)


def _positive(block, key, default, where):
    v = _number(block, key, default, where)
    if v <= 0:
        raise ConfigError(f"{where}.{key}", "must be positive")
    return v


def _count(block, key, default, where, minimum=1):
    v = block.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise ConfigError(f"{where}.{key}", f"expected an integer >= {minimum}, got {v!r}")
    return v


def load_config(path):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return data, hashlib.sha256(raw).hexdigest()


# -- output ---------------------------------------------------------------------

class Writer:
    """Writes run artifacts and records their hashes for the manifest."""

    def __init__(self, out):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files = {}

    def text(self, name, content):
        data = content.encode("utf-8")
        (self.out / name).write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()

    def csv(self, name, header, rows):
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        self.text(name, "\n".join(lines) + "\n")

    def json(self, name, obj):
        self.text(name, json.dumps(obj, sort_keys=True, indent=2) + "\n")

    def manifest(self, command, config_hash, seed):
        self.json("manifest.json", {"command": command, "config_sha256": config_hash,
                                    "seed": seed, "files": dict(sorted(self.files.items()))})


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v) + 0.0:.17g}"


# -- subcommands ------------------------------------------------------------------

def cmd_evolve(cfgd, spec, grid, rng, w, jobs):
    blk = cfgd.get("evolve", {})
    periods = _count(blk, "periods", 20, "evolve")
    y = initial_data(cfgd.get("initial", {}), grid.n, rng)
    for k, yk in enumerate(en.entropy_iterates(spec, grid, y, periods)[1:], start=1):
        w.text(f"snapshot_{k:04d}.csv", yk.to_csv())


def _alpha_row(args):
    spec, grid, c, n_periods, rho_periods = args
    alpha, _ = asy.estimate_alpha(spec, grid, c, n_periods)
    rho = asy.estimate_rho(spec, grid, c, rho_periods)
    return c, alpha, rho, asy.rational_period(rho)


def cmd_alpha_curve(cfgd, spec, grid, rng, w, jobs):
    blk = cfgd.get("alpha_curve", {})
    cs = blk.get("c", [-1.0, -0.5, 0.0, 0.5, 1.0])
    if not isinstance(cs, list) or not cs:
        raise ConfigError("alpha_curve.c", "expected a non-empty list of numbers")
    n_periods = _count(blk, "n_periods", 32, "alpha_curve", 16)
    rho_periods = _count(blk, "rho_periods", 64, "alpha_curve", 32)
    tasks = [(spec, grid, float(c), n_periods, rho_periods) for c in cs]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            rows = list(ex.map(_alpha_row, tasks))
    else:
        rows = [_alpha_row(t) for t in tasks]
    w.csv("alpha_curve.csv", ["c", "alpha", "rho", "T"], rows)


def cmd_period(cfgd, spec, grid, rng, w, jobs):
    blk = cfgd.get("period", {})
    n_max = _count(blk, "n_max", 64, "period", 32)
    tol = _positive(blk, "tol", 1e-3, "period")
    y = initial_data(cfgd.get("initial", {}), grid.n, rng)
    if "c_scan" in blk:
        shape = y - float(np.mean(y.values))
        rows = [asy.detect_asymptotic_period(spec, grid, shape + float(c), n_max, tol,
                                             raise_on_failure=False)
                for c in blk["c_scan"]]
        w.csv("period_scan.csv", ["c", "rho", "T_of_c", "detected_T"],
              [(r.c, r.rho, r.T_of_c, r.detected_T) for r in rows])
    try:
        rep = asy.detect_asymptotic_period(spec, grid, y, n_max, tol)
    except NoPeriodDetected as exc:
        if exc.report is not None:
            w.json("period_report.json", exc.report.to_dict())
        raise
    w.json("period_report.json", rep.to_dict(snapshots=bool(blk.get("snapshots", False))))
    w.csv("convergence.csv", ["n", "d_n"], rep.convergence_series)


def cmd_graphs(cfgd, spec, grid, rng, w, jobs):
    blk = cfgd.get("graphs", {})
    periods = _count(blk, "periods", 1, "graphs")
    y = initial_data(cfgd.get("initial", {}), grid.n, rng)
    off = 0.5 / grid.n
    rows = []
    for k in range(periods):
        y_next = en.entropy_step(spec, grid, y, float(k))
        w.text(f"graph_{k:04d}.csv", gr.extract_graph(y, x_offset=off).to_csv())
        rows.append((k, gr.graph_inclusion_check(spec, y, y_next, t0=float(k), t1=float(k + 1))))
        y = y_next
    w.text(f"graph_{periods:04d}.csv", gr.extract_graph(y, x_offset=off).to_csv())
    w.csv("inclusion_defect.csv", ["n", "defect"], rows)


def cmd_oracle_compare(cfgd, spec, grid, rng, w, jobs):
    blk = cfgd.get("oracle_compare", {})
    ns = blk.get("n", [256, 512, 1024])
    periods = _count(blk, "periods", 1, "oracle_compare")
    init = cfgd.get("initial", {})
    if "random" in init:
        raise ConfigError("initial.random", "oracle-compare needs data defined on every grid")
    rows = []
    for n in ns:
        g = parse_grid({"n": n, "m": grid.m, "v_max": grid.v_max})
        y0 = initial_data(init, g.n, rng)
        dp = y0
        for k in range(periods):
            dp = en.entropy_step(spec, g, dp, float(k))
        fv = en.godunov_evolve(spec, y0, 0.0, float(periods))
        rows.append((n, l1_distance(dp, fv)))
    w.csv("oracle_compare.csv", ["n", "gap"], rows)


def cmd_corollary(cfgd, spec, grid, rng, w, jobs):
    blk = cfgd.get("corollary", {})
    n_list = blk.get("n_list", [1, 2, 4, 8, 16, 32])
    if not isinstance(n_list, list) or not n_list or any(not isinstance(k, int) or k < 0 for k in n_list):
        raise ConfigError("corollary.n_list", "expected a non-empty list of non-negative integers")
    tol = _positive(blk, "tol", 1e-3, "corollary")
    y = initial_data(cfgd.get("initial", {}), grid.n, rng)
    w.json("corollary.json", asy.corollary_check(spec, grid, y, n_list, tol))


HANDLERS = {
    "evolve": cmd_evolve,
    "alpha-curve": cmd_alpha_curve,
    "period": cmd_period,
    "graphs": cmd_graphs,
    "oracle-compare": cmd_oracle_compare,
    "corollary": cmd_corollary,
}


def run(command, config_path, out_dir, seed=None, jobs=1):
    """Run one subcommand; returns the process exit code.

    ``seed`` overrides the config's ``seed`` entry; both default to 0.
    """
    try:
        cfgd, digest = load_config(config_path)
        if seed is None:
            seed = _count(cfgd, "seed", 0, "config", 0)
        spec = parse_spec(cfgd.get("spec", {"preset": "free"}))
        grid = parse_grid(cfgd.get("grid", {}))
        rng = np.random.default_rng(seed)
        w = Writer(out_dir)
        HANDLERS[command](cfgd, spec, grid, rng, w, jobs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NoConvergence, NoPeriodDetected) as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        w.manifest(command, digest, seed)
        return 2
    w.manifest(command, digest, seed)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="forced-burgers", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("config_pos", nargs="?", metavar="CONFIG")
    p.add_argument("out_pos", nargs="?", metavar="OUT")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    config = args.config or args.config_pos
    out = args.out or args.out_pos
    if config is None or out is None:
        print("error: config: both a config file and an output directory are required", file=sys.stderr)
        return 1
    if args.jobs < 1:
        print("error: jobs: must be >= 1", file=sys.stderr)
        return 1
    return run(args.command, config, out, args.seed, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
