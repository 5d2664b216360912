"""Command-line entry point: ``wgqed run|optimize|sweep|presets``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, model, protocol
from .config import RunConfig, apply_overrides, flatten, json_safe, load_toml, parse_config
from .errors import (
    ConfigurationError,
    IntegrationFailure,
    NumericalFailure,
    NumericalInstabilityError,
    OptimizationFailure,
    WaveguideError,
)
from .presets import PRESETS, get_preset
from .qutrit import max_leakage, run_leakage

log = logging.getLogger("wgqed")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
NUMERICAL_ERRORS = (IntegrationFailure, NumericalInstabilityError, NumericalFailure, OptimizationFailure)


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    return "%.12g" % x


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path: Path, record: dict):
    path.write_text(json.dumps({k: json_safe(v) for k, v in record.items()}, sort_keys=True, indent=1) + "\n")


def base_summary(cfg: RunConfig, command: str) -> dict:
    integ = cfg.integrator()
    out = {
        "command": command,
        "scenario": cfg.name,
        "target": cfg.target,
        "engine_version": __version__,
        "rtol": integ.rel_tol,
        "atol": integ.abs_tol,
        "method": integ.method,
        "truncate_excitations": cfg.truncation if cfg.truncation else "off",
    }
    out.update(flatten(cfg.raw))
    return out


def trajectory_rows(traj):
    return [[t, f, *p] for t, f, p in zip(traj.times, traj.fidelity, traj.populations)]


def command_run(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    summary = base_summary(cfg, "run")
    if cfg.target == "qutrit":
        spec = cfg.qutrit()
        t_end = cfg.section("qutrit").get("t_end_us", 20.0)
        integ = cfg.integrator()
        if "method" not in cfg.section("integrator"):
            integ = replace(integ, method="expm")
        traj = run_leakage(spec, t_end, integ)
        write_csv(out / "trajectory.csv", ["t_us", "p0", "p1", "p2"], zip(traj.times, traj.p0, traj.p1, traj.p2))
        pop_sum = traj.p0 + traj.p1 + traj.p2
        summary.update(
            method=integ.method,
            max_p2=max_leakage(traj),
            final_p0=float(traj.p0[-1]),
            final_p1=float(traj.p1[-1]),
            final_p2=float(traj.p2[-1]),
            population_sum_error=float(np.max(np.abs(pop_sum - 1.0))),
            samples=int(traj.times.size),
        )
        return summary
    chain = cfg.chain()
    s = cfg.scenario(chain=chain)
    t_end = cfg.section("run").get("t_end_us")
    result = protocol.run_preparation(s, chain.drive.rabi, chain.drive.duration, t_end)
    traj = result.trajectory
    header = ["t_us", "fidelity", "pop_ground"] + [f"pop_phi_{j}" for j in range(1, chain.n + 1)]
    write_csv(out / "trajectory.csv", header, trajectory_rows(traj))
    summary.update(
        f_max=result.f_max,
        t_max_us=result.t_max,
        final_fidelity=result.final_fidelity,
        boundary=result.boundary,
        samples=int(traj.times.size),
        dim=int(traj.final_rho.shape[0]),
        **traj.stats,
    )
    if math.isfinite(chain.drive.duration):
        ts = traj.times
        i = int(np.argmin(np.abs(ts - chain.drive.duration)))
        summary["fidelity_at_pulse_end"] = float(traj.fidelity[i])
        summary["pulse_end_sample_us"] = float(ts[i])
    return summary


def _boundary_fields(side):
    return {"boundary": side is not None, "boundary_side": side if side else "none"}


def command_optimize(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    s = cfg.scenario()
    opts = cfg.section("optimize")
    res = protocol.optimize_drive(
        s, cfg.omega_bracket(), opts.get("grid_points", 12), opts.get("rel_tol", 1e-3), workers=threads
    )
    rows = [["grid", model.to_mhz(w), f, t, _status(f)] for w, f, t in res.scan]
    rows += [["refine", model.to_mhz(w), f, t, _status(f)] for w, f, t in res.refinement]
    write_csv(out / "scan.csv", ["stage", "omega_mhz", "f_max", "t_max_us", "status"], rows)
    summary = base_summary(cfg, "optimize")
    summary.update(
        omega_opt_mhz=model.to_mhz(res.omega_opt),
        t_opt_us=res.t_opt,
        f_opt=res.f_opt,
        evaluations=res.evaluations,
        **_boundary_fields(res.boundary),
    )
    return summary


def _status(f) -> str:
    return "failed" if f is None or (isinstance(f, float) and math.isnan(f)) else "ok"


def _safe(func, *args):
    try:
        return func(*args), "ok"
    except NUMERICAL_ERRORS as exc:
        return None, f"failed: {exc}"


def _sweep_n_point(args):
    cfg, n, action = args
    s = cfg.scenario(n=n)
    if action == "optimize":
        opts = cfg.section("optimize")
        res, status = _safe(protocol.optimize_drive, s, cfg.omega_bracket(), opts.get("grid_points", 12), opts.get("rel_tol", 1e-3))
        if res is None:
            return [n, None, None, None, "", status]
        return [n, model.to_mhz(res.omega_opt), res.t_opt, res.f_opt, res.boundary or "", status]
    rabi, t0 = s.chain.drive.rabi, s.chain.drive.duration
    res, status = _safe(protocol.run_preparation, s, rabi, t0)
    if res is None:
        return [n, model.to_mhz(rabi), None, None, "", status]
    return [n, model.to_mhz(rabi), res.t_max, res.f_max, "window" if res.boundary else "", status]


def _sweep_omega_point(args):
    cfg, n, rabi = args
    s = cfg.scenario(n=n)
    res, status = _safe(protocol.run_preparation, s, rabi)
    if res is None:
        return [n, model.to_mhz(rabi), None, None, status]
    return [n, model.to_mhz(rabi), res.f_max, res.t_max, status]


def _sweep_position_point(args):
    cfg, chain, dx, lam0 = args
    s = cfg.scenario(chain=chain)
    sweep = cfg.section("sweep")
    mode = sweep.get("mode", "reoptimize")
    bracket = cfg.omega_bracket() if mode == "reoptimize" else None
    rabi = chain.drive.rabi if mode == "fixed" else None
    pts, status = _safe(protocol.position_deviation_sweep, s, [dx], sweep.get("qubit", 2), mode, bracket, rabi)
    if pts is None:
        return [dx, dx / lam0, None, None, None, status]
    p = pts[0]
    return [dx, dx / lam0, p.f_opt, model.to_mhz(p.omega), p.t_opt, status]


def command_sweep(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    sweep = cfg.section("sweep")
    kind = sweep.get("kind")
    if kind is None:
        raise ConfigurationError("sweep.kind", "required key missing")
    if kind == "omega":
        ns = sweep.get("n_values", [cfg.require("chain", "n")])
        if not ns:
            raise ConfigurationError("sweep.n_values", "empty grid")
        jobs = [(cfg, n, w) for n in ns for w in cfg.rabi_grid()]
        for n in ns:
            cfg.scenario(n=n)  # configuration errors before any work
        header = ["n", "omega_mhz", "f_max", "t_max_us", "status"]
        rows = protocol._map(_sweep_omega_point, jobs, threads)
    elif kind == "n":
        ns = sweep.get("n_values")
        if not ns:
            raise ConfigurationError("sweep.n_values", "empty grid")
        action = sweep.get("action", "optimize")
        for n in ns:
            cfg.scenario(n=n)
        if action == "optimize":
            cfg.omega_bracket()
            header = ["n", "omega_opt_mhz", "t_opt_us", "f_opt", "boundary", "status"]
        else:
            header = ["n", "omega_mhz", "t_max_us", "f_max", "boundary", "status"]
        rows = protocol._map(_sweep_n_point, [(cfg, n, action) for n in ns], threads)
    elif kind == "position":
        if "deviations_m" in sweep and "deviations_lambda0" in sweep:
            raise ConfigurationError("sweep.deviations_m", "give either deviations_m or deviations_lambda0")
        ideal = cfg.chain()
        chain = ideal if isinstance(ideal, model.PositionalChainSpec) else model.positional_from_ideal(ideal, cfg.velocity())
        lam0 = chain.lambda_0
        if "deviations_m" in sweep:
            devs = list(sweep["deviations_m"])
        else:
            devs = [d * lam0 for d in sweep.get("deviations_lambda0", [])]
        if not devs:
            raise ConfigurationError("sweep.deviations_m", "empty grid")
        if sweep.get("mode", "reoptimize") == "reoptimize":
            cfg.omega_bracket()
        header = ["dx_m", "dx_lambda0", "f_opt", "omega_mhz", "t_opt_us", "status"]
        rows = protocol._map(_sweep_position_point, [(cfg, chain, dx, lam0) for dx in devs], threads)
    else:
        raise ConfigurationError("sweep.kind", f"unknown sweep kind {kind!r}")
    write_csv(out / "sweep.csv", header, rows)
    ok = sum(1 for r in rows if r[-1] == "ok")
    summary = base_summary(cfg, "sweep")
    summary.update(sweep_kind=kind, points=len(rows), points_ok=ok, points_failed=len(rows) - ok)
    if ok == 0:
        raise NumericalFailure("every sweep point failed")
    return summary


COMMANDS = {"run": command_run, "optimize": command_optimize, "sweep": command_sweep}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wgqed", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"wgqed {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", type=Path, help="TOML scenario file")
        src.add_argument("--preset", help="named scenario, see 'presets list'")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for grids")
        sp.add_argument("--rtol", type=float, help="integrator relative tolerance")
        sp.add_argument("--truncate-excitations", choices=["off", "2"], help="keep states with at most 2 excitations")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override a config value")
        sp.add_argument("-v", "--verbose", action="store_true")
    pp = sub.add_parser("presets")
    pp.add_argument("action", choices=["list"])
    return ap


def resolve_config(args) -> RunConfig:
    if args.preset is not None:
        entry = get_preset(args.preset)
        raw, name = entry["config"], args.preset
    else:
        raw, name = load_toml(args.config), args.config.stem
    extra = list(args.set)
    if args.rtol is not None:
        extra.append(f"integrator.rtol={args.rtol!r}")
    if args.truncate_excitations is not None:
        extra.append(f'integrator.truncate_excitations="{args.truncate_excitations}"')
    raw = apply_overrides(raw, extra)
    raw.setdefault("name", name)
    return parse_config(raw, name)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        width = max(len(k) for k in PRESETS)
        for name, entry in PRESETS.items():
            print(f"{name:<{width}}  {entry['command']:<8}  {entry['description']}")
        return EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.threads < 1:
            raise ConfigurationError("--threads", "must be >= 1")
        cfg = resolve_config(args)
        args.out.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        summary = COMMANDS[args.command](cfg, args.out, args.threads)
        wall = time.perf_counter() - start
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigurationError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WaveguideError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_json(args.out / "summary.json", summary)
    write_json(args.out / "timing.json", {"wall_time_s": wall, "command": args.command, "scenario": cfg.name})
    print(json.dumps({k: json_safe(v) for k, v in summary.items() if not k.startswith("config_")}, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
