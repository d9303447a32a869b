"""Command-line front end.

Every run writes its outputs plus ``manifest.json`` into one directory.
Data files are deterministic functions of the resolved config; only the
manifest carries timestamps.

Exit codes: 0 success, 2 config error, 3 blow-up, 4 suite failure.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import datetime
import enum
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    load_config,
    solve_config,
    strichartz_config,
    suite_config,
    truncation_configs,
    validate_keys,
)
from .data import make_initial_data
from .grid import RadialGrid, integrate_measure
from .inequalities import Admissibility, classify, run_suite, strichartz_admissible, strichartz_study
from .morawetz import (
    WeightFamily,
    build_weight,
    modified_potential,
    morawetz_potential,
    validate_conditions,
    write_weight_csv,
)
from .solver import BlowUpError, ConfigError, TimeSeries, energy, trajectory
from .truncation import run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_SUITE = 0, 2, 3, 4
MANIFEST = "manifest.json"

SOLVE_COLUMNS = ("t", "E", "M1", "M2", "M3", "M_tilde", "mod_energy", "u_l4_4",
                 "u_l4_4_integral", "energy_drift")


def jsonable(x):
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)}
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    return x


def write_json(path: Path, payload: dict) -> None:
    body = {"manifest": MANIFEST, **jsonable(payload)}
    with open(path, "w") as fh:
        json.dump(body, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class Run:
    """Collects outputs and writes the manifest."""

    def __init__(self, command: str, out: Path, config, seed):
        self.command, self.out, self.config, self.seed = command, out, config, seed
        self.started = _now()
        self.outputs: list[str] = []
        self.extra: dict = {}
        out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out / name

    def finish(self, status: int) -> int:
        manifest = {
            "command": self.command, "config": jsonable(self.config), "version": __version__,
            "seed": self.seed, "started": self.started, "finished": _now(),
            "outputs": self.outputs, "exit_status": status, **jsonable(self.extra),
        }
        with open(self.out / MANIFEST, "w") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")
        return status


def output_dir(args, command: str) -> Path:
    if args.out:
        return Path(args.out)
    root = os.environ.get("HYPWAVE_OUT") or "hypwave_out"
    return Path(root) / command


def _flat(args, command: str) -> dict:
    flat = load_config(args.config, command)
    if args.seed is not None:
        flat["seed" if command in ("solve", "truncation") else "ensemble.seed"] = int(args.seed)
    return flat


# -- solve ------------------------------------------------------------------------

def solve_series(cfg) -> TimeSeries:
    grid = RadialGrid(cfg.rmax, cfg.n)
    st = make_initial_data(grid, cfg.data)
    w = [build_weight(WeightFamily.A1, grid), build_weight(WeightFamily.A2, grid),
         build_weight(WeightFamily.A3, grid, cfg.alpha)]
    w4 = build_weight(WeightFamily.A4, grid, cfg.alpha_tilde)
    c1, c2, c3, c4 = cfg.c
    ts = TimeSeries(list(SOLVE_COLUMNS))
    e0 = None
    rows = []
    for snap in trajectory(st, cfg.integrator):
        e = energy(snap)
        e0 = e if e0 is None else e0
        m = [morawetz_potential(snap, x) for x in w]
        mt = modified_potential(snap, w4)
        rows.append({"t": snap.t, "E": e, "M1": m[0], "M2": m[1], "M3": m[2], "M_tilde": mt,
                     "mod_energy": e - c1 * m[0] - c2 * m[1] - c3 * m[2] - c4 * mt,
                     "u_l4_4": integrate_measure(snap.u**4),
                     "energy_drift": (e - e0) / e0 if e0 else e - e0})
    t = np.array([r["t"] for r in rows])
    y = np.array([r["u_l4_4"] for r in rows])
    acc = np.zeros_like(y)
    if len(t) > 1:
        acc[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    for r, a in zip(rows, acc):
        r["u_l4_4_integral"] = a
        ts.append(r)
    return ts


def cmd_solve(args) -> int:
    cfg = solve_config(_flat(args, "solve"))
    run = Run("solve", output_dir(args, "solve"), cfg, cfg.data.seed)
    ts = solve_series(cfg)
    ts.to_csv(run.path("timeseries.csv"), MANIFEST)
    write_json(run.path("timeseries.json"), ts.to_dict())
    return run.finish(EXIT_OK)


# -- truncation -------------------------------------------------------------------

def _truncation_job(cfg):
    ledger, report = run_experiment(cfg)
    return ledger, report


def cmd_truncation(args) -> int:
    cfgs = truncation_configs(_flat(args, "truncation"))
    run = Run("truncation", output_dir(args, "truncation"), cfgs if len(cfgs) > 1 else cfgs[0],
              cfgs[0].seed)
    jobs = max(1, int(args.jobs))
    if jobs > 1 and len(cfgs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=min(jobs, len(cfgs))) as pool:
            results = list(pool.map(_truncation_job, cfgs))
    else:
        results = [_truncation_job(c) for c in cfgs]
    index = []
    ok = True
    for cfg, (ledger, report) in zip(cfgs, results):
        tag = "" if len(cfgs) == 1 else f"_s{cfg.s:g}"
        lname, rname = f"ledger{tag}.csv", f"report{tag}.json"
        ledger.to_csv(run.path(lname), MANIFEST)
        write_json(run.path(rname), report)
        index.append({"s": cfg.s, "ledger": lname, "report": rname, "pass": report["pass"]})
        ok &= report["pass"]
    run.extra["runs"] = index
    return run.finish(EXIT_OK if ok else EXIT_SUITE)


# -- weights ----------------------------------------------------------------------

def cmd_weights(args) -> int:
    flat = load_config(args.config, "weights")
    for key in ("family", "param", "rmax", "n"):
        v = getattr(args, key, None)
        if v is not None:
            flat[key] = v
    flat = validate_keys(flat, "weights")
    try:
        family = WeightFamily(flat.get("family", "A1").upper())
    except ValueError:
        raise ConfigError(f"family must be one of A1..A4, got {flat.get('family')!r}") from None
    rmax, n = flat.get("rmax", 10.0), flat.get("n", 4096)
    try:
        grid = RadialGrid(rmax, n)
        w = build_weight(family, grid, flat.get("param"))
    except ValueError as exc:
        raise ConfigError(f"{family.value}: {exc}") from None
    resolved = {"family": family.value, "param": flat.get("param"), "rmax": rmax, "n": n}
    run = Run("weights", output_dir(args, "weights"), resolved, None)
    rep = validate_conditions(w)
    csv_path = run.path(f"weights_{family.value}.csv")
    write_weight_csv(w, csv_path, [f"manifest: {MANIFEST}"])
    with open(csv_path, "a") as fh:
        fh.write(f"# validation: {'pass' if rep.passed else 'fail'}\n")
        for name, c in rep.conditions.items():
            iv = c.failure_interval()
            where = "" if iv is None else f" on [{iv[0]:.6g}, {iv[1]:.6g}]"
            fh.write(f"# {name}: {'pass' if c.passed else 'fail'}{where}"
                     f" worst_margin={c.worst_margin:.6g}\n")
        fh.write(f"# interface_mass: {rep.interface_mass:.17g}\n")
    write_json(run.path(f"weights_{family.value}_report.json"), rep.as_dict())
    return run.finish(EXIT_OK)


# -- inequalities -----------------------------------------------------------------

def cmd_inequalities(args) -> int:
    cfg = suite_config(_flat(args, "inequalities"))
    run = Run("inequalities", output_dir(args, "inequalities"), cfg, cfg.ensemble.seed)
    rep = run_suite(cfg)
    write_json(run.path("inequalities_report.json"), rep)
    for c in rep["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']} {c['max_ratio']:.6g}")
    return run.finish(EXIT_OK if rep["pass"] else EXIT_SUITE)


def cmd_strichartz(args) -> int:
    flat = load_config(args.config, "strichartz")
    if args.triple:
        parts = args.triple.split(",")
        if len(parts) != 3:
            raise ConfigError("--triple needs p,q,gamma")
        flat.update(validate_keys(dict(zip(("p", "q", "gamma"), parts)), "strichartz"))
    if args.seed is not None:
        flat["ensemble.seed"] = int(args.seed)
    triple, ens, horizons, dt_snap = strichartz_config(flat)
    resolved = {"triple": triple, "ensemble": ens, "horizons": horizons, "dt_snap": dt_snap}
    run = Run("strichartz", output_dir(args, "strichartz"), resolved, ens.seed)
    rep = classify(triple)
    if strichartz_admissible(triple) is not Admissibility.Neither:
        res = strichartz_study([triple], ens, horizons, dt_snap=dt_snap)[0]
        rep["ratios"] = {f"{k:g}": v for k, v in res.items()}
    else:
        rep["ratios"] = None
    write_json(run.path("strichartz_report.json"), rep)
    print(f"{triple.as_list()} {rep['membership']}")
    return run.finish(EXIT_OK)


# -- entry point -------------------------------------------------------------------

COMMANDS = {"solve": cmd_solve, "truncation": cmd_truncation, "weights": cmd_weights,
            "inequalities": cmd_inequalities, "strichartz": cmd_strichartz}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypwave", description="Cubic wave equation on hyperbolic space")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="YAML file with dotted keys")
        s.add_argument("--out", help="output directory (default $HYPWAVE_OUT/<command>)")
        s.add_argument("--jobs", type=int, default=1, help="parallel runs for sweeps")
        s.add_argument("--seed", type=int, help="overrides the config seed")
        if name == "weights":
            s.add_argument("--family", help="A1, A2, A3 or A4")
            s.add_argument("--param", type=float, help="exponent for A3/A4")
            s.add_argument("--rmax", type=float)
            s.add_argument("--n", type=int)
        if name == "strichartz":
            s.add_argument("--triple", help="p,q,gamma, e.g. 4,4,1/2 or inf,2,0")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
