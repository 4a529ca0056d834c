"""Command-line front end: ``simulate``, ``verify`` and ``bounds``.

Exit codes: 0 success, 1 a verify check failed, 2 bad input or a numerical
failure during the run.  Set SUSDSWARM_LOG_LEVEL (e.g. DEBUG) for more output.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import logio
from .engine import NumericalFailure, run
from .scenario import ScenarioError, dump_scenario, load_scenario, scenario_from_dict
from .theory.checks import FAIL, run_checks
from .theory.diagnostics import compute_diagnostics
from .theory.report import bounds_report

log = logging.getLogger("susdswarm")


class UsageError(Exception):
    pass


def _setup_logging():
    level = os.environ.get("SUSDSWARM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def level_error(log_, field, z_desired, window=0.2):
    """Mean and max |z(r_c) - z_desired| over the last ``window`` fraction of rows."""
    c = log_.centers()
    k0 = int(np.floor((1.0 - window) * (len(c) - 1)))
    e = np.abs(np.array([field.value(p) for p in c[k0:]]) - z_desired)
    return float(e.mean()), float(e.max())


def simulate(scn, out_dir, figures=True):
    """Run a scenario and write its log directory; returns (log, diagnostics or None)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    traj = run(scn.positions, scn.graph, scn.field, scn.config)
    logio.write_trajectory(out / "trajectory.csv", traj)
    diag = None
    if scn.diagnostics:
        diag = compute_diagnostics(traj, scn.field, scn.gains)
        logio.write_diagnostics(out / "diagnostics.csv", diag, traj.dt)
    (out / "scenario.yaml").write_text(dump_scenario(scn))
    cfg = scn.config
    logio.write_run_info(out / "run.yaml", {
        "termination": traj.termination,
        "steps": traj.n_steps,
        "dt": cfg.dt,
        "epsilon": cfg.epsilon,
        "oja_substep": cfg.oja_substep,
        "seed": cfg.seed,
    })
    if figures and scn.figures:
        from .plotting import plot_diagnostics, plot_trajectory

        zd = scn.gains.z_desired if scn.gains.z_desired != 0.0 else None
        plot_trajectory(out / "trajectory.png", traj, scn.field, z_desired=zd)
        if diag is not None:
            plot_diagnostics(out / "diagnostics.png", traj.t, diag)
    return traj, diag


def _summary(scn, traj):
    zc = scn.field.value(traj.centers()[-1])
    parts = [f"scenario={scn.name}", f"steps={traj.n_steps}", f"termination={traj.termination}", f"final_z_c={zc:.6g}"]
    thr = scn.expect.get("level_error_threshold")
    if thr is not None:
        mean, _ = level_error(traj, scn.field, scn.gains.z_desired, scn.expect.get("window", 0.2))
        parts.append(f"level_error_mean={mean:.4g} threshold={thr:g} {'ok' if mean <= thr else 'exceeded'}")
    return " ".join(parts)


def _load_target(target, seed=None):
    """A log directory or a scenario; returns (scenario, trajectory log)."""
    p = Path(target)
    if p.is_dir():
        if not (p / "trajectory.csv").is_file():
            raise UsageError(f"{target}: directory has no trajectory.csv")
        import yaml

        scn = scenario_from_dict(yaml.safe_load((p / "scenario.yaml").read_text()))
        info = logio.read_run_info(p / "run.yaml") if (p / "run.yaml").is_file() else {}
        traj = logio.read_trajectory(p / "trajectory.csv", scn.config.dt, scn.graph, info.get("termination", "horizon"))
        return scn, traj
    scn = load_scenario(target).with_seed(seed)
    return scn, run(scn.positions, scn.graph, scn.field, scn.config)


def cmd_simulate(args) -> int:
    scn = load_scenario(args.scenario).with_seed(args.seed)
    traj, _ = simulate(scn, args.out, figures=not args.no_figures)
    print(_summary(scn, traj))
    return 0


def cmd_verify(args) -> int:
    scn, traj = _load_target(args.target, args.seed)
    results = run_checks(traj, scn.field, scn.gains, scn.config.epsilon, scn.config.oja_substep)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if r.status == FAIL]
    if failed:
        print("failed: " + ", ".join(failed))
        return 1
    print("all applicable checks passed")
    return 0


def _parse_sets(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise UsageError(f"--set {k}: not a number: {v!r}") from None
    return out


def cmd_bounds(args) -> int:
    scn, traj = _load_target(args.target, args.seed)
    params = dict(scn.bounds)
    params.update(_parse_sets(args.set))
    rep = bounds_report(traj, scn.field, scn.gains, scn.config.epsilon, params)
    for line in rep.lines():
        print(line)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="susdswarm", description="Gradient-free swarm source seeking and level-curve tracking.")
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="run a scenario and write CSV logs and figures")
    s.add_argument("scenario", help="scenario file or bundled scenario name")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    s.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
    s.set_defaults(func=cmd_simulate)
    v = sub.add_parser("verify", help="run the invariant checks on a scenario or log directory")
    v.add_argument("target")
    v.add_argument("--seed", type=int, default=None)
    v.set_defaults(func=cmd_verify)
    b = sub.add_parser("bounds", help="evaluate stability and ultimate bounds along a run")
    b.add_argument("target")
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a bound input (mu1, chi1, d, ...)")
    b.set_defaults(func=cmd_bounds)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: scenario {exc}", file=sys.stderr)
    except NumericalFailure as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
    except (UsageError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
