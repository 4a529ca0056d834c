"""CSV log files and the log-directory layout.

A log directory holds ``trajectory.csv``, ``diagnostics.csv``, a copy of the
scenario as ``scenario.yaml`` and ``run.yaml`` with the run's termination
reason.  Floats are written with 17 significant digits, so a log read back
reproduces the in-memory arrays exactly.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np
import yaml

from .engine import TrajectoryLog
from .graph import is_connected

TRAJECTORY_COLUMNS = ("step", "t", "agent", "x", "y", "z", "qx", "qy", "nx", "ny")
DIAGNOSTICS_COLUMNS = (
    "step", "t", "agent", "theta", "psi", "lambda_q", "lambda_n", "z_c", "z_c_d", "nu_max", "predictor_residual",
)


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def write_trajectory(path, log: TrajectoryLog) -> None:
    n = log.n
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
        for k in range(log.n_steps + 1):
            t = fmt(k * log.dt)
            for i in range(log.n_agents):
                row = (
                    log.positions[k, i, 0], log.positions[k, i, 1], log.z[k, i],
                    log.q[k, i, 0], log.q[k, i, 1], n[k, i, 0], n[k, i, 1],
                )
                fh.write(f"{k},{t},{i}," + ",".join(fmt(v) for v in row) + "\n")


def write_diagnostics(path, diag, dt: float) -> None:
    T1, M = diag.shape
    cols = [getattr(diag, c) for c in DIAGNOSTICS_COLUMNS[3:]]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(DIAGNOSTICS_COLUMNS) + "\n")
        for k in range(T1):
            t = fmt(k * dt)
            for i in range(M):
                fh.write(f"{k},{t},{i}," + ",".join(fmt(c[k, i]) for c in cols) + "\n")


def _read_rows(path, columns):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != tuple(columns):
            raise ValueError(f"{path}: unexpected header {header}")
        return [row for row in reader if row]


def read_trajectory(path, dt: float, graph, termination: str = "horizon") -> TrajectoryLog:
    """Rebuild a :class:`TrajectoryLog`; neighbor sets are recomputed from ``graph``."""
    rows = _read_rows(path, TRAJECTORY_COLUMNS)
    steps = np.array([int(r[0]) for r in rows])
    agents = np.array([int(r[2]) for r in rows])
    T1, M = int(steps.max()) + 1, int(agents.max()) + 1
    if len(rows) != T1 * M:
        raise ValueError(f"{path}: expected {T1 * M} rows, found {len(rows)}")
    vals = np.array([[float(v) for v in r[3:]] for r in rows]).reshape(T1, M, 7)
    pos, z, q = vals[..., 0:2].copy(), vals[..., 2].copy(), vals[..., 3:5].copy()

    nsets = [graph.neighbor_sets(pos[k]) for k in range(T1)]
    conn = np.array([is_connected(graph, pos[k]) for k in range(T1)])
    return TrajectoryLog(dt=dt, positions=pos, z=z, q=q, neighbor_sets=nsets, connected=conn, termination=termination)


def read_diagnostics(path) -> dict:
    """Column name -> (T+1, M) array."""
    rows = _read_rows(path, DIAGNOSTICS_COLUMNS)
    T1 = max(int(r[0]) for r in rows) + 1
    M = max(int(r[2]) for r in rows) + 1
    vals = np.array([[float(v) for v in r[3:]] for r in rows]).reshape(T1, M, len(DIAGNOSTICS_COLUMNS) - 3)
    return {c: vals[..., j] for j, c in enumerate(DIAGNOSTICS_COLUMNS[3:])}


def write_run_info(path, info: dict) -> None:
    Path(path).write_text(yaml.safe_dump(info, sort_keys=True))


def read_run_info(path) -> dict:
    return yaml.safe_load(Path(path).read_text()) or {}
