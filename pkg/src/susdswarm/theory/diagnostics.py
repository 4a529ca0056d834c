"""Alignment and perception diagnostics evaluated along a trajectory log."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..control import Gains, total_control
from ..perception import BodyFrame, covariance, exact_principal_axes
from .dynamics import DegenerateShape, axes_angle, frame_rate_coefficient_general, local_geometry, wrap_angle

MISSING = float("nan")


def theta(frame_n, grad) -> float:
    """1 + <grad/|grad|, n>; NaN when the gradient vanishes."""
    g = np.asarray(grad, dtype=float)
    norm = math.hypot(g[0], g[1])
    if norm == 0.0:
        return MISSING
    return 1.0 + float(np.asarray(frame_n, dtype=float) @ g) / norm


def psi(q_exact, q_hat) -> float:
    """1 - <q, q_hat>, evaluated as 2 sin^2(phi/2) so tiny values keep their digits."""
    a = np.asarray(q_exact, dtype=float)
    b = np.asarray(q_hat, dtype=float)
    phi = math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1])
    s = math.sin(0.5 * phi)
    return 2.0 * s * s


@dataclass
class DiagnosticsRecord:
    """Per-step, per-agent arrays of shape (T+1, M)."""

    theta: np.ndarray
    psi: np.ndarray
    lambda_q: np.ndarray
    lambda_n: np.ndarray
    z_c: np.ndarray
    z_c_d: np.ndarray
    nu_max: np.ndarray
    predictor_residual: np.ndarray

    columns = ("theta", "psi", "lambda_q", "lambda_n", "z_c", "z_c_d", "nu_max", "predictor_residual")

    @property
    def shape(self):
        return self.theta.shape


def velocities_at(log, k, gains: Gains) -> np.ndarray:
    """Controls applied at step k, rebuilt from the logged frames and readings."""
    P = log.positions[k]
    return np.array(
        [
            total_control(i, log.z[k, i], P, log.neighbor_sets[k][i], BodyFrame.from_q(log.q[k, i]), gains)
            for i in range(log.n_agents)
        ]
    )


def exact_frames(log, k) -> np.ndarray:
    """Exact local q for every agent at step k, signed against the body frame."""
    P = log.positions[k]
    out = np.empty((log.n_agents, 2))
    for i, nb in enumerate(log.neighbor_sets[k]):
        out[i] = exact_principal_axes(covariance(P[[i, *sorted(nb)]]), log.q[k, i]).q
    return out


def compute_diagnostics(log, field, gains: Gains) -> DiagnosticsRecord:
    """Evaluate every diagnostic column on every logged row.

    ``predictor_residual`` is |forward-difference angular rate of the exact
    axes - the general frame-rate prediction| in rad per time unit; the last
    row has no forward step and is NaN, as are rows with a degenerate shape.
    """
    T1, M = log.z.shape
    normals = log.n
    arr = {c: np.full((T1, M), MISSING) for c in DiagnosticsRecord.columns}
    angles = np.full((T1, M), MISSING)
    kappas = np.full((T1, M), MISSING)
    for k in range(T1):
        P = log.positions[k]
        nsets = log.neighbor_sets[k]
        U = velocities_at(log, k, gains) if k + 1 < T1 else None
        for i in range(M):
            hood = [i, *sorted(nsets[i])]
            pts = P[hood]
            center = pts.mean(axis=0)
            try:
                geo = local_geometry(i, P, nsets, log.q[k, i])
                q_ex, lam_q, lam_n = geo.q, geo.lambda_q, geo.lambda_n
            except DegenerateShape:
                geo = None
                ax = exact_principal_axes(covariance(pts), log.q[k, i])
                q_ex, lam_q, lam_n = ax.q, ax.lambda_q, ax.lambda_n
            grad = field.gradient(center)
            zc = field.value(center)
            arr["theta"][k, i] = theta(normals[k, i], grad)
            arr["psi"][k, i] = psi(q_ex, log.q[k, i])
            arr["lambda_q"][k, i] = lam_q
            arr["lambda_n"][k, i] = lam_n
            arr["z_c"][k, i] = zc
            arr["z_c_d"][k, i] = zc - gains.z_desired
            nu = log.z[k, hood] - zc - (pts - center) @ grad
            arr["nu_max"][k, i] = float(np.max(np.abs(nu)))
            angles[k, i] = axes_angle(q_ex)
            if U is not None and geo is not None:
                kappas[k, i] = frame_rate_coefficient_general(geo, U)
    for k in range(T1 - 1):
        for i in range(M):
            if math.isnan(kappas[k, i]):
                continue
            rate = wrap_angle(angles[k + 1, i] - angles[k, i]) / log.dt
            arr["predictor_residual"][k, i] = abs(rate - kappas[k, i])
    return DiagnosticsRecord(**arr)


@dataclass
class LyapunovTrace:
    V1: np.ndarray
    V2: np.ndarray
    V3: np.ndarray
    V4: np.ndarray
    V5: np.ndarray
    V6: np.ndarray
    theta_domain_exit: np.ndarray  # steps where some theta >= 2
    psi_domain_exit: np.ndarray  # steps where some psi >= 1


def _ratio(x, bound):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x < bound, x / (bound - x), np.inf)


def lyapunov_scalars(diag: DiagnosticsRecord, whole_swarm_z_c_d=None) -> LyapunovTrace:
    """V1/V2/V5 use agent 0's columns (identical across agents on a complete graph);
    V3/V4/V6 sum over agents.  ``whole_swarm_z_c_d`` overrides the V5 input."""
    th, ps = diag.theta, diag.psi
    v1 = _ratio(th[:, 0], 2.0)
    v2 = _ratio(ps[:, 0], 1.0)
    v3 = _ratio(th, 2.0).sum(axis=1)
    v4 = _ratio(ps, 1.0).sum(axis=1)
    zcd = diag.z_c_d[:, 0] if whole_swarm_z_c_d is None else np.asarray(whole_swarm_z_c_d, dtype=float)
    v5 = 0.5 * zcd**2
    v6 = 0.5 * (diag.z_c**2).sum(axis=1)
    return LyapunovTrace(
        v1, v2, v3, v4, v5, v6,
        theta_domain_exit=np.flatnonzero((th >= 2.0).any(axis=1)),
        psi_domain_exit=np.flatnonzero((ps >= 1.0).any(axis=1)),
    )


def lyapunov_v1(theta_value):
    return theta_value / (2.0 - theta_value)


def lyapunov_v2(psi_value):
    return psi_value / (1.0 - psi_value)


def lyapunov_v5(z_c_d):
    return 0.5 * z_c_d**2
