"""Residuals of the coerced slow (alignment) and fast (perception) scalar systems.

The slow prediction is compared with a forward difference of theta along the
log.  The fast prediction moves the exact axis by one control step and then
applies the Euler-discretised boundary map, written in angle form, for the
same substeps the engine used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..control import Gains
from ..perception import _substeps
from .diagnostics import psi as psi_value
from .dynamics import DegenerateShape, local_geometry, mismatch_term, nonlinearity_sum


class NotApplicable(ValueError):
    pass


@dataclass
class SlowFastResult:
    theta: np.ndarray  # (T+1, M), exact-frame alignment
    theta_rate_fd: np.ndarray  # (T, M)
    theta_rate_pred: np.ndarray  # (T, M)
    psi: np.ndarray  # (T+1, M)
    psi_pred: np.ndarray  # (T, M), one-step prediction of psi[k+1]
    psi_pred_closed_form: np.ndarray  # same, continuous boundary flow
    delta: np.ndarray
    eta: np.ndarray
    mode: str

    @property
    def theta_residual(self) -> float:
        return relative_residual(self.theta_rate_fd, self.theta_rate_pred)

    @property
    def psi_residual(self) -> float:
        return relative_residual(self.psi[1:], self.psi_pred)

    @property
    def psi_residual_closed_form(self) -> float:
        return relative_residual(self.psi[1:], self.psi_pred_closed_form)


def relative_residual(measured, predicted) -> float:
    """max |measured - predicted| / max |predicted| over finite entries; 0 when both vanish."""
    m = np.asarray(measured, dtype=float)
    p = np.asarray(predicted, dtype=float)
    ok = np.isfinite(m) & np.isfinite(p)
    if not ok.any():
        return 0.0
    err = float(np.max(np.abs(m[ok] - p[ok])))
    if err == 0.0:
        return 0.0
    scale = float(np.max(np.abs(p[ok])))
    return err / scale if scale > 0.0 else math.inf


def euler_boundary_angle(phi, lambda_q, lambda_n, n_steps, h):
    """Angle of q_hat from q after ``n_steps`` renormalised Euler steps of the Oja flow."""
    c, s = math.cos(phi), math.sin(phi)
    for _ in range(n_steps):
        r = lambda_q * c * c + lambda_n * s * s
        c, s = c * (1.0 + h * (lambda_q - r)), s * (1.0 + h * (lambda_n - r))
        norm = math.hypot(c, s)
        c, s = c / norm, s / norm
    return math.atan2(s, c)


def boundary_flow_psi(psi0, gap, tau):
    """Closed-form solution of d psi/d tau = -gap psi (1-psi)(2-psi) for psi0 in [0, 1)."""
    if not 0.0 <= psi0 < 1.0:
        raise ValueError("psi0 must lie in [0, 1)")
    phi = math.acos(1.0 - psi0)
    phi_t = math.atan(math.tan(phi) * math.exp(-gap * tau))
    return 2.0 * math.sin(0.5 * phi_t) ** 2


def _boundary_closed_angle(phi, gap, tau):
    return math.atan2(math.sin(phi) * math.exp(-gap * tau), math.cos(phi))


def _signed_angle(a, b):
    """Angle rotating a onto b."""
    return math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1])


def _mode(log, gains: Gains):
    if gains.has_formation or gains.max_speed is not None:
        raise NotApplicable("spacing terms or speed clamp present; the scalar systems exclude them")
    M = log.n_agents
    complete = all(len(nb) == M - 1 for step in log.neighbor_sets for nb in step)
    if complete:
        return "complete"
    if gains.k2 == 0.0 and gains.z_desired == 0.0:
        return "incomplete"
    raise NotApplicable("incomplete-graph scalar systems cover source seeking only (k2 = 0, z_desired = 0)")


def slow_fast_residuals(log, field, gains: Gains, epsilon: float, oja_substep: float = 0.01) -> SlowFastResult:
    mode = _mode(log, gains)
    T1, M = log.z.shape
    normals = log.n
    k1, k2 = gains.k1, gains.k2
    tau = log.dt / epsilon
    n_sub, h = _substeps(tau, min(oja_substep, tau))

    th = np.full((T1, M), np.nan)
    ps = np.full((T1, M), np.nan)
    th_pred = np.full((T1, M), np.nan)
    kap = np.full((T1, M), np.nan)
    dl = np.full((T1, M), np.nan)
    et = np.full((T1, M), np.nan)
    rel = np.full((T1, M), np.nan)  # signed angle from exact q to q_hat
    gaps = np.full((T1, M), np.nan)
    lq = np.full((T1, M), np.nan)
    ln = np.full((T1, M), np.nan)
    qx = np.full((T1, M, 2), np.nan)

    for k in range(T1):
        P = log.positions[k]
        nsets = log.neighbor_sets[k]
        Z = log.z[k]
        Nhat = normals[k]
        for i in range(M):
            try:
                geo = local_geometry(i, P, nsets, log.q[k, i])
            except DegenerateShape:
                continue
            qx[k, i] = geo.q
            gaps[k, i], lq[k, i], ln[k, i] = geo.gap, geo.lambda_q, geo.lambda_n
            rel[k, i] = _signed_angle(geo.q, log.q[k, i])
            ps[k, i] = psi_value(geo.q, log.q[k, i])
            g = field.gradient(geo.center)
            gnorm = math.hypot(g[0], g[1])
            vartheta = nonlinearity_sum(geo, field)
            hood = list(geo.hood)
            if gnorm == 0.0:
                kap[k, i] = k1 / geo.gap * vartheta
                continue
            N = g / gnorm
            Nq = float(N @ geo.q)
            th[k, i] = 1.0 + float(N @ geo.n)
            H = field.hessian(geo.center)
            proj_n = geo.n - float(geo.n @ N) * N
            if mode == "complete":
                z_a = float(Z.mean())
                rc_dot = k1 * (z_a - gains.z_desired) * geo.n + k2 * geo.q
                e_i = 0.0
            else:
                rc_dot = k1 * (Z[hood] @ Nhat[hood]) / len(hood)
                e_i = mismatch_term(geo, Z, log.q[k], k1)
            n_dot_N = float(proj_n @ (H @ rc_dot)) / gnorm
            scale = k1 * geo.lambda_q / geo.gap
            delta = -Nq * e_i - k1 / geo.gap * vartheta * Nq + n_dot_N
            th_pred[k, i] = scale * gnorm * th[k, i] * (th[k, i] - 2.0) + delta
            dl[k, i] = delta
            kap[k, i] = scale * gnorm * Nq + k1 / geo.gap * vartheta + e_i
            et[k, i] = -kap[k, i] * float(geo.n @ log.q[k, i])

    th_fd = (th[1:] - th[:-1]) / log.dt
    ps_pred = np.full((T1 - 1, M), np.nan)
    ps_cf = np.full((T1 - 1, M), np.nan)
    for k in range(T1 - 1):
        for i in range(M):
            if not (np.isfinite(rel[k, i]) and np.isfinite(gaps[k + 1, i]) and np.isfinite(kap[k, i])):
                continue
            # exact axis turns by kappa dt, so the relative angle drops by the same amount
            phi_mid = rel[k, i] - kap[k, i] * log.dt
            phi_d = euler_boundary_angle(phi_mid, lq[k + 1, i], ln[k + 1, i], n_sub, h)
            phi_c = _boundary_closed_angle(phi_mid, gaps[k + 1, i], tau)
            ps_pred[k, i] = 2.0 * math.sin(0.5 * phi_d) ** 2
            ps_cf[k, i] = 2.0 * math.sin(0.5 * phi_c) ** 2
    return SlowFastResult(
        theta=th,
        theta_rate_fd=th_fd,
        theta_rate_pred=th_pred[:-1],
        psi=ps,
        psi_pred=ps_pred,
        psi_pred_closed_form=ps_cf,
        delta=dl,
        eta=et,
        mode=mode,
    )
