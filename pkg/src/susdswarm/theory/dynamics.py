"""Closed-form body-frame rates and the finite-difference oracle they are checked against.

All predictors return ``(n_dot, q_dot)`` for the exact principal axes of the
agent's local scatter matrix.  The exact ``q`` is signed against the agent's
own body frame, so a predictor and the simulated frame refer to the same axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..control import Gains
from ..perception import covariance, exact_principal_axes

GAP_TOL = 1e-9


class DegenerateShape(ValueError):
    """Local eigengap too small for the frame rate to be defined."""


@dataclass(frozen=True)
class LocalGeometry:
    """Agent i's view: its hood, center, offsets and exact axes."""

    hood: tuple
    center: np.ndarray
    offsets: np.ndarray  # (len(hood), 2), r_k - r_c
    q: np.ndarray
    n: np.ndarray
    lambda_q: float
    lambda_n: float

    @property
    def gap(self) -> float:
        return self.lambda_q - self.lambda_n


def _neighbor_set(i, positions, graph):
    if hasattr(graph, "neighbors"):
        return graph.neighbors(i, positions)
    return frozenset(graph[i])


def local_geometry(i, positions, graph, reference_q=None, gap_tol=GAP_TOL) -> LocalGeometry:
    """``graph`` is a VisibilityGraph or a per-agent sequence of neighbor sets."""
    P = np.asarray(positions, dtype=float)
    hood = (i, *sorted(_neighbor_set(i, P, graph)))
    pts = P[list(hood)]
    center = pts.sum(axis=0) / pts.shape[0]
    ref = (1.0, 0.0) if reference_q is None else reference_q
    ax = exact_principal_axes(covariance(pts), ref)
    if ax.gap <= gap_tol * max(1.0, ax.lambda_q):
        raise DegenerateShape(f"agent {i}: eigengap {ax.gap:.3g} below tolerance")
    return LocalGeometry(hood, center, pts - center, ax.q, ax.n, ax.lambda_q, ax.lambda_n)


def _rates(kappa, geo):
    return -kappa * geo.q, kappa * geo.n


def taylor_residual(field, r_k, r_center) -> float:
    """Part of z(r_k) not explained by the tangent plane at ``r_center``."""
    r_k = np.asarray(r_k, dtype=float)
    r_center = np.asarray(r_center, dtype=float)
    return float(field.value(r_k) - field.value(r_center) - (r_k - r_center) @ field.gradient(r_center))


def frame_rate_coefficient_general(geo: LocalGeometry, velocities) -> float:
    """kappa with n_dot = -kappa q and q_dot = kappa n, for arbitrary velocities."""
    U = np.asarray(velocities, dtype=float)[list(geo.hood)]
    D = geo.offsets
    s = (U @ geo.q) @ (D @ geo.n) + (D @ geo.q) @ (U @ geo.n)
    return float(s / geo.gap)


def predict_frame_rate_general(i, positions, velocities, graph, reference_q=None):
    geo = local_geometry(i, positions, graph, reference_q)
    return _rates(frame_rate_coefficient_general(geo, velocities), geo)


def susd_terms(geo: LocalGeometry, z, frames_q, gains: Gains):
    """The vector w_i and scalar sigma_i of the SUSD-specialised frame rate."""
    hood = list(geo.hood)
    zd = np.asarray(z, dtype=float)[hood] - gains.z_desired
    Qk = np.asarray(frames_q, dtype=float)[hood]
    Nk = np.stack([-Qk[:, 1], Qk[:, 0]], axis=1)
    D = geo.offsets
    zc_d = float(zd.mean())
    w = ((zd * (Nk @ geo.n) - zc_d)[:, None] * D).sum(axis=0)
    sigma = gains.k1 * float((zd * (Nk @ geo.q) - zc_d) @ (D @ geo.n)) + gains.k2 * float(
        (Qk @ geo.n) @ (D @ geo.q) + (Qk @ geo.q) @ (D @ geo.n)
    )
    return w, sigma


def predict_frame_rate_susd(i, positions, z, frames_q, graph, gains: Gains, reference_q=None):
    """Frame rate when every agent in the hood follows the SUSD law with its own frame."""
    ref = np.asarray(frames_q, dtype=float)[i] if reference_q is None else reference_q
    geo = local_geometry(i, positions, graph, ref)
    w, sigma = susd_terms(geo, z, frames_q, gains)
    kappa = (gains.k1 * float(w @ geo.q) + sigma) / geo.gap
    return _rates(kappa, geo)


def mismatch_term(geo: LocalGeometry, z, frames_q, k1: float) -> float:
    """E_i: the frame-mismatch contribution for source seeking on incomplete graphs."""
    hood = list(geo.hood)
    zk = np.asarray(z, dtype=float)[hood]
    Qk = np.asarray(frames_q, dtype=float)[hood]
    Nk = np.stack([-Qk[:, 1], Qk[:, 0]], axis=1)
    D = geo.offsets
    s = zk @ ((Nk @ geo.q) * (D @ geo.n) + (Nk @ geo.n - 1.0) * (D @ geo.q))
    return float(k1 * s / geo.gap)


def nonlinearity_sum(geo: LocalGeometry, field, axis=None) -> float:
    """sum_k nu_k <r_k - r_c, axis> with nu_k the Taylor residual about the local center."""
    axis = geo.q if axis is None else axis
    zc = field.value(geo.center)
    g = field.gradient(geo.center)
    total = 0.0
    for d in geo.offsets:
        nu = field.value(geo.center + d) - zc - float(d @ g)
        total += nu * float(d @ axis)
    return total


def predict_frame_rate_incomplete_source(i, positions, z, frames_q, graph, field, k1=1.0, reference_q=None):
    """Source-seeking rate split into the gradient, nonlinearity and mismatch parts.

    Returns ``(n_dot, q_dot, parts)`` with ``parts`` holding the three scalar
    coefficients.  Valid for k2 = 0 and z_desired = 0.
    """
    ref = np.asarray(frames_q, dtype=float)[i] if reference_q is None else reference_q
    geo = local_geometry(i, positions, graph, ref)
    g = field.gradient(geo.center)
    grad_part = k1 * geo.lambda_q / geo.gap * float(g @ geo.q)
    nu_hat = k1 / geo.gap * nonlinearity_sum(geo, field)
    e_i = mismatch_term(geo, z, frames_q, k1)
    n_dot, q_dot = _rates(grad_part + nu_hat + e_i, geo)
    return n_dot, q_dot, {"gradient": grad_part, "nu_hat": nu_hat, "mismatch": e_i}


@dataclass(frozen=True)
class CompleteRate:
    n_dot: np.ndarray
    q_dot: np.ndarray
    n_dot_consensus: np.ndarray  # the (I - n n') N_c form of n_dot
    nu_hat: float
    vartheta: float


def predict_frame_rate_complete(positions, field, gains: Gains, reference_q=(1.0, 0.0)) -> CompleteRate:
    """Whole-swarm frame rate on a complete graph with every agent on the exact frame."""
    P = np.asarray(positions, dtype=float)
    M = P.shape[0]
    geo = local_geometry(0, P, [frozenset(range(1, M))], reference_q)
    g = field.gradient(geo.center)
    gnorm = math.hypot(g[0], g[1])
    vartheta = nonlinearity_sum(geo, field)
    nu_hat = gains.k1 / geo.gap * vartheta
    scale = gains.k1 * geo.lambda_q / geo.gap
    kappa = scale * float(g @ geo.q) + nu_hat
    n_dot, q_dot = _rates(kappa, geo)
    if gnorm > 0.0:
        N = g / gnorm
        proj = N - float(geo.n @ N) * geo.n
        n_cons = -scale * gnorm * proj - nu_hat * geo.q
    else:
        n_cons = -nu_hat * geo.q
    return CompleteRate(n_dot, q_dot, n_cons, nu_hat, vartheta)


def axes_angle(q) -> float:
    return math.atan2(q[1], q[0])


def wrap_angle(a: float) -> float:
    # principal axis angles are defined modulo pi
    return (a + 0.5 * math.pi) % math.pi - 0.5 * math.pi


def fd_frame_rate(i, positions, velocities, graph, reference_q=None, h=1e-5):
    """Central difference of the exact axes under the virtual motion r + s u, s = +-h.

    The neighbor sets are frozen at the unperturbed positions.
    """
    P = np.asarray(positions, dtype=float)
    U = np.asarray(velocities, dtype=float)
    nsets = [_neighbor_set(j, P, graph) for j in range(P.shape[0])]
    geo0 = local_geometry(i, P, nsets, reference_q)
    ahead = local_geometry(i, P + h * U, nsets, geo0.q)
    behind = local_geometry(i, P - h * U, nsets, geo0.q)
    return (ahead.n - behind.n) / (2.0 * h), (ahead.q - behind.q) / (2.0 * h)


def fd_frame_angle_rate(i, positions, velocities, graph, h=1e-5) -> float:
    """Angular rate of the exact axes, from the same central difference."""
    P = np.asarray(positions, dtype=float)
    U = np.asarray(velocities, dtype=float)
    nsets = [_neighbor_set(j, P, graph) for j in range(P.shape[0])]
    a = axes_angle(local_geometry(i, P + h * U, nsets).q)
    b = axes_angle(local_geometry(i, P - h * U, nsets).q)
    return wrap_angle(a - b) / (2.0 * h)


