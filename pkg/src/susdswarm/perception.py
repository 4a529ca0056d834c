"""Local shape perception: scatter matrix, Oja flow body frame, exact principal axes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEGENERATE_TOL = 1e-12


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True)
class SymMat2:
    c11: float
    c12: float
    c22: float

    @classmethod
    def from_array(cls, C):
        C = np.asarray(C, dtype=float)
        return cls(float(C[0, 0]), float(0.5 * (C[0, 1] + C[1, 0])), float(C[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.c11, self.c12], [self.c12, self.c22]])

    def __matmul__(self, v):
        return np.array([self.c11 * v[0] + self.c12 * v[1], self.c12 * v[0] + self.c22 * v[1]])


@dataclass(frozen=True)
class BodyFrame:
    """Estimated frame: ``q`` along the spread, ``n`` its counterclockwise normal."""

    q: np.ndarray
    n: np.ndarray

    @classmethod
    def from_q(cls, q):
        q = np.asarray(q, dtype=float)
        return cls(q, rotate90(q))


@dataclass(frozen=True)
class PrincipalAxes:
    q: np.ndarray
    n: np.ndarray
    lambda_q: float
    lambda_n: float

    @property
    def gap(self) -> float:
        return self.lambda_q - self.lambda_n


def covariance(points) -> SymMat2:
    """Unnormalised scatter sum of ``points`` about their mean."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[0] < 2:
        raise DegenerateInputError("covariance needs at least two points")
    # sum / n matches ndarray.mean bit for bit without its dispatch overhead
    D = P - P.sum(axis=0) / P.shape[0]
    return SymMat2(float(D[:, 0] @ D[:, 0]), float(D[:, 0] @ D[:, 1]), float(D[:, 1] @ D[:, 1]))


def rotate90(v) -> np.ndarray:
    return np.array([-v[1], v[0]], dtype=float)


def _substeps(duration, substep):
    n = max(1, math.ceil(duration / substep - 1e-9))
    return n, duration / n


def oja_flow_xy(c11, c12, c22, x, y, n_steps, h):
    """Euler-integrate the Oja flow on plain floats, renormalising every substep."""
    for _ in range(n_steps):
        cx = c11 * x + c12 * y
        cy = c12 * x + c22 * y
        s = x * cx + y * cy
        x += h * (cx - s * x)
        y += h * (cy - s * y)
        norm = math.sqrt(x * x + y * y)
        if not 0.0 < norm < math.inf:
            raise FloatingPointError("Oja step left the unit circle; reduce the substep")
        x /= norm
        y /= norm
    return x, y


def oja_flow(C, q_init, duration: float, substep: float = 0.01) -> BodyFrame:
    """Run dq/dtau = (I - q q') C q from ``q_init`` for ``duration`` tau-units."""
    if not isinstance(C, SymMat2):
        C = SymMat2.from_array(C)
    x, y = float(q_init[0]), float(q_init[1])
    norm = math.hypot(x, y)
    if norm == 0.0:
        raise ValueError("oja_flow: zero initial vector")
    if duration <= 0 or substep <= 0:
        raise ValueError("oja_flow: duration and substep must be positive")
    n, h = _substeps(duration, min(substep, duration))
    x, y = oja_flow_xy(C.c11, C.c12, C.c22, x / norm, y / norm, n, h)
    return BodyFrame.from_q((x, y))


def oja_trajectory(C, q_init, duration: float, substep: float = 0.01) -> np.ndarray:
    """All substep iterates of :func:`oja_flow`, including the start, shape (n+1, 2)."""
    if not isinstance(C, SymMat2):
        C = SymMat2.from_array(C)
    x, y = float(q_init[0]), float(q_init[1])
    norm = math.hypot(x, y)
    x, y = x / norm, y / norm
    n, h = _substeps(duration, min(substep, duration))
    out = np.empty((n + 1, 2))
    out[0] = x, y
    for k in range(n):
        x, y = oja_flow_xy(C.c11, C.c12, C.c22, x, y, 1, h)
        out[k + 1] = x, y
    return out


def exact_principal_axes(C, reference_q=(1.0, 0.0)) -> PrincipalAxes:
    """Closed-form eigenpairs of a symmetric 2x2 matrix.

    ``q`` is signed so that ``<q, reference_q> >= 0``.  With equal eigenvalues
    every direction is principal and ``reference_q`` itself is returned.
    """
    if not isinstance(C, SymMat2):
        C = SymMat2.from_array(C)
    a, b, d = C.c11, C.c12, C.c22
    mid = 0.5 * (a + d)
    rad = math.hypot(0.5 * (a - d), b)
    lam_q, lam_n = mid + rad, mid - rad
    ref = np.asarray(reference_q, dtype=float)
    if 2.0 * rad <= DEGENERATE_TOL * max(1.0, abs(mid)):
        q = ref / math.hypot(ref[0], ref[1])
        return PrincipalAxes(q, rotate90(q), mid, mid)
    phi = 0.5 * math.atan2(2.0 * b, a - d)
    q = np.array([math.cos(phi), math.sin(phi)])
    if q @ ref < 0.0:
        q = -q
    return PrincipalAxes(q, rotate90(q), lam_q, lam_n)


def align_sign(v, reference):
    """Flip ``v`` if it points away from ``reference``."""
    v = np.asarray(v, dtype=float)
    return -v if v @ np.asarray(reference, dtype=float) < 0.0 else v
