"""Scalar fields over the plane.

Agents only ever call :meth:`ScalarField.value`.  Gradients and Hessians exist
for the diagnostics and bound calculators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

FD_STEP = 1e-6


class ScalarField:
    """Base class. Subclasses override ``value`` and, when they can, the oracles."""

    kind = "abstract"
    fd_step = FD_STEP

    def value(self, r) -> float:
        raise NotImplementedError

    def gradient(self, r) -> np.ndarray:
        return fd_gradient(self.value, r, self.fd_step)

    def hessian(self, r) -> np.ndarray:
        return fd_hessian(self.value, r, 1e-4)

    def values(self, points) -> np.ndarray:
        return np.array([self.value(p) for p in np.asarray(points, dtype=float)])

    def to_dict(self) -> dict:
        raise NotImplementedError


def fd_gradient(f, r, h=FD_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function of a 2-vector."""
    r = np.asarray(r, dtype=float)
    g = np.empty(2)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        g[k] = (f(r + e) - f(r - e)) / (2.0 * h)
    return g


def fd_hessian(f, r, h=1e-4) -> np.ndarray:
    """Second-order central-difference Hessian, symmetrised."""
    r = np.asarray(r, dtype=float)
    H = np.empty((2, 2))
    f0 = f(r)
    for a in range(2):
        ea = np.zeros(2)
        ea[a] = h
        H[a, a] = (f(r + ea) - 2.0 * f0 + f(r - ea)) / h**2
        for b in range(a + 1, 2):
            eb = np.zeros(2)
            eb[b] = h
            H[a, b] = H[b, a] = (
                f(r + ea + eb) - f(r + ea - eb) - f(r - ea + eb) + f(r - ea - eb)
            ) / (4.0 * h**2)
    return H


def spectral_norm(H) -> float:
    """Largest absolute eigenvalue of a symmetric 2x2 matrix."""
    H = np.asarray(H, dtype=float)
    a, b, d = H[0, 0], 0.5 * (H[0, 1] + H[1, 0]), H[1, 1]
    mid = 0.5 * (a + d)
    rad = math.hypot(0.5 * (a - d), b)
    return max(abs(mid + rad), abs(mid - rad))


@dataclass(frozen=True)
class QuadraticField(ScalarField):
    """z(r) = |r - source|^2."""

    source: tuple = (0.0, 0.0)
    kind = "quadratic"

    def value(self, r) -> float:
        dx = r[0] - self.source[0]
        dy = r[1] - self.source[1]
        return float(dx * dx + dy * dy)

    def gradient(self, r):
        return 2.0 * (np.asarray(r, dtype=float) - np.asarray(self.source, dtype=float))

    def hessian(self, r):
        return 2.0 * np.eye(2)

    def to_dict(self):
        return {"type": self.kind, "source": [float(v) for v in self.source]}


@dataclass(frozen=True)
class LinearField(ScalarField):
    """z(r) = <slope, r> + offset.  Unbounded; used for diagnostics where the Taylor residual vanishes."""

    slope: tuple = (1.0, 0.0)
    offset: float = 0.0
    kind = "linear"

    def value(self, r) -> float:
        return float(self.slope[0] * r[0] + self.slope[1] * r[1] + self.offset)

    def gradient(self, r):
        return np.asarray(self.slope, dtype=float).copy()

    def hessian(self, r):
        return np.zeros((2, 2))

    def to_dict(self):
        return {"type": self.kind, "slope": [float(v) for v in self.slope], "offset": float(self.offset)}


@dataclass(frozen=True)
class ZeroField(ScalarField):
    kind = "zero"

    def value(self, r) -> float:
        return 0.0

    def gradient(self, r):
        return np.zeros(2)

    def hessian(self, r):
        return np.zeros((2, 2))

    def to_dict(self):
        return {"type": self.kind}


def _rotation_45():
    return (math.sqrt(2.0) / 2.0) * np.array([[1.0, -1.0], [1.0, 1.0]])


@dataclass(frozen=True)
class NonconvexField(ScalarField):
    """Two anisotropic Gaussian wells on top of a cone.

    z(r) = 2 - exp(-(r-a)' S1 (r-a)) - exp(-(r-b)' A' S2 A (r-b)) + |r|

    Defaults are the benchmark values (a=(1,0), b=(0,-2), S1=0.9 diag(1/sqrt(30), 1),
    S2=0.9 diag(1, 1/sqrt(15)), A a 45 degree rotation).  ``offset`` shifts
    every value; ``offset=-field.value((0, 0))`` puts the minimum at zero.  The cone is not
    differentiable at the origin; the oracles drop its contribution there.
    """

    a: tuple = (1.0, 0.0)
    b: tuple = (0.0, -2.0)
    s1: tuple = (0.9 / math.sqrt(30.0), 0.9)
    s2: tuple = (0.9, 0.9 / math.sqrt(15.0))
    rotation: tuple = tuple(map(tuple, _rotation_45()))
    offset: float = 0.0
    kind = "nonconvex"

    def _wells(self):
        P1 = np.diag(self.s1)
        A = np.asarray(self.rotation, dtype=float)
        P2 = A.T @ np.diag(self.s2) @ A
        return ((np.asarray(self.a, dtype=float), P1), (np.asarray(self.b, dtype=float), P2))

    def value(self, r) -> float:
        r = np.asarray(r, dtype=float)
        z = 2.0 + self.offset + math.hypot(r[0], r[1])
        for c, P in self._wells():
            d = r - c
            z -= math.exp(-float(d @ P @ d))
        return float(z)

    def gradient(self, r):
        r = np.asarray(r, dtype=float)
        g = np.zeros(2)
        for c, P in self._wells():
            d = r - c
            g += 2.0 * math.exp(-float(d @ P @ d)) * (P @ d)
        rn = math.hypot(r[0], r[1])
        if rn > 0.0:
            g += r / rn
        return g

    def hessian(self, r):
        r = np.asarray(r, dtype=float)
        H = np.zeros((2, 2))
        for c, P in self._wells():
            d = r - c
            Pd = P @ d
            H += 2.0 * math.exp(-float(d @ P @ d)) * (P - 2.0 * np.outer(Pd, Pd))
        rn = math.hypot(r[0], r[1])
        if rn > 0.0:
            u = r / rn
            H += (np.eye(2) - np.outer(u, u)) / rn
        return H

    def smooth_part(self, r) -> float:
        """The field without the cone term (differentiable everywhere)."""
        return self.value(r) - math.hypot(r[0], r[1])

    def to_dict(self):
        return {
            "type": self.kind,
            "a": list(self.a),
            "b": list(self.b),
            "s1": list(self.s1),
            "s2": list(self.s2),
            "rotation": [list(row) for row in self.rotation],
            "offset": float(self.offset),
        }


@dataclass(frozen=True)
class CompositeField(ScalarField):
    """Weighted sum of other fields."""

    terms: tuple = dc_field(default_factory=tuple)  # ((weight, field), ...)
    kind = "composite"

    def value(self, r) -> float:
        return float(sum(w * f.value(r) for w, f in self.terms))

    def gradient(self, r):
        g = np.zeros(2)
        for w, f in self.terms:
            g += w * f.gradient(r)
        return g

    def hessian(self, r):
        H = np.zeros((2, 2))
        for w, f in self.terms:
            H += w * f.hessian(r)
        return H

    def to_dict(self):
        return {"type": self.kind, "terms": [{"weight": w, "field": f.to_dict()} for w, f in self.terms]}


def field_from_dict(spec: dict) -> ScalarField:
    """Build a field from its scenario-file mapping.  Raises ``ValueError`` on unknown types."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError("field: expected a mapping with a 'type' key")
    kind = spec["type"]
    if kind == "quadratic":
        return QuadraticField(source=tuple(float(v) for v in spec.get("source", (0.0, 0.0))))
    if kind == "linear":
        return LinearField(
            slope=tuple(float(v) for v in spec.get("slope", (1.0, 0.0))),
            offset=float(spec.get("offset", 0.0)),
        )
    if kind == "zero":
        return ZeroField()
    if kind == "nonconvex":
        kw = {}
        for key in ("a", "b", "s1", "s2"):
            if key in spec:
                kw[key] = tuple(float(v) for v in spec[key])
        if "offset" in spec:
            kw["offset"] = float(spec["offset"])
        if "rotation" in spec:
            kw["rotation"] = tuple(tuple(float(v) for v in row) for row in spec["rotation"])
        return NonconvexField(**kw)
    if kind == "composite":
        terms = tuple((float(t.get("weight", 1.0)), field_from_dict(t["field"])) for t in spec.get("terms", []))
        if not terms:
            raise ValueError("field.terms: composite field needs at least one term")
        return CompositeField(terms=terms)
    raise ValueError(f"field.type: unknown field type {kind!r}")
