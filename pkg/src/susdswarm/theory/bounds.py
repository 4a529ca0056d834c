"""Stability and ultimate-boundedness constants, transcribed as plain arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional


def _unit_interval(name, x):
    if not 0.0 < x < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {x}")


@dataclass(frozen=True)
class BoundParams:
    """Assumption constants for the bound formulas.

    mu1/mu2 are gradient-norm floors (complete / incomplete graph), mu2_upper
    the gradient ceiling over the same region; chi1 <= gap <= chi2.  nu_bar and
    e_bar are supplied by the caller (empirical maxima when taken from a log).
    """

    mu1: Optional[float] = None
    mu2: Optional[float] = None
    mu3: Optional[float] = None
    mu4: Optional[float] = None
    mu2_upper: Optional[float] = None
    chi1: Optional[float] = None
    chi2: Optional[float] = None
    d: float = 0.5
    eps1: float = 0.5
    eps2: float = 0.5
    eps3: Optional[float] = None
    eps4: Optional[float] = None
    ell: float = 1.0
    nu_bar: Optional[float] = None
    e_bar: Optional[float] = None

    def __post_init__(self):
        _unit_interval("d", self.d)
        _unit_interval("eps1", self.eps1)
        _unit_interval("eps2", self.eps2)
        for name in ("eps3", "eps4"):
            v = getattr(self, name)
            if v is not None:
                _unit_interval(name, v)
        if self.ell < 1.0:
            raise ValueError("ell must be at least 1")
        if self.chi1 is not None and self.chi2 is not None and not 0.0 < self.chi1 <= self.chi2:
            raise ValueError("need 0 < chi1 <= chi2")


def _root(b, c, denom):
    # positive root of a x^2 - b x - c' = 0 with c = 4 a c' and denom = 2a
    return (b + math.sqrt(b * b + c)) / denom


def mu1_bound(vartheta, eps1, lambda_q, lambda_n, z_a, z_desired, k1, k2, hessian_norm) -> float:
    """Gradient floor above which the nonlinearity disturbance stays admissible (complete graph)."""
    if not 0.0 < eps1 <= 1.0:
        raise ValueError("eps1 must lie in (0, 1]")
    if not lambda_q > 0.0 or lambda_n > lambda_q:
        raise ValueError("need lambda_q > 0 and lambda_n <= lambda_q")
    gap = lambda_q - lambda_n
    b = abs(vartheta)
    c = 4.0 * eps1 * lambda_q * gap * (abs(z_a - z_desired) + k2 / k1) * hessian_norm
    return _root(b, c, 2.0 * eps1 * lambda_q)


def mu2_agent_bound(vartheta_plus_mismatch, eps2, lambda_q, lambda_n, z_a, hessian_norm) -> float:
    """Per-agent gradient floor for source seeking on an incomplete graph."""
    if not 0.0 < eps2 <= 1.0:
        raise ValueError("eps2 must lie in (0, 1]")
    if not lambda_q > 0.0 or lambda_n > lambda_q:
        raise ValueError("need lambda_q > 0 and lambda_n <= lambda_q")
    b = abs(vartheta_plus_mismatch)
    c = 4.0 * eps2 * z_a * lambda_q * (lambda_q - lambda_n) * hessian_norm
    return _root(b, c, 2.0 * eps2 * lambda_q)


def mu2_bound(agents) -> float:
    """Minimum of :func:`mu2_agent_bound` over per-agent keyword mappings."""
    vals = [mu2_agent_bound(**a) for a in agents]
    if not vals:
        raise ValueError("mu2_bound needs at least one agent")
    return min(vals)


def epsilon_d(d, mu1, mu2, chi1, chi2, k1) -> float:
    """Largest time-scale ratio for the complete-graph coupled system."""
    _unit_interval("d", d)
    return 2.0 * (1.0 - d) * mu1 * chi1**3 / (d * k1 * mu2**2 * chi2**2)


def epsilon_star(d, mu2, mu2_upper, chi1, chi2, k1, ell=1.0) -> float:
    """Largest time-scale ratio for the incomplete-graph coupled system."""
    _unit_interval("d", d)
    if ell < 1.0:
        raise ValueError("ell must be at least 1")
    return 2.0 * (1.0 - d) * mu2 * chi1**3 / (d * k1 * mu2_upper**2 * ell**3 * chi2**2)


def ultimate_bound_strip(k1, k2, nu_bar, eps3) -> float:
    """Half-width of the band around the target level that z_c - z_desired ends up in."""
    _unit_interval("eps3", eps3)
    if k2 == 0:
        return nu_bar / eps3**2
    return (k1 * nu_bar + k2 * math.sqrt(1.0 - eps3**2)) / (k1 * eps3**2)


def ultimate_bound_incomplete(nu_bar, e_bar, eps4, n_agents) -> float:
    """Radius in z_c-vector norm for source seeking on an incomplete graph."""
    _unit_interval("eps4", eps4)
    return (nu_bar + e_bar) * math.sqrt(n_agents) / eps4
