"""Bound evaluation over a logged run.

nu_bar and e_bar are empirical maxima over the analysis window and are
reported as such; they are not certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from ..control import Gains
from ..field import spectral_norm
from ..perception import covariance, exact_principal_axes
from .bounds import epsilon_d, epsilon_star, mu1_bound, mu2_agent_bound, ultimate_bound_incomplete, ultimate_bound_strip
from .diagnostics import psi as psi_value
from .dynamics import DegenerateShape, local_geometry, mismatch_term, nonlinearity_sum


@dataclass
class BoundsReport:
    graph: str  # "complete" or "incomplete"
    values: dict = dc_field(default_factory=dict)
    notes: list = dc_field(default_factory=list)

    def lines(self) -> list:
        out = [f"graph: {self.graph}"]
        for k, v in self.values.items():
            if isinstance(v, float):
                out.append(f"{k}: {v:.6g}")
            else:
                out.append(f"{k}: {v}")
        out += [f"note: {n}" for n in self.notes]
        return out


def _window_start(n_rows, fraction):
    return min(n_rows - 1, int(math.floor(fraction * (n_rows - 1))))


def complete_traces(log, field, gains: Gains, eps1: float):
    """Per-step whole-swarm quantities on a complete graph."""
    T1 = log.n_steps + 1
    keys = ("mu1", "grad_norm", "gap", "lambda_q", "vartheta", "nu", "align", "z_c")
    normals = log.n
    tr = {k: np.full(T1, np.nan) for k in keys}
    for k in range(T1):
        P = log.positions[k]
        ax = exact_principal_axes(covariance(P), log.q[k, 0])
        rc = P.mean(axis=0)
        g = field.gradient(rc)
        gn = math.hypot(g[0], g[1])
        z_a = float(log.z[k].mean())
        zc = field.value(rc)
        D = P - rc
        nus = log.z[k] - zc - D @ g
        vt = float(nus @ (D @ ax.q))
        tr["grad_norm"][k] = gn
        tr["gap"][k] = ax.gap
        tr["lambda_q"][k] = ax.lambda_q
        tr["vartheta"][k] = vt
        tr["nu"][k] = z_a - zc
        tr["z_c"][k] = zc
        if ax.gap > 0:
            tr["mu1"][k] = mu1_bound(vt, eps1, ax.lambda_q, ax.lambda_n, z_a, gains.z_desired, gains.k1, gains.k2,
                                     spectral_norm(field.hessian(rc)))
        if gn > 0:
            tr["align"][k] = -float(normals[k, 0] @ g) / gn
    return tr


def incomplete_traces(log, field, gains: Gains, eps2: float):
    """Per-step, per-agent local quantities on an incomplete graph."""
    T1, M = log.z.shape
    keys = ("mu2", "grad_norm", "gap", "nu_c", "e_proj", "align", "z_c")
    normals = log.n
    tr = {k: np.full((T1, M), np.nan) for k in keys}
    for k in range(T1):
        P = log.positions[k]
        nsets = log.neighbor_sets[k]
        Z = log.z[k]
        for i in range(M):
            try:
                geo = local_geometry(i, P, nsets, log.q[k, i])
            except DegenerateShape:
                continue
            hood = list(geo.hood)
            g = field.gradient(geo.center)
            gn = math.hypot(g[0], g[1])
            zc = field.value(geo.center)
            z_a = float(Z[hood].mean())
            tr["grad_norm"][k, i] = gn
            tr["gap"][k, i] = geo.gap
            tr["nu_c"][k, i] = z_a - zc
            tr["z_c"][k, i] = zc
            vt = nonlinearity_sum(geo, field)
            e_i = mismatch_term(geo, Z, log.q[k], gains.k1)
            tr["mu2"][k, i] = mu2_agent_bound(vt + e_i, eps2, geo.lambda_q, geo.lambda_n, z_a,
                                              spectral_norm(field.hessian(geo.center)))
            if gn > 0:
                N = g / gn
                e_vec = (Z[hood[1:]][:, None] * (normals[k, hood[1:]] - normals[k, i])).sum(axis=0) / len(hood)
                tr["e_proj"][k, i] = float(N @ e_vec)
                tr["align"][k, i] = -float(normals[k, i] @ N)
    return tr


def _finite(a):
    a = np.asarray(a, dtype=float)
    return a[np.isfinite(a)]


def bounds_report(log, field, gains: Gains, epsilon: float, params=None, window=0.5) -> BoundsReport:
    """Evaluate the bound formulas along ``log``; ``params`` overrides any input by name."""
    params = dict(params or {})
    d = float(params.get("d", 0.5))
    eps1 = float(params.get("eps1", 0.5))
    eps2 = float(params.get("eps2", 0.5))
    k1 = float(params.get("k1", gains.k1))
    M = log.n_agents
    complete = all(len(nb) == M - 1 for step in log.neighbor_sets for nb in step)
    T1 = log.n_steps + 1
    w0 = _window_start(T1, window)
    rep = BoundsReport("complete" if complete else "incomplete")
    v = rep.values
    v["epsilon"] = float(epsilon)
    if complete:
        tr = complete_traces(log, field, gains, eps1)
        mu = tr["mu1"]
        region = np.isfinite(mu) & (tr["grad_norm"] > mu)
        v["mu1_initial"] = float(mu[0])
        v["mu1_min"] = float(np.nanmin(mu))
        v["mu1_max"] = float(np.nanmax(mu))
        v["steps_in_region"] = int(region.sum())
        if region.any():
            mu1 = float(params.get("mu1", np.max(mu[region])))
            mu2 = float(params.get("mu2", np.max(tr["grad_norm"][region])))
            chi1 = float(params.get("chi1", np.min(tr["gap"][region])))
            chi2 = float(params.get("chi2", np.max(tr["gap"][region])))
            v["mu1_worst"] = mu1
            v["grad_ceiling"] = mu2
            v["chi1"], v["chi2"] = chi1, chi2
            ed = epsilon_d(d, mu1, mu2, chi1, chi2, k1)
            v["epsilon_d"] = ed
            v["epsilon_respects_epsilon_d"] = bool(epsilon < ed)
        else:
            rep.notes.append("gradient never exceeds mu1; epsilon_d not evaluated")
        nu_bar = float(params.get("nu_bar", np.max(np.abs(_finite(tr["nu"][w0:])))))
        align = _finite(tr["align"][w0:])
        eps3 = float(params.get("eps3", align.min() if align.size else math.nan))
        v["nu_bar_empirical"] = nu_bar
        v["eps3_measured"] = eps3
        v["max_level_error"] = float(np.max(np.abs(tr["z_c"][w0:] - gains.z_desired)))
        if 0.0 < eps3 < 1.0:
            v["strip_bound"] = ultimate_bound_strip(k1, gains.k2, nu_bar, eps3)
            v["strip_formula"] = "nu_bar/eps3^2" if gains.k2 == 0 else "(k1 nu_bar + k2 sqrt(1-eps3^2))/(k1 eps3^2)"
            v["strip_holds"] = bool(v["max_level_error"] <= v["strip_bound"])
        else:
            rep.notes.append("n not aligned against the gradient over the window; strip bound not evaluated")
        return rep

    tr = incomplete_traces(log, field, gains, eps2)
    mu_t = np.nanmin(tr["mu2"], axis=1)
    region = np.all(tr["grad_norm"] > tr["mu2"], axis=1)
    v["mu2_initial"] = float(mu_t[0])
    v["mu2_min"] = float(np.nanmin(mu_t))
    v["mu2_max"] = float(np.nanmax(mu_t))
    v["steps_in_region"] = int(region.sum())
    if region.any():
        mu2 = float(params.get("mu2", np.max(mu_t[region])))
        mu2_up = float(params.get("mu2_upper", np.max(tr["grad_norm"][region])))
        chi1 = float(params.get("chi1", np.nanmin(tr["gap"][region])))
        chi2 = float(params.get("chi2", np.nanmax(tr["gap"][region])))
        psi0 = max(psi_value(exact_principal_axes(covariance(log.positions[0][[i, *sorted(nb)]]), log.q[0, i]).q,
                             log.q[0, i]) for i, nb in enumerate(log.neighbor_sets[0]))
        ell = float(params.get("ell", max(1.0, 1.01 / (1.0 - psi0))))
        v["mu2_worst"], v["grad_ceiling"], v["chi1"], v["chi2"], v["ell"] = mu2, mu2_up, chi1, chi2, ell
        es = epsilon_star(d, mu2, mu2_up, chi1, chi2, k1, ell)
        v["epsilon_star"] = es
        v["epsilon_respects_epsilon_star"] = bool(epsilon < es)
    else:
        rep.notes.append("some local gradient stays below mu2 at every step; epsilon_star not evaluated")
    if gains.k2 == 0.0 and gains.z_desired == 0.0:
        nu_bar = float(params.get("nu_bar", np.max(np.abs(_finite(tr["nu_c"][w0:])))))
        e_bar = float(params.get("e_bar", max(0.0, float(np.max(_finite(tr["e_proj"][w0:]))))))
        align = _finite(tr["align"][w0:])
        eps4 = float(params.get("eps4", align.min() if align.size else math.nan))
        v["nu_bar_empirical"], v["e_bar_empirical"], v["eps4_measured"] = nu_bar, e_bar, eps4
        v["max_zc_norm"] = float(np.max(np.linalg.norm(np.nan_to_num(tr["z_c"][w0:]), axis=1)))
        if 0.0 < eps4 < 1.0:
            v["incomplete_bound"] = ultimate_bound_incomplete(nu_bar, e_bar, eps4, M)
            v["incomplete_bound_holds"] = bool(v["max_zc_norm"] <= v["incomplete_bound"])
        else:
            rep.notes.append("some n_i not aligned against its local gradient; ultimate bound not evaluated")
    else:
        rep.notes.append("incomplete-graph ultimate bound covers source seeking only")
    return rep
