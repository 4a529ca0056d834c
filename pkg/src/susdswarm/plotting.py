"""PNG figures for a finished run.  Uses the non-interactive Agg backend."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _field_grid(field, lo, hi, n=120):
    xs = np.linspace(lo[0], hi[0], n)
    ys = np.linspace(lo[1], hi[1], n)
    Z = np.array([[field.value((x, y)) for x in xs] for y in ys])
    return xs, ys, Z


def plot_trajectory(path, log, field, z_desired=None, arrow_every=None):
    """Agent paths over field contours, with body-frame n arrows at a few instants."""
    P = log.positions
    lo = P.reshape(-1, 2).min(axis=0)
    hi = P.reshape(-1, 2).max(axis=0)
    pad = 0.15 * max(hi - lo) + 0.5
    lo, hi = lo - pad, hi + pad
    xs, ys, Z = _field_grid(field, lo, hi)
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    ax.contour(xs, ys, Z, levels=20, colors="0.75", linewidths=0.6)
    if z_desired is not None:
        ax.contour(xs, ys, Z, levels=[z_desired], colors="tab:red", linewidths=1.2)
    for i in range(log.n_agents):
        ax.plot(P[:, i, 0], P[:, i, 1], lw=0.8)
    c = log.centers()
    ax.plot(c[:, 0], c[:, 1], "k--", lw=0.8, label="center")
    step = arrow_every or max(1, log.n_steps // 6)
    n = log.n
    scale = 0.05 * max(hi - lo)
    for k in range(0, log.n_steps + 1, step):
        ax.quiver(P[k, :, 0], P[k, :, 1], n[k, :, 0], n[k, :, 1], color="tab:blue", angles="xy",
                  scale_units="xy", scale=1.0 / scale, width=0.004)
    ax.plot(P[0, :, 0], P[0, :, 1], "o", ms=3, color="tab:green", label="start")
    ax.plot(P[-1, :, 0], P[-1, :, 1], "s", ms=3, color="tab:red", label="end")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_diagnostics(path, t, diag):
    """theta, psi and the local center reading against time, one line per agent."""
    fig, axes = plt.subplots(3, 1, figsize=(6.0, 6.5), sharex=True)
    axes[0].plot(t, diag.theta, lw=0.8)
    axes[0].set_ylabel(r"$\theta_i$")
    with np.errstate(divide="ignore"):
        axes[1].semilogy(t, np.maximum(diag.psi, 1e-300), lw=0.8)
    axes[1].set_ylabel(r"$\psi_i$")
    axes[2].plot(t, diag.z_c_d, lw=0.8)
    axes[2].set_ylabel(r"$z_{c,i} - z^d$")
    axes[2].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
