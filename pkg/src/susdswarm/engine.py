"""Simulation loop: perceive, move, re-measure.

Every agent computes from the same position snapshot and all positions are
updated together.  The frame stored with a state is the one perceived at that
state's positions, so a log row (r, z, q, n) is self-consistent in time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field, replace
from typing import Optional

import numpy as np

from .control import Gains, total_control
from .graph import VisibilityGraph, is_connected
from .perception import BodyFrame, _substeps, covariance, exact_principal_axes, oja_flow_xy

log = logging.getLogger(__name__)


class ConfigurationError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    def __init__(self, step, message="non-finite state"):
        super().__init__(f"{message} at step {step}")
        self.step = step


@dataclass
class AgentState:
    r: np.ndarray
    frame: BodyFrame
    z: float


@dataclass(frozen=True)
class SimConfig:
    gains: Gains = dc_field(default_factory=Gains)
    dt: float = 0.01
    epsilon: float = 0.01
    oja_substep: float = 0.01
    t_max: int = 1000
    termination: str = "horizon"  # or "source"
    z_bar: float = 0.0
    seed: int = 0
    initial_frame: str = "exact"  # or "given"
    initial_q: tuple = (1.0, 0.0)

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigurationError("config.epsilon: must lie in (0, 1)")
        if not self.dt > 0:
            raise ConfigurationError("config.dt: must be positive")
        if not self.oja_substep > 0:
            raise ConfigurationError("config.oja_substep: must be positive")
        if self.t_max < 0:
            raise ConfigurationError("config.t_max: must be non-negative")
        if self.termination not in ("horizon", "source"):
            raise ConfigurationError(f"config.termination: unknown rule {self.termination!r}")
        if self.initial_frame not in ("exact", "given"):
            raise ConfigurationError(f"config.initial_frame: unknown option {self.initial_frame!r}")

    @property
    def tau(self) -> float:
        """Perception time run per control step."""
        return self.dt / self.epsilon


@dataclass
class TrajectoryLog:
    """Per-step arrays; index 0 is the initial state."""

    dt: float
    positions: np.ndarray  # (T+1, M, 2)
    z: np.ndarray  # (T+1, M)
    q: np.ndarray  # (T+1, M, 2)
    neighbor_sets: list  # length T+1, each a list of frozensets
    connected: np.ndarray  # (T+1,) bool
    termination: str = "horizon"

    @property
    def n_steps(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def n_agents(self) -> int:
        return self.positions.shape[1]

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.positions.shape[0]) * self.dt

    @property
    def n(self) -> np.ndarray:
        return np.stack([-self.q[..., 1], self.q[..., 0]], axis=-1)

    def centers(self) -> np.ndarray:
        return self.positions.mean(axis=1)

    def states(self, k: int) -> list:
        return [
            AgentState(self.positions[k, i].copy(), BodyFrame.from_q(self.q[k, i]), float(self.z[k, i]))
            for i in range(self.n_agents)
        ]


def _perceive(P, Q_prev, nsets, cfg: SimConfig):
    """Oja flow per agent, warm-started, with sign continuity."""
    n_sub, h = _substeps(cfg.tau, min(cfg.oja_substep, cfg.tau))
    Q = np.empty_like(Q_prev)
    for i, nb in enumerate(nsets):
        C = covariance(P[[i, *sorted(nb)]])
        x0, y0 = float(Q_prev[i, 0]), float(Q_prev[i, 1])
        x, y = oja_flow_xy(C.c11, C.c12, C.c22, x0, y0, n_sub, h)
        if x * x0 + y * y0 < 0.0:
            x, y = -x, -y
        Q[i] = x, y
    return Q


def _check_neighbors(nsets, step):
    for i, nb in enumerate(nsets):
        if not nb:
            raise ConfigurationError(f"agent {i} has no neighbors at step {step}")


def initial_frames(P, graph: VisibilityGraph, cfg: SimConfig) -> np.ndarray:
    nsets = graph.neighbor_sets(P)
    _check_neighbors(nsets, 0)
    ref = np.asarray(cfg.initial_q, dtype=float)
    ref = ref / np.linalg.norm(ref)
    if cfg.initial_frame == "exact":
        return np.array([exact_principal_axes(covariance(P[[i, *sorted(nb)]]), ref).q for i, nb in enumerate(nsets)])
    Q0 = np.tile(ref, (P.shape[0], 1))
    return _perceive(P, Q0, nsets, cfg)


def _advance(P, Q, Z, nsets, graph, field, cfg: SimConfig, step_index=0):
    gains = cfg.gains
    M = P.shape[0]
    U = np.empty_like(P)
    for i in range(M):
        U[i] = total_control(i, Z[i], P, nsets[i], BodyFrame.from_q(Q[i]), gains)
    P_new = P + cfg.dt * U
    if not np.all(np.isfinite(P_new)):
        raise NumericalFailure(step_index + 1)
    nsets_new = graph.neighbor_sets(P_new)
    _check_neighbors(nsets_new, step_index + 1)
    try:
        Q_new = _perceive(P_new, Q, nsets_new, cfg)
    except FloatingPointError as exc:
        raise NumericalFailure(step_index + 1, str(exc)) from None
    Z_new = np.array([field.value(p) for p in P_new])
    if not (np.all(np.isfinite(Q_new)) and np.all(np.isfinite(Z_new))):
        raise NumericalFailure(step_index + 1)
    return P_new, Q_new, Z_new, nsets_new


def step(states, graph: VisibilityGraph, field, cfg: SimConfig) -> list:
    """Advance a list of :class:`AgentState` by one control step."""
    if len(states) < 2:
        raise ConfigurationError("need at least two agents")
    P = np.array([s.r for s in states], dtype=float)
    Q = np.array([s.frame.q for s in states], dtype=float)
    Z = np.array([s.z for s in states], dtype=float)
    nsets = graph.neighbor_sets(P)
    _check_neighbors(nsets, 0)
    P, Q, Z, _ = _advance(P, Q, Z, nsets, graph, field, cfg)
    return [AgentState(P[i], BodyFrame.from_q(Q[i]), float(Z[i])) for i in range(len(states))]


def _terminated(Z, cfg: SimConfig) -> bool:
    return cfg.termination == "source" and bool(np.all(Z < cfg.z_bar))


def run(positions, graph: VisibilityGraph, field, cfg: SimConfig) -> TrajectoryLog:
    """Iterate :func:`step` until the termination rule fires or ``t_max`` steps pass."""
    P = np.array(positions, dtype=float)
    M = P.shape[0]
    if M < 2:
        raise ConfigurationError("need at least two agents")
    if graph.n_agents != M:
        raise ConfigurationError(f"graph has {graph.n_agents} agents, positions give {M}")
    Q = initial_frames(P, graph, cfg)
    Z = np.array([field.value(p) for p in P])
    nsets = graph.neighbor_sets(P)

    T = cfg.t_max
    pos = np.empty((T + 1, M, 2))
    zs = np.empty((T + 1, M))
    qs = np.empty((T + 1, M, 2))
    conn = np.empty(T + 1, dtype=bool)
    all_nsets = []

    def record(k):
        pos[k], zs[k], qs[k] = P, Z, Q
        conn[k] = is_connected(graph, P)
        all_nsets.append(nsets)

    record(0)
    reason = "horizon"
    k = 0
    if _terminated(Z, cfg):
        reason = "source"
    else:
        while k < T:
            P, Q, Z, nsets = _advance(P, Q, Z, nsets, graph, field, cfg, step_index=k)
            k += 1
            record(k)
            if _terminated(Z, cfg):
                reason = "source"
                break
    if graph.is_dynamic and not conn[: k + 1].all():
        log.info("symmetrised k-nearest graph disconnected at %d steps", int((~conn[: k + 1]).sum()))
    return TrajectoryLog(
        dt=cfg.dt,
        positions=pos[: k + 1].copy(),
        z=zs[: k + 1].copy(),
        q=qs[: k + 1].copy(),
        neighbor_sets=all_nsets,
        connected=conn[: k + 1].copy(),
        termination=reason,
    )


def box_positions(n_agents: int, center, half_width, seed: int) -> np.ndarray:
    """Uniform random positions in an axis-aligned box."""
    rng = np.random.default_rng(seed)
    c = np.asarray(center, dtype=float)
    w = np.broadcast_to(np.asarray(half_width, dtype=float), (2,))
    return c + rng.uniform(-1.0, 1.0, size=(n_agents, 2)) * w


def with_seed(cfg: SimConfig, seed: Optional[int]) -> SimConfig:
    return cfg if seed is None else replace(cfg, seed=seed)
