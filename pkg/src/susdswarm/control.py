"""Speed-modulated control law and the optional spacing terms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class Gains:
    """Controller gains.

    k1 scales the speed along n by the measurement offset, k2 is a constant
    speed along q (level-curve traversal), kf and kf_n weight the spacing
    terms along q and n.  ``kf_n=None`` means "same as kf".
    """

    k1: float = 1.0
    k2: float = 0.0
    kf: float = 0.0
    z_desired: float = 0.0
    spacing: float = 1.0
    kf_n: Optional[float] = None
    formation_n: bool = False
    max_speed: Optional[float] = None

    def __post_init__(self):
        if not self.k1 > 0:
            raise ValueError("gains.k1: must be positive")
        if self.k2 < 0 or self.kf < 0 or (self.kf_n is not None and self.kf_n < 0):
            raise ValueError("gains: k2, kf and kf_n must be non-negative")
        if self.max_speed is not None and self.max_speed <= 0:
            raise ValueError("gains.max_speed: must be positive when set")

    @property
    def normal_formation_gain(self) -> float:
        if not self.formation_n:
            return 0.0
        return self.kf if self.kf_n is None else self.kf_n

    @property
    def has_formation(self) -> bool:
        return self.kf > 0 or self.normal_formation_gain > 0


def susd_control(z_i: float, gains: Gains, frame) -> np.ndarray:
    """k1 (z_i - z_d) n + k2 q."""
    return gains.k1 * (z_i - gains.z_desired) * np.asarray(frame.n, dtype=float) + gains.k2 * np.asarray(
        frame.q, dtype=float
    )


def _spacing_term(i, positions, neighbor_set, axis, gain, spacing):
    if gain == 0.0 or not neighbor_set:
        return np.zeros(2)
    P = np.asarray(positions, dtype=float)
    axis = np.asarray(axis, dtype=float)
    total = 0.0
    for j in neighbor_set:
        s = float((P[j] - P[i]) @ axis)
        # attract beyond the spacing, repel inside it
        total += (abs(s) - spacing) * s
    return gain * total * axis


def formation_term(i, positions, neighbor_set, frame_i, gains: Gains) -> np.ndarray:
    """kf sum_j (|<r_j - r_i, q_i>| - d) <r_j - r_i, q_i> q_i."""
    return _spacing_term(i, positions, neighbor_set, frame_i.q, gains.kf, gains.spacing)


def formation_term_n(i, positions, neighbor_set, frame_i, gains: Gains) -> np.ndarray:
    """Same spacing rule measured along n_i."""
    return _spacing_term(i, positions, neighbor_set, frame_i.n, gains.normal_formation_gain, gains.spacing)


def total_control(i, z_i, positions, neighbor_set, frame_i, gains: Gains) -> np.ndarray:
    u = susd_control(z_i, gains, frame_i)
    if gains.kf > 0:
        u = u + formation_term(i, positions, neighbor_set, frame_i, gains)
    if gains.normal_formation_gain > 0:
        u = u + formation_term_n(i, positions, neighbor_set, frame_i, gains)
    if gains.max_speed is not None:
        speed = math.hypot(u[0], u[1])
        if speed > gains.max_speed:
            u = u * (gains.max_speed / speed)
    return u
