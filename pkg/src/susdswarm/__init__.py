"""Gradient-free swarm source seeking and level-curve tracking with a PCA body frame."""

from .control import Gains
from .engine import ConfigurationError, NumericalFailure, SimConfig, TrajectoryLog, run, step
from .field import LinearField, NonconvexField, QuadraticField, ZeroField, field_from_dict
from .graph import VisibilityGraph, complete_graph, line_graph
from .perception import covariance, exact_principal_axes, oja_flow

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "Gains",
    "LinearField",
    "NonconvexField",
    "NumericalFailure",
    "QuadraticField",
    "SimConfig",
    "TrajectoryLog",
    "VisibilityGraph",
    "ZeroField",
    "complete_graph",
    "covariance",
    "exact_principal_axes",
    "field_from_dict",
    "line_graph",
    "oja_flow",
    "run",
    "step",
]
