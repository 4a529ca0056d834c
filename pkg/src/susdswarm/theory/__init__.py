"""Executable forms of the frame-rate identities, diagnostics and stability bounds."""

from .bounds import (
    BoundParams,
    epsilon_d,
    epsilon_star,
    mu1_bound,
    mu2_agent_bound,
    mu2_bound,
    ultimate_bound_incomplete,
    ultimate_bound_strip,
)
from .diagnostics import DiagnosticsRecord, compute_diagnostics, lyapunov_scalars, psi, theta
from .dynamics import (
    DegenerateShape,
    fd_frame_rate,
    local_geometry,
    predict_frame_rate_complete,
    predict_frame_rate_general,
    predict_frame_rate_incomplete_source,
    predict_frame_rate_susd,
    taylor_residual,
)
from .slowfast import boundary_flow_psi, slow_fast_residuals

__all__ = [
    "BoundParams",
    "DegenerateShape",
    "DiagnosticsRecord",
    "boundary_flow_psi",
    "compute_diagnostics",
    "epsilon_d",
    "epsilon_star",
    "fd_frame_rate",
    "local_geometry",
    "lyapunov_scalars",
    "mu1_bound",
    "mu2_agent_bound",
    "mu2_bound",
    "predict_frame_rate_complete",
    "predict_frame_rate_general",
    "predict_frame_rate_incomplete_source",
    "predict_frame_rate_susd",
    "psi",
    "slow_fast_residuals",
    "taylor_residual",
    "theta",
    "ultimate_bound_incomplete",
    "ultimate_bound_strip",
]
