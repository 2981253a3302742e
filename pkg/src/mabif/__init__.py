"""Radial solutions of the Monge-Ampere problem det(D^2 u) = lam^N f(-u) on the unit ball.

Profiles are written in terms of v = -u, so the convex branch is v > 0.
"""

from .nonlinearity import (
    AsymptoticClass,
    Limit,
    LimitKind,
    Nonlinearity,
    check_subhomogeneity,
    classify,
    from_callable,
    make_nonlinearity,
    parse_spec,
    reflect,
    truncate,
)
from .radial import (
    RadialProfile,
    apply_Tf,
    lambda_for_amplitude,
    lambda_of_amplitudes,
    picard,
    shoot,
    signed_root,
    solve_at_lambda,
)
from .eigen import EigenResult, lambda1, lambda1_shoot, mu1_inverse_iteration, mu1_scan
from .branch import Branch, BranchPoint, branch_endpoints, count_solutions, detect_fold, interior_extrema, trace_branch
from .stability import SLSpectrum, branch_stability_sweep, identity_residual, linearized_eigs
from .domain import ExistenceReport, bounds_from_radii, scale_lambda, unit_ball_windows

__version__ = "0.1.0"
