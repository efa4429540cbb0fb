"""Minimum-power and balanced power control for multiuser CDMA uplinks."""

from .bargain import (
    BargainProblem,
    Objective,
    evaluate_objective,
    nash_product,
    nbs_solve,
    utility,
)
from .link_model import LinkModel, Scenario, build_link_model, sir
from .projection import (
    ConstraintSet,
    Halfspace,
    balance_infeasible,
    box_constraints,
    project_halfspace,
    project_onto,
    total_budget,
)
from .region import (
    NormalizedSystem,
    check_convexity_sample,
    is_member,
    min_power_point,
    normalize,
    solve_nonneg_system,
)
from .spectral import is_contractive, spectral_radius

__version__ = "0.1.0"
