"""The SIR power region and its componentwise-minimal point.

Dividing user ``i``'s SIR constraint by ``A_ii`` turns the region into the
linear system ``[I - diag(gamma) B] p >= diag(gamma) tau`` with
``b_ij = A_ij / A_ii`` off the diagonal and ``tau_i = C_ii sigma2 / A_ii``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotMember, SingularSystem, ValidationError
from .spectral import DEFAULT_MAX_ITER, DEFAULT_TOL, classify_radius, spectral_radius

if TYPE_CHECKING:
    from .link_model import LinkModel

DEFAULT_SLACK = 1e-9
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class NormalizedSystem:
    B: np.ndarray
    tau: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        B = np.array(self.B, dtype=float)
        tau = np.array(self.tau, dtype=float).ravel()
        gamma = np.array(self.gamma, dtype=float).ravel()
        K = tau.size
        if B.shape != (K, K) or gamma.shape != (K,):
            raise DimensionMismatch(f"B {B.shape}, tau ({K},), gamma {gamma.shape} disagree")
        for name, arr in (("B", B), ("tau", tau), ("gamma", gamma)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(name, "contains NaN or Inf")
        if np.any(B < 0) or np.any(np.diag(B) != 0):
            raise ValidationError("B", "must be nonnegative with zero diagonal")
        if np.any(tau <= 0):
            raise ValidationError("tau", "must be positive")
        if np.any(gamma <= 0):
            raise ValidationError("gamma", "must be positive")
        for arr in (B, tau, gamma):
            arr.setflags(write=False)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "gamma", gamma)

    @property
    def K(self) -> int:
        return self.tau.size

    @property
    def gain_matrix(self) -> np.ndarray:
        """``diag(gamma) B``, whose spectral radius gates feasibility."""
        return self.gamma[:, None] * self.B

    @property
    def target(self) -> np.ndarray:
        """``diag(gamma) tau``."""
        return self.gamma * self.tau

    def with_gamma(self, gamma) -> "NormalizedSystem":
        return NormalizedSystem(self.B, self.tau, gamma)


def normalize(model: "LinkModel", sigma2: float, gamma) -> NormalizedSystem:
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (model.K,):
        raise DimensionMismatch(f"gamma has shape {gamma.shape}, expected ({model.K},)")
    if np.any(gamma <= 0):
        raise ValidationError("gamma", "must be positive")
    diag = np.diag(model.A)
    B = model.A / diag[:, None]
    np.fill_diagonal(B, 0.0)
    tau = model.Cdiag * sigma2 / diag
    return NormalizedSystem(B, tau, gamma)


def normalized_sir(sys: NormalizedSystem, p) -> np.ndarray:
    """SIR from the normalized system: ``p_i / (sum_j b_ij p_j + tau_i)``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (sys.K,):
        raise DimensionMismatch(f"power vector has shape {p.shape}, expected ({sys.K},)")
    return p / (sys.B @ p + sys.tau)


def is_member(sys: NormalizedSystem, p, slack_tol: float = DEFAULT_SLACK) -> bool:
    """Membership in the closed power region, up to an absolute slack in watts."""
    p = np.asarray(p, dtype=float)
    if p.shape != (sys.K,):
        raise DimensionMismatch(f"power vector has shape {p.shape}, expected ({sys.K},)")
    if np.any(p < 0):
        return False
    lhs = p - sys.gain_matrix @ p
    return bool(np.all(lhs >= sys.target - slack_tol))


@dataclass(frozen=True, eq=False)
class NonnegSolution:
    """Outcome of ``[I - A] x = c`` for nonnegative ``A``.

    ``status`` is ``contraction`` when ``rho(A) < 1`` and ``x`` is the unique
    (nonnegative) solution; otherwise ``no_contraction`` and ``x`` is None.
    """

    status: str
    rho: float
    x: Optional[np.ndarray] = None

    @property
    def contraction(self) -> bool:
        return self.status == "contraction"


def _solve_contraction(A: np.ndarray, c: np.ndarray) -> np.ndarray:
    M = np.eye(A.shape[0]) - A
    try:
        lu = scipy.linalg.lu_factor(M, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from None
    x = scipy.linalg.lu_solve(lu, c)
    # one step of iterative refinement
    x = x + scipy.linalg.lu_solve(lu, c - M @ x)
    scale = np.abs(c).max()
    residual = np.abs(M @ x - c).max()
    # near rho = 1 the solution is huge and rounding alone exceeds the relative bound
    floor = 8 * c.size * np.finfo(float).eps * np.abs(M).sum(axis=1).max() * np.abs(x).max()
    if not np.all(np.isfinite(x)) or residual > max(RESIDUAL_TOL * scale, floor):
        raise SingularSystem(f"residual {residual:.3e} exceeds bound for ||c|| = {scale:.3e}")
    if np.any(x[c > 0] <= 0):
        raise SingularSystem("solution lost positivity on a positive right-hand side")
    if np.any(x < -RESIDUAL_TOL * max(scale, 1.0)):
        raise SingularSystem("solution lost nonnegativity")
    return np.maximum(x, 0.0)


def solve_nonneg_system(
    A, c, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> NonnegSolution:
    """Solve ``[I - A] x = c`` for nonnegative ``A`` and ``c >= 0``.

    The spectral radius is checked first.  Only a contraction
    (``rho(A) < 1 - tol``) yields a solution; it is then unique and
    nonnegative, and positive wherever ``c`` is.
    """
    A = np.asarray(A, dtype=float)
    c = np.asarray(c, dtype=float).ravel()
    if A.ndim != 2 or A.shape != (c.size, c.size):
        raise DimensionMismatch(f"A has shape {A.shape}, c has length {c.size}")
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise ValueError("right-hand side must be finite and nonnegative")
    rho = spectral_radius(A, tol, max_iter)
    if rho >= 1.0 - tol:
        return NonnegSolution("no_contraction", rho)
    return NonnegSolution("contraction", rho, _solve_contraction(A, c))


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    status: str  # feasible | infeasible | boundary
    rho: float
    min_point: Optional[np.ndarray] = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def min_power_point(
    sys: NormalizedSystem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> FeasibilityReport:
    """Classify the targets and, when reachable, return the minimal power point.

    The minimal point solves ``[I - diag(gamma) B] p = diag(gamma) tau``;
    every user meets its target with equality there and every other member
    of the region dominates it componentwise.
    """
    A = sys.gain_matrix
    rho = spectral_radius(A, tol, max_iter)
    status = classify_radius(rho, tol)
    if status != "feasible":
        return FeasibilityReport(status, rho)
    return FeasibilityReport(status, rho, _solve_contraction(A, sys.target))


def check_convexity_sample(
    sys: NormalizedSystem, p1, p2, alpha: float, slack_tol: float = DEFAULT_SLACK
) -> tuple[bool, bool]:
    """Membership of the convex and the geometric-mean combination of two members."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    for name, p in (("p1", p1), ("p2", p2)):
        if not is_member(sys, p, slack_tol):
            raise NotMember(f"{name} is not in the power region")
    linear = alpha * p1 + (1 - alpha) * p2
    log_mix = p1**alpha * p2 ** (1 - alpha)
    return is_member(sys, linear, slack_tol), is_member(sys, log_mix, slack_tol)
