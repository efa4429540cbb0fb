"""Objectives, utilities and the Nash bargaining view of power allocation.

Each user's utility for a power vector under individual caps is
``f_i(p) = exp(pmax_i) - exp(p_i)``, and the disagreement outcome is
``u0 = -exp(pmax)``.  Every ``f_i`` decreases in ``p_i``, so the Nash product
is maximized at the componentwise-minimal point of the SIR region whenever
that point respects the caps.  ``nbs_solve`` therefore returns the minimal
power point and attaches a sampled certificate instead of running a
maximizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import Infeasible, OutOfBox, RegionEmpty, ValidationError
from .region import DEFAULT_SLACK, NormalizedSystem, is_member, min_power_point

PMAX_CEILING = 50.0  # exp(50) ~ 5e21, far from overflow even as a K-fold product


def _check_pmax(pmax) -> np.ndarray:
    pmax = np.asarray(pmax, dtype=float).ravel()
    if pmax.size == 0 or not np.all(np.isfinite(pmax)) or np.any(pmax <= 0):
        raise ValidationError("pmax", "must be positive and finite")
    if np.any(pmax > PMAX_CEILING):
        raise ValidationError("pmax", f"caps above {PMAX_CEILING:g} overflow the exponential utilities")
    return pmax


def _check_in_box(p, pmax, tol=0.0) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    pmax = _check_pmax(pmax)
    if p.shape != pmax.shape:
        raise ValueError(f"power vector shape {p.shape} does not match caps {pmax.shape}")
    if np.any(p < -tol) or np.any(p > pmax + tol):
        raise OutOfBox("power vector leaves the box 0 <= p <= pmax")
    return p, pmax


@dataclass(frozen=True, eq=False)
class Objective:
    """A componentwise monotone cost ``h(p)`` to minimize over the power region."""

    kind: str  # lq | sum | nash_game
    q: Optional[float] = None
    pmax: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "lq":
            if self.q is None or not self.q >= 1:
                raise ValidationError("q", "l_q objectives need q >= 1")
            object.__setattr__(self, "q", float(self.q))
        elif self.kind == "nash_game":
            object.__setattr__(self, "pmax", _check_pmax(self.pmax))
        elif self.kind != "sum":
            raise ValidationError("objective", f"unknown kind {self.kind!r}")

    @classmethod
    def lq(cls, q: float) -> "Objective":
        return cls("lq", q=q)

    @classmethod
    def total(cls) -> "Objective":
        return cls("sum")

    @classmethod
    def nash_game(cls, pmax) -> "Objective":
        return cls("nash_game", pmax=pmax)

    def __str__(self):
        if self.kind == "lq":
            return f"lq:{self.q:g}"
        return self.kind


def evaluate_objective(obj: Objective, p) -> float:
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("power vector must be nonnegative")
    if obj.kind == "sum":
        return float(p.sum())
    if obj.kind == "lq":
        return float(np.sum(p**obj.q) ** (1.0 / obj.q))
    p, pmax = _check_in_box(p, obj.pmax)
    return -float(np.prod(np.exp(pmax) - np.exp(p)))


def utility(p, pmax) -> np.ndarray:
    """``exp(pmax_i) - exp(p_i)`` per user; zero at full power."""
    p, pmax = _check_in_box(p, pmax)
    return np.exp(pmax) - np.exp(p)


def disagreement_point(pmax) -> np.ndarray:
    return -np.exp(_check_pmax(pmax))


def nash_product(p, pmax, u0=None) -> float:
    """Product of utility gains over the disagreement point.

    Coordinates where the gain is exactly zero are left out of the product,
    as in the usual definition of the bargaining solution.  With the default
    ``u0 = -exp(pmax)`` no coordinate is ever dropped.
    """
    f = utility(p, pmax)
    u0 = disagreement_point(pmax) if u0 is None else np.asarray(u0, dtype=float)
    gains = f - u0
    active = gains != 0
    return float(np.prod(gains[active]))


@dataclass(frozen=True, eq=False)
class BargainProblem:
    sys: NormalizedSystem
    pmax: np.ndarray
    u0: Optional[np.ndarray] = None

    def __post_init__(self):
        pmax = _check_pmax(self.pmax)
        if pmax.shape != (self.sys.K,):
            raise ValidationError("pmax", f"expected {self.sys.K} caps, got {pmax.size}")
        u0 = -np.exp(pmax) if self.u0 is None else np.asarray(self.u0, dtype=float)
        if u0.shape != pmax.shape or np.any(u0 >= 0):
            raise ValidationError("u0", "disagreement utilities must be negative")
        object.__setattr__(self, "pmax", pmax)
        object.__setattr__(self, "u0", u0)


@dataclass(frozen=True, eq=False)
class NBSCertificate:
    in_region: bool
    in_box: bool
    samples: int
    best_sampled_product: float
    dominates_samples: bool


@dataclass(frozen=True, eq=False)
class NBSResult:
    power: np.ndarray
    nash_product: float
    rho: float
    certificate: NBSCertificate


def _sample_feasible(sys, pi, pmax, n, rng, slack_tol):
    """Feasible points inside the box, built as ``pi + t [I - diag(gamma)B]^{-1} w``."""
    M = np.eye(sys.K) - sys.gain_matrix
    points = []
    for _ in range(n):
        w = rng.exponential(size=sys.K)
        d = np.linalg.solve(M, w)
        room = np.where(d > 0, (pmax - pi) / np.where(d > 0, d, 1.0), np.inf)
        t_max = room.min()
        if not np.isfinite(t_max) or t_max <= 0:
            continue
        q = np.minimum(pi + rng.uniform(0.0, 1.0) * t_max * d, pmax)
        if is_member(sys, q, slack_tol):
            points.append(q)
    return points


def nbs_solve(
    prob: BargainProblem,
    samples: int = 64,
    seed: int = 0,
    slack_tol: float = DEFAULT_SLACK,
) -> NBSResult:
    """Nash bargaining solution of the capped power control game.

    Raises :class:`RegionEmpty` when the SIR targets are unreachable and
    :class:`Infeasible` when the minimal power point exceeds a cap.
    """
    report = min_power_point(prob.sys)
    if not report.feasible:
        raise RegionEmpty(f"SIR targets unreachable (rho = {report.rho:.10g}, {report.status})")
    pi = report.min_point
    if np.any(pi > prob.pmax + slack_tol):
        raise Infeasible("minimal power point exceeds the individual caps", min_point=pi)
    pi_box = np.minimum(pi, prob.pmax)
    value = nash_product(pi_box, prob.pmax, prob.u0)

    rng = np.random.default_rng(seed)
    pts = _sample_feasible(prob.sys, pi_box, prob.pmax, samples, rng, slack_tol)
    products = [nash_product(q, prob.pmax, prob.u0) for q in pts]
    best = max(products) if products else -np.inf
    cert = NBSCertificate(
        in_region=is_member(prob.sys, pi, slack_tol),
        in_box=True,
        samples=len(pts),
        best_sampled_product=float(best),
        dominates_samples=all(value >= v for v in products),
    )
    return NBSResult(pi, value, report.rho, cert)
