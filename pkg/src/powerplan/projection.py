"""Viable power sets as halfspace intersections and metric projection onto them.

A viable set is ``{p >= 0 : a_k'p <= beta_k for all k}`` with every normal
``a_k >= 0`` and ``beta_k >= 0``.  Nonnegative normals make the set closed
under lowering any user's power, and ``beta_k >= 0`` keeps the origin inside
so the set is never empty.

Projection uses Dykstra's cyclic scheme.  Plain alternating projection only
finds *some* point of the intersection; the per-set correction vectors are
what make the limit the nearest point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AlreadyFeasible, DimensionMismatch, InvalidBound, NoConvergence, RegionEmpty

DEFAULT_TOL = 1e-10
DEFAULT_MAX_CYCLES = 100000


@dataclass(frozen=True)
class Halfspace:
    """The set ``{p : a'p <= beta}``."""

    a: tuple
    beta: float

    def __post_init__(self):
        a = tuple(float(v) for v in np.asarray(self.a, dtype=float).ravel())
        beta = float(self.beta)
        if not a or not all(np.isfinite(a)) or not np.isfinite(beta):
            raise InvalidBound("halfspace normal and offset must be finite and nonempty")
        if all(v == 0 for v in a):
            raise InvalidBound("halfspace normal must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "beta", beta)

    @property
    def normal(self) -> np.ndarray:
        return np.array(self.a)

    @property
    def dim(self) -> int:
        return len(self.a)

    def contains(self, p, tol: float = 0.0) -> bool:
        return float(self.normal @ np.asarray(p, dtype=float)) <= self.beta + tol


@dataclass(frozen=True)
class ConstraintSet:
    """Downward-closed viable power set; nonnegativity is implicit."""

    dim: int
    halfspaces: tuple = field(default=())

    def __post_init__(self):
        hs = tuple(self.halfspaces)
        if self.dim < 1:
            raise InvalidBound("dimension must be at least 1")
        for h in hs:
            if not isinstance(h, Halfspace):
                raise TypeError(f"expected Halfspace, got {type(h).__name__}")
            if h.dim != self.dim:
                raise DimensionMismatch(f"halfspace of dimension {h.dim} in a {self.dim}-user set")
            if min(h.a) < 0:
                raise InvalidBound("normals must be nonnegative for the set to be downward closed")
            if h.beta < 0:
                raise InvalidBound("offsets must be nonnegative so that 0 is viable")
        object.__setattr__(self, "halfspaces", hs)

    def __and__(self, other: "ConstraintSet") -> "ConstraintSet":
        if other.dim != self.dim:
            raise DimensionMismatch(f"cannot intersect sets of dimension {self.dim} and {other.dim}")
        return ConstraintSet(self.dim, self.halfspaces + other.halfspaces)

    def __len__(self):
        return len(self.halfspaces)

    def contains(self, p, tol: float = 0.0) -> bool:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise DimensionMismatch(f"power vector has shape {p.shape}, expected ({self.dim},)")
        return bool(np.all(p >= -tol)) and all(h.contains(p, tol) for h in self.halfspaces)

    def box_caps(self) -> Optional[np.ndarray]:
        """Per-user caps from unit-normal halfspaces, or None if some user has none."""
        caps = np.full(self.dim, np.inf)
        for h in self.halfspaces:
            nz = np.flatnonzero(h.normal)
            if nz.size == 1:
                i = nz[0]
                caps[i] = min(caps[i], h.beta / h.a[i])
        if np.any(np.isinf(caps)):
            return None
        return caps


def box_constraints(pmax) -> ConstraintSet:
    """Individual caps ``0 <= p_i <= pmax_i``."""
    pmax = np.asarray(pmax, dtype=float).ravel()
    if pmax.size == 0 or not np.all(np.isfinite(pmax)) or np.any(pmax <= 0):
        raise InvalidBound("individual caps must be positive and finite")
    K = pmax.size
    return ConstraintSet(K, tuple(Halfspace(np.eye(K)[i], pmax[i]) for i in range(K)))


def total_budget(pmax_total: float, K: int) -> ConstraintSet:
    """Shared budget ``sum_i p_i <= pmax_total``."""
    pmax_total = float(pmax_total)
    if not np.isfinite(pmax_total) or pmax_total <= 0:
        raise InvalidBound("total budget must be positive and finite")
    return ConstraintSet(K, (Halfspace(np.ones(K), pmax_total),))


def project_halfspace(p, h: Halfspace) -> np.ndarray:
    """``p - (a'p - beta)^+ a / (a'a)``; returns ``p`` unchanged when inside."""
    p = np.asarray(p, dtype=float)
    if p.shape != (h.dim,):
        raise DimensionMismatch(f"vector has shape {p.shape}, halfspace dimension {h.dim}")
    a = h.normal
    excess = float(a @ p) - h.beta
    if excess <= 0:
        return p.copy()
    return p - (excess / float(a @ a)) * a


def _dykstra(p0: np.ndarray, cs: ConstraintSet, tol: float, max_cycles: int):
    n_sets = len(cs.halfspaces) + 1  # last slot is the orthant
    corrections = np.zeros((n_sets, p0.size))
    x = p0.copy()
    for cycle in range(1, max_cycles + 1):
        largest = 0.0
        for k in range(n_sets):
            z = x + corrections[k]
            if k < len(cs.halfspaces):
                x = project_halfspace(z, cs.halfspaces[k])
            else:
                x = np.maximum(z, 0.0)
            new = z - x
            largest = max(largest, float(np.linalg.norm(new - corrections[k])))
            corrections[k] = new
        if largest <= tol:
            return x, cycle
    raise NoConvergence(max_cycles, f"largest correction increment {largest:.3e}")


def project_onto(
    p0, cs: ConstraintSet, tol: float = DEFAULT_TOL, max_cycles: int = DEFAULT_MAX_CYCLES
) -> np.ndarray:
    """Euclidean nearest point of the viable set to ``p0``.

    Parameters
    ----------
    p0 : array_like
        Finite K-vector, possibly outside the set.
    cs : ConstraintSet
        The viable set (halfspaces plus the nonnegative orthant).
    tol : float
        Stop once every correction vector moves by at most ``tol`` in a cycle.
    max_cycles : int
        Cap on full sweeps over the sets.
    """
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (cs.dim,):
        raise DimensionMismatch(f"vector has shape {p0.shape}, expected ({cs.dim},)")
    if not np.all(np.isfinite(p0)):
        raise ValueError("starting point must be finite")
    x, _ = _dykstra(p0, cs, tol, max_cycles)
    return x


@dataclass(frozen=True, eq=False)
class BalancedAllocation:
    power: np.ndarray
    min_point: np.ndarray
    sir: np.ndarray
    shortfall: np.ndarray  # achieved SIR over target, < 1 where a user misses
    cycles: int


def balance_infeasible(
    sys,
    cs: ConstraintSet,
    tol: float = DEFAULT_TOL,
    max_cycles: int = DEFAULT_MAX_CYCLES,
    slack_tol: float = 1e-9,
) -> BalancedAllocation:
    """Project the minimal power point onto ``cs`` when it violates the caps.

    Raises :class:`RegionEmpty` if the SIR targets are jointly unreachable
    and :class:`AlreadyFeasible` if the minimal point already fits ``cs``.
    """
    from .region import min_power_point, normalized_sir

    report = min_power_point(sys)
    if report.status != "feasible":
        raise RegionEmpty(f"SIR targets unreachable (rho = {report.rho:.10g}, {report.status})")
    pi = report.min_point
    if cs.contains(pi, slack_tol):
        raise AlreadyFeasible("minimal power point already satisfies the power constraints")
    x, cycles = _dykstra(pi, cs, tol, max_cycles)
    achieved = normalized_sir(sys, x)
    return BalancedAllocation(x, pi, achieved, achieved / sys.gamma, cycles)
