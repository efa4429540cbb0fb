"""Interference coefficients and per-user SIR for a synchronous CDMA uplink.

User ``i`` decodes with a fixed linear receiver ``c_i`` against signatures
``s_j`` and path gains ``G_ij``.  Everything the solvers need is summarized
in ``A_ij = G_ij (c_i's_j)^2`` and ``C_ii = (c_i'c_i)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateUser, DimensionMismatch, ValidationError
from .projection import ConstraintSet


def _as_array(value, field: str, ndim: int) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(field, f"not numeric ({exc})") from None
    if arr.ndim != ndim:
        raise ValidationError(field, f"expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(field, "contains NaN or Inf")
    arr.setflags(write=False)
    return arr


def _same(a, b) -> bool:
    if a is None or b is None:
        return a is b
    return a.shape == b.shape and bool(np.array_equal(a, b))


@dataclass(frozen=True, eq=False)
class Scenario:
    """Physical or derived-model description of a power control instance.

    Either the physical fields ``G``, ``S`` and ``C_rx`` are given (one
    signature / receiver vector per row), or the derived coefficients ``A``
    and ``Cdiag`` directly.  ``variant`` reports which.
    """

    gamma: np.ndarray
    sigma2: float
    G: Optional[np.ndarray] = None
    S: Optional[np.ndarray] = None
    C_rx: Optional[np.ndarray] = None
    A: Optional[np.ndarray] = None
    Cdiag: Optional[np.ndarray] = None
    constraints: Optional[ConstraintSet] = None
    objective: Optional[str] = None

    def __post_init__(self):
        gamma = _as_array(self.gamma, "gamma", 1)
        if gamma.size == 0:
            raise ValidationError("gamma", "at least one user required")
        if np.any(gamma <= 0):
            raise ValidationError("gamma", "must be positive")
        object.__setattr__(self, "gamma", gamma)
        K = gamma.size

        try:
            sigma2 = float(self.sigma2)
        except (TypeError, ValueError):
            raise ValidationError("sigma2", "not numeric") from None
        if not np.isfinite(sigma2) or sigma2 <= 0:
            raise ValidationError("sigma2", "must be positive and finite")
        object.__setattr__(self, "sigma2", sigma2)

        physical = [self.G is not None, self.S is not None, self.C_rx is not None]
        derived = [self.A is not None, self.Cdiag is not None]
        if all(physical) and not any(derived):
            G = _as_array(self.G, "G", 2)
            S = _as_array(self.S, "S", 2)
            C_rx = _as_array(self.C_rx, "C_rx", 2)
            if G.shape != (K, K):
                raise ValidationError("G", f"expected shape {(K, K)}, got {G.shape}")
            if S.shape[0] != K or S.shape[1] < 1:
                raise ValidationError("S", f"expected {K} signatures of length N >= 1")
            if C_rx.shape != S.shape:
                raise ValidationError("C_rx", f"expected shape {S.shape}, got {C_rx.shape}")
            if np.any(G < 0):
                raise ValidationError("G", "gains must be nonnegative")
            if np.any(np.diag(G) <= 0):
                raise ValidationError("G", "own gains G_ii must be positive")
            object.__setattr__(self, "G", G)
            object.__setattr__(self, "S", S)
            object.__setattr__(self, "C_rx", C_rx)
        elif all(derived) and not any(physical):
            A = _as_array(self.A, "A", 2)
            Cdiag = _as_array(self.Cdiag, "Cdiag", 1)
            if A.shape != (K, K):
                raise ValidationError("A", f"expected shape {(K, K)}, got {A.shape}")
            if Cdiag.shape != (K,):
                raise ValidationError("Cdiag", f"expected length {K}")
            if np.any(A < 0):
                raise ValidationError("A", "coefficients must be nonnegative")
            if np.any(np.diag(A) <= 0):
                raise ValidationError("A", "diagonal A_ii must be positive")
            if np.any(Cdiag <= 0):
                raise ValidationError("Cdiag", "must be positive")
            object.__setattr__(self, "A", A)
            object.__setattr__(self, "Cdiag", Cdiag)
        else:
            raise ValidationError(
                "scenario", "give either G, S, C_rx (physical) or A, Cdiag (derived)"
            )

        if self.constraints is not None and self.constraints.dim != K:
            raise ValidationError("constraints", f"dimension {self.constraints.dim} != K={K}")

    @property
    def K(self) -> int:
        return self.gamma.size

    @property
    def N(self) -> Optional[int]:
        return None if self.S is None else self.S.shape[1]

    @property
    def variant(self) -> str:
        return "physical" if self.G is not None else "derived"

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.sigma2 == other.sigma2
            and self.objective == other.objective
            and self.constraints == other.constraints
            and all(
                _same(getattr(self, f), getattr(other, f))
                for f in ("gamma", "G", "S", "C_rx", "A", "Cdiag")
            )
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LinkModel:
    A: np.ndarray
    Cdiag: np.ndarray

    def __post_init__(self):
        A = _as_array(self.A, "A", 2)
        Cdiag = _as_array(self.Cdiag, "Cdiag", 1)
        K = Cdiag.size
        if A.shape != (K, K):
            raise DimensionMismatch(f"A has shape {A.shape}, Cdiag has length {K}")
        if np.any(A < 0):
            raise ValidationError("A", "coefficients must be nonnegative")
        for i in range(K):
            if A[i, i] <= 0:
                raise DegenerateUser(i)
        if np.any(Cdiag <= 0):
            raise ValidationError("Cdiag", "must be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Cdiag", Cdiag)

    @property
    def K(self) -> int:
        return self.Cdiag.size

    def __eq__(self, other):
        if not isinstance(other, LinkModel):
            return NotImplemented
        return _same(self.A, other.A) and _same(self.Cdiag, other.Cdiag)

    __hash__ = None


def build_link_model(scn: Scenario) -> LinkModel:
    """Summarize channel and receivers into ``A`` and ``Cdiag``.

    Derived-model scenarios pass their coefficients through unchanged.
    Raises :class:`DegenerateUser` when some ``G_ii (c_i's_i)^2`` is zero.
    """
    if scn.variant == "derived":
        return LinkModel(scn.A, scn.Cdiag)
    wide = np.longdouble
    C = scn.C_rx.astype(wide)
    corr = C @ scn.S.astype(wide).T  # corr[i, j] = c_i' s_j
    A = (scn.G.astype(wide) * corr**2).astype(float)
    Cdiag = (np.einsum("ij,ij->i", C, C) ** 2).astype(float)
    for i in range(scn.K):
        if A[i, i] == 0:
            raise DegenerateUser(i)
    return LinkModel(A, Cdiag)


def sir(model: LinkModel, sigma2: float, p) -> np.ndarray:
    """Per-user SIR ``A_ii p_i / (sum_{j != i} A_ij p_j + C_ii sigma2)``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (model.K,):
        raise DimensionMismatch(f"power vector has shape {p.shape}, expected ({model.K},)")
    if sigma2 <= 0:
        raise ValidationError("sigma2", "must be positive")
    diag = np.diag(model.A)
    cross = model.A - np.diag(diag)
    return diag * p / (cross @ p + model.Cdiag * sigma2)
