"""Spectral radius of nonnegative matrices.

The radius is certified by Collatz-Wielandt bounds: for any positive ``x``,
``min_i (Mx)_i/x_i <= rho(M) <= max_i (Mx)_i/x_i``.  These bounds only close
on irreducible matrices, so the matrix is first split into its strongly
connected blocks (Frobenius normal form) and the radius is the largest block
radius.  Each block is iterated with a positive shift, which makes it
primitive and removes the cycling of plain power iteration on periodic
matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import NoConvergence

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10000


def _check_nonneg_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"expected a nonempty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix contains NaN or Inf")
    if np.any(M < 0):
        raise ValueError("matrix has negative entries")
    return M


def _irreducible_radius(M: np.ndarray, tol: float, max_iter: int) -> float:
    shift = 0.5 * M.sum(axis=1).max()
    x = np.ones(M.shape[0])
    for _ in range(max_iter):
        y = M @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= tol * max(1.0, hi):
            return 0.5 * (lo + hi)
        x = y + shift * x
        x /= x.max()
    raise NoConvergence(max_iter, f"Collatz-Wielandt gap {hi - lo:.3e} on a block of size {M.shape[0]}")


def spectral_radius(M, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Spectral radius of a nonnegative square matrix.

    Parameters
    ----------
    M : array_like
        Square matrix with finite nonnegative entries.  Need not be
        irreducible.
    tol : float
        Relative accuracy; the result is within ``tol * max(1, rho)`` of the
        true radius.
    max_iter : int
        Iteration cap per irreducible block.

    Raises
    ------
    NoConvergence
        If the Collatz-Wielandt bounds of some block do not close in time.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")
    M = _check_nonneg_square(M)
    n_blocks, labels = connected_components(M > 0, directed=True, connection="strong")
    rho = 0.0
    for b in range(n_blocks):
        idx = np.flatnonzero(labels == b)
        if idx.size == 1:
            rho = max(rho, M[idx[0], idx[0]])
        else:
            rho = max(rho, _irreducible_radius(M[np.ix_(idx, idx)], tol, max_iter))
    return float(rho)


@dataclass(frozen=True)
class ContractionReport:
    contractive: bool
    rho: float
    margin: float

    def __bool__(self):
        return self.contractive


def is_contractive(M, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> ContractionReport:
    """Whether ``rho(M) < 1 - tol``; the report carries the margin ``1 - rho``."""
    rho = spectral_radius(M, tol, max_iter)
    return ContractionReport(rho < 1.0 - tol, rho, 1.0 - rho)


def classify_radius(rho: float, tol: float = DEFAULT_TOL) -> str:
    """Map a radius estimate to ``feasible``, ``infeasible`` or ``boundary``."""
    if rho < 1.0 - tol:
        return "feasible"
    if rho > 1.0 + tol:
        return "infeasible"
    return "boundary"
