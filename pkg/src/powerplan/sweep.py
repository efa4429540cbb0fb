"""Scan a common scale factor on the SIR targets toward the feasibility edge."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .region import NormalizedSystem, min_power_point
from .spectral import DEFAULT_MAX_ITER, DEFAULT_TOL, spectral_radius


@dataclass(frozen=True, eq=False)
class SweepRow:
    s: float
    rho: float
    status: str
    powers: Optional[np.ndarray]

    @property
    def total(self) -> Optional[float]:
        return None if self.powers is None else float(self.powers.sum())


def sweep(
    sys: NormalizedSystem,
    scales: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list[SweepRow]:
    """Minimal power point for targets ``s * gamma``, one row per scale, sorted by ``s``."""
    rows = []
    for s in sorted(float(v) for v in scales):
        if not s > 0:
            raise ValueError("scale factors must be positive")
        report = min_power_point(sys.with_gamma(s * sys.gamma), tol, max_iter)
        rows.append(SweepRow(s, report.rho, report.status, report.min_point))
    return rows


def boundary_scale(sys: NormalizedSystem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Scale ``s*`` at which ``rho(s diag(gamma) B)`` reaches 1; ``inf`` when ``B`` is nilpotent."""
    rho = spectral_radius(sys.gain_matrix, tol, max_iter)
    return np.inf if rho == 0 else 1.0 / rho


def csv_header(K: int) -> list[str]:
    return ["s", "rho", "status"] + [f"p_{i + 1}" for i in range(K)] + ["total"]


def write_csv(rows: Sequence[SweepRow], K: int, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(csv_header(K))
    for row in rows:
        if row.powers is None:
            tail = [""] * K + [""]
        else:
            tail = [repr(float(v)) for v in row.powers] + [repr(row.total)]
        writer.writerow([repr(row.s), repr(row.rho), row.status] + tail)
