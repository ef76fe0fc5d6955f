"""Majorization checks via Lorenz curves (sorted cumulative sums)."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

EXACT_TOL = 1e-9


@dataclass
class MajorizationResult:
    majorizes: bool
    lorenz_initial: np.ndarray
    lorenz_final: np.ndarray

    def touching_points(self, tol: float = EXACT_TOL) -> np.ndarray:
        """Indices k (1-based) where the two curves meet."""
        return np.flatnonzero(np.abs(self.lorenz_initial - self.lorenz_final) <= tol) + 1

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        buf.write("k,c0_k,cf_k\n")
        for k, (a, b) in enumerate(zip(self.lorenz_initial, self.lorenz_final), start=1):
            buf.write(f"{k},{a:.{digits}g},{b:.{digits}g}\n")
        return buf.getvalue()


def lorenz_curve(p: np.ndarray) -> np.ndarray:
    return np.cumsum(np.sort(np.asarray(p, dtype=float))[::-1])


def majorization_test(p0: np.ndarray, pf: np.ndarray, tol: float = EXACT_TOL) -> MajorizationResult:
    """Does ``p0`` majorize ``pf``? Pass a statistical ``tol`` for shot data."""
    c0, cf = lorenz_curve(p0), lorenz_curve(pf)
    if c0.shape != cf.shape:
        raise ValueError("distributions must have equal length")
    return MajorizationResult(bool(np.all(c0 >= cf - tol)), c0, cf)


def process_majorization(t: np.ndarray, tol: float = EXACT_TOL) -> MajorizationResult:
    """Majorization on trajectory data: does the uniform input stay majorized by its image?

    For a column-stochastic ``t`` this holds iff ``t`` is doubly stochastic,
    since the uniform distribution is majorized by every other one.
    """
    t = np.asarray(t, dtype=float)
    u = np.full(t.shape[1], 1.0 / t.shape[1])
    return majorization_test(u, t @ u, tol)
