"""Diagonal observables built from inverse temperatures and local energies."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..qcore import DEFAULT_ORDERING, CircuitError, QubitOrdering, subset_index
from ..thermal import QubitSpec

# Level substituted for a zero eigenvalue when raising to a negative power.
DEFAULT_ZERO_FLOOR = 1e-2


@dataclass(frozen=True)
class ObservableB:
    """Shifted weighted energy ``sum_k c_k H_k - min(...)`` over a qubit subset.

    ``diagonal`` covers the full register (identity on excluded qubits);
    ``coefficients[k]`` multiplies the excitation number of ``qubit_subset[k]``
    (``beta_k * omega_k`` for the physical observable).
    """

    diagonal: np.ndarray
    qubit_subset: tuple[str, ...]
    shift: float
    coefficients: tuple[float, ...]
    ordering: QubitOrdering = DEFAULT_ORDERING

    def __post_init__(self):
        d = np.array(self.diagonal, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "qubit_subset", tuple(self.qubit_subset))
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    @property
    def subset_diagonal(self) -> np.ndarray:
        """Eigenvalues on the subset register alone (for marginal vectors)."""
        return _levels(self.coefficients) - self.shift

    def levels_for(self, p: np.ndarray) -> np.ndarray:
        n = len(p)
        if n == len(self.diagonal):
            return self.diagonal
        if n == 2 ** len(self.qubit_subset):
            return self.subset_diagonal
        raise ValueError(
            f"vector of length {n} matches neither the full register ({len(self.diagonal)}) "
            f"nor the subset ({2 ** len(self.qubit_subset)})"
        )

    def expectation(self, p: np.ndarray) -> float:
        return float(self.levels_for(p) @ p)

    def scaled(self, factor: float) -> "ObservableB":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return ObservableB(
            self.diagonal * factor,
            self.qubit_subset,
            self.shift * factor,
            tuple(c * factor for c in self.coefficients),
            self.ordering,
        )


def _levels(coefficients: Sequence[float]) -> np.ndarray:
    n = len(coefficients)
    idx = np.arange(2 ** n)
    out = np.zeros(2 ** n)
    for k, c in enumerate(coefficients):
        out += c * ((idx >> k) & 1)
    return out


def observable_from_coefficients(
    coefficients: Sequence[float],
    subset: Sequence[str],
    ordering: QubitOrdering = DEFAULT_ORDERING,
) -> ObservableB:
    if not subset:
        raise CircuitError("subset must name at least one qubit")
    if len(coefficients) != len(subset):
        raise ValueError("one coefficient per subset qubit")
    sub = _levels(coefficients)
    shift = float(sub.min())
    full = sub[subset_index(len(ordering), ordering.indices(subset))] - shift
    return ObservableB(full, tuple(subset), shift, tuple(coefficients), ordering)


def build_B(
    specs: Sequence[QubitSpec],
    subset: Sequence[str],
    ordering: QubitOrdering = DEFAULT_ORDERING,
) -> ObservableB:
    """``B = sum_k beta_k H_k - min(sum_k beta_k H_k)`` over ``subset``.

    ``specs`` is indexed like ``ordering``. With ``H_k = omega_k |1><1|`` each
    qubit contributes ``beta_k * omega_k`` when excited.
    """
    if len(specs) != len(ordering):
        raise ValueError("need one QubitSpec per qubit in the ordering")
    coeffs = [specs[ordering.index(lab)].beta_omega for lab in subset]
    return observable_from_coefficients(coeffs, subset, ordering)


def energy_observable(
    specs: Sequence[QubitSpec],
    subset: Sequence[str],
    ordering: QubitOrdering = DEFAULT_ORDERING,
) -> ObservableB:
    """Plain ``sum_k H_k`` over ``subset`` (for example ``H_c + H_h``)."""
    coeffs = [specs[ordering.index(lab)].omega for lab in subset]
    return observable_from_coefficients(coeffs, subset, ordering)


def observable_power(levels: np.ndarray, alpha: float, zero_floor: float = DEFAULT_ZERO_FLOOR) -> np.ndarray:
    """Spectral power of a nonnegative diagonal.

    For ``alpha > 0`` a zero level stays zero. For ``alpha < 0`` every level is
    first raised to at least ``zero_floor``, which keeps ``-B**alpha``
    non-decreasing in ``B`` (so the passivity inequality remains valid) and
    finite. ``zero_floor=0`` reproduces the drop-the-ground convention
    ``0**alpha := 0``, which is *not* monotone for negative ``alpha``.
    """
    levels = np.asarray(levels, dtype=float)
    if alpha == 0:
        return np.ones_like(levels)
    if alpha > 0:
        return np.where(levels > 0, np.abs(levels) ** alpha, 0.0)
    if zero_floor > 0:
        return np.maximum(levels, zero_floor) ** alpha
    safe = np.where(levels > 0, levels, 1.0)
    return np.where(levels > 0, safe ** alpha, 0.0)
