"""Preparation angles, inverse temperatures and the diagonal thermal ensemble.

A qubit rotated by ``Ry(theta)`` from the ground state has excited population
``sin^2(theta/2)``. Matching that to a Gibbs state of gap ``omega`` gives
``beta*omega = -ln tan^2(theta/2)``. Angles above ``pi/2`` give negative
``beta*omega`` (population inversion), which is allowed.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .qcore import kron_populations, ry_matrix


class TemperatureLimitError(ValueError):
    """The angle sits at a pure state, where the inverse temperature is infinite."""


def theta_to_beta_omega(theta: float) -> float:
    if not 0.0 < theta < math.pi:
        raise TemperatureLimitError(
            f"theta={theta!r} is outside (0, pi); beta*omega would be "
            f"{'+inf' if theta <= 0 else '-inf'}"
        )
    return -math.log(math.tan(theta / 2) ** 2)


def beta_omega_to_theta(beta_omega: float) -> float:
    # tan(theta/2) = exp(-beta_omega/2)
    return 2.0 * math.atan(math.exp(-beta_omega / 2.0))


def excited_population(theta: float) -> float:
    return math.sin(theta / 2) ** 2


def qubit_populations(theta: float) -> np.ndarray:
    return np.array([math.cos(theta / 2) ** 2, math.sin(theta / 2) ** 2])


def gibbs_populations(beta_omega: float) -> np.ndarray:
    """Two-level Gibbs vector (ground, excited) for a given ``beta*omega``."""
    return np.array([expit(beta_omega), expit(-beta_omega)])


@dataclass(frozen=True)
class QubitSpec:
    """One qubit's preparation angle and gap; ``beta_omega`` follows from ``theta``."""

    theta: float
    omega: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @property
    def beta_omega(self) -> float:
        return theta_to_beta_omega(self.theta)

    @property
    def beta(self) -> float:
        return self.beta_omega / self.omega

    @property
    def populations(self) -> np.ndarray:
        return qubit_populations(self.theta)

    @classmethod
    def from_beta_omega(cls, beta_omega: float, omega: float = 1.0) -> "QubitSpec":
        return cls(beta_omega_to_theta(beta_omega), omega)


@dataclass(frozen=True)
class DiagonalEnsemble:
    """Uniform mixture of the 2**n coherent ``(+-theta_1, ..., +-theta_n)`` preparations."""

    specs: tuple[QubitSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))

    @property
    def sign_patterns(self) -> list[tuple[int, ...]]:
        return list(itertools.product((1, -1), repeat=len(self.specs)))

    @property
    def weights(self) -> np.ndarray:
        k = 2 ** len(self.specs)
        return np.full(k, 1.0 / k)

    def populations(self) -> np.ndarray:
        return ensemble_populations(self)

    def states(self) -> list[np.ndarray]:
        return [coherent_preparation_state(s, self.specs) for s in self.sign_patterns]


def ensemble_populations(ensemble: DiagonalEnsemble | Sequence[QubitSpec]) -> np.ndarray:
    specs = ensemble.specs if isinstance(ensemble, DiagonalEnsemble) else tuple(ensemble)
    return kron_populations([s.populations for s in specs])


def coherent_preparation_state(signs: Sequence[int], specs: Sequence[QubitSpec]) -> np.ndarray:
    """Pure product state ``(x)_k Ry(s_k theta_k)|0>``; qubit 0 is least significant."""
    if len(signs) != len(specs):
        raise ValueError("need exactly one sign per qubit")
    psi = np.array([1.0 + 0j])
    for s, spec in zip(signs, specs):
        if s not in (1, -1):
            raise ValueError(f"signs must be +1 or -1, got {s}")
        psi = np.kron(ry_matrix(s * spec.theta)[:, 0], psi)
    return psi


def ensemble_density_matrix(ensemble: DiagonalEnsemble) -> np.ndarray:
    """Average of the coherent preparations' density matrices."""
    rho = 0
    for w, psi in zip(ensemble.weights, ensemble.states()):
        rho = rho + w * np.outer(psi, psi.conj())
    return rho


def specs_from_angles(thetas: Sequence[float], omegas: Sequence[float] | None = None) -> tuple[QubitSpec, ...]:
    omegas = [1.0] * len(thetas) if omegas is None else omegas
    return tuple(QubitSpec(t, w) for t, w in zip(thetas, omegas))
