"""Two-point-measurement trajectory statistics and the integral fluctuation theorem."""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..qcore import DEFAULT_ORDERING, QubitOrdering, subset_index
from ..thermal import QubitSpec


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Joint probabilities ``joint[f, i] = T[f, i] * p0[i]`` on a measured register.

    ``energies[i, k]`` is the energy of qubit ``labels[k]`` in basis level ``i``.
    """

    joint: np.ndarray
    energies: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        if abs(self.joint.sum() - 1.0) > 1e-9:
            raise ValueError(f"trajectory probabilities sum to {self.joint.sum():.12g}")

    @property
    def initial(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    @property
    def final(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    def heat(self) -> np.ndarray:
        """``Q[f, i, k]``: energy change of qubit k along trajectory ``i -> f``."""
        return self.energies[:, None, :] - self.energies[None, :, :]

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        n = len(self.labels)
        qcols = ",".join(f"q_{lab}" for lab in self.labels)
        buf.write(f"initial,final,probability,{qcols}\n")
        q = self.heat()
        d = self.joint.shape[0]
        for i in range(d):
            for f in range(d):
                qs = ",".join(f"{q[f, i, k]:.{digits}g}" for k in range(n))
                buf.write(f"{format(i, f'0{n}b')},{format(f, f'0{n}b')},{self.joint[f, i]:.{digits}g},{qs}\n")
        return buf.getvalue()


def reduced_transfer_matrix(
    t: np.ndarray,
    env_populations: np.ndarray,
    keep: Sequence[str],
    ordering: QubitOrdering = DEFAULT_ORDERING,
) -> np.ndarray:
    """Population map on ``keep`` induced by ``t`` when the rest starts in ``env_populations``.

    ``env_populations`` is indexed over the remaining qubits in ordering order
    (first remaining qubit least significant).
    """
    t = np.asarray(t, dtype=float)
    n = len(ordering)
    kept = ordering.indices(keep)
    rest = [q for q in range(n) if q not in kept]
    kidx = subset_index(n, kept)
    ridx = subset_index(n, rest)
    dk = 2 ** len(kept)
    w = np.asarray(env_populations, dtype=float)[ridx]  # weight of each input column
    out = np.zeros((dk, dk))
    rows, cols = np.meshgrid(kidx, kidx, indexing="ij")
    np.add.at(out, (rows, cols), t * w[None, :])
    return out


def trajectory_ensemble(
    t_reduced: np.ndarray,
    p0: np.ndarray,
    specs: Sequence[QubitSpec],
) -> TrajectoryEnsemble:
    """Trajectories of a register whose qubits are described by ``specs`` (least significant first)."""
    n = len(specs)
    idx = np.arange(2 ** n)
    energies = np.array([[s.omega * ((i >> k) & 1) for k, s in enumerate(specs)] for i in idx], dtype=float)
    joint = np.asarray(t_reduced, dtype=float) * np.asarray(p0, dtype=float)[None, :]
    labels = tuple(f"q{k}" for k in range(n))
    return TrajectoryEnsemble(joint, energies, labels)


def fluctuation_theorem(trajectories: TrajectoryEnsemble, betas: Sequence[float]) -> float:
    """``<< exp(-sum_k beta_k Q_k) >>`` over trajectories; 1 for isolated local-Gibbs starts."""
    betas = np.asarray(betas, dtype=float)
    if betas.shape != (trajectories.energies.shape[1],):
        raise ValueError("one inverse temperature per measured qubit")
    exponent = -(trajectories.heat() @ betas)
    return float(np.sum(trajectories.joint * np.exp(exponent)))
