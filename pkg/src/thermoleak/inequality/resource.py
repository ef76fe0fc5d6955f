"""Resource-theory (Renyi divergence) bounds and energy bookkeeping."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..qcore import DEFAULT_ORDERING, QubitOrdering, reduced_populations
from ..thermal import QubitSpec, gibbs_populations
from .passivity import AlphaSweep

KL_WINDOW = 1e-6


def default_renyi_grid(hi: float = 3.0, steps: int = 60) -> np.ndarray:
    return np.round(np.linspace(hi / steps, hi, steps), 12)


def renyi_divergence(x: np.ndarray, y: np.ndarray, alpha_tilde: float, log_form: bool = True) -> float:
    """Renyi divergence ``D(x||y)`` of order ``alpha_tilde``; KL near order 1.

    ``log_form=False`` returns the bare ``tr[x^a y^(1-a)]/(a-1)`` without the
    logarithm. It is a monotone transform of the log form at fixed order, so
    signs of differences agree.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    support = x > 0
    if np.any(y[support] <= 0):
        return math.inf
    xs, ys = x[support], y[support]
    if abs(alpha_tilde - 1.0) < KL_WINDOW:
        return float(np.sum(xs * np.log(xs / ys)))
    s = float(np.sum(xs ** alpha_tilde * ys ** (1.0 - alpha_tilde)))
    if not log_form:
        return s / (alpha_tilde - 1.0)
    return math.log(s) / (alpha_tilde - 1.0)


@dataclass(frozen=True)
class RenyiParams:
    alpha_tilde: np.ndarray
    reference: np.ndarray

    def __post_init__(self):
        ref = np.asarray(self.reference, dtype=float)
        if abs(ref.sum() - 1.0) > 1e-9 or np.any(ref < 0):
            raise ValueError("reference must be a normalized probability vector")
        object.__setattr__(self, "reference", ref)
        object.__setattr__(self, "alpha_tilde", np.asarray(self.alpha_tilde, dtype=float))


def rt_test(
    p0_sys: np.ndarray,
    pf_sys: np.ndarray,
    p_beta_sys: np.ndarray,
    alpha_tilde: Iterable[float] | None = None,
    log_form: bool = True,
) -> AlphaSweep:
    """``-(D(pf||gibbs) - D(p0||gibbs))`` per order; negative means not a thermal operation."""
    grid = default_renyi_grid() if alpha_tilde is None else np.asarray(list(alpha_tilde), dtype=float)
    params = RenyiParams(grid, p_beta_sys)
    vals = []
    for a in params.alpha_tilde:
        d0 = renyi_divergence(p0_sys, params.reference, a, log_form)
        df = renyi_divergence(pf_sys, params.reference, a, log_form)
        # inf - inf gives nan: no verdict when both sides leave the reference support
        vals.append(-(df - d0))
    return AlphaSweep(params.alpha_tilde, np.array(vals), None, "renyi")


def subsystem_rt_test(
    specs: Sequence[QubitSpec],
    p0: np.ndarray,
    pf: np.ndarray,
    system: str,
    bath: str,
    ordering: QubitOrdering = DEFAULT_ORDERING,
    alpha_tilde: Iterable[float] | None = None,
) -> AlphaSweep:
    """Treat ``system`` as the working qubit and ``bath`` as its thermal environment.

    The reference state is the Gibbs state of ``system``'s gap at the
    environment's initial inverse temperature.
    """
    sys_spec = specs[ordering.index(system)]
    bath_spec = specs[ordering.index(bath)]
    ref = gibbs_populations(bath_spec.beta * sys_spec.omega)
    x0 = reduced_populations(p0, [system], ordering)
    xf = reduced_populations(pf, [system], ordering)
    sweep = rt_test(x0, xf, ref, alpha_tilde)
    sweep.label = f"renyi-{system}"
    return sweep


@dataclass(frozen=True)
class EnergyBalance:
    defect: float
    absolute: bool
    per_group: dict[str, float]


def energy_conservation_defect(
    specs: Sequence[QubitSpec],
    p0: np.ndarray,
    pf: np.ndarray,
    partition: Sequence[Sequence[str]],
    ordering: QubitOrdering = DEFAULT_ORDERING,
) -> EnergyBalance:
    """Change of total energy, relative to the initial total energy.

    ``partition`` groups the qubits (for example ``[['e'], ['c', 'h']]``) and
    must cover each qubit exactly once; per-group energy changes are reported
    alongside. If the initial energy is zero the absolute change is returned
    and ``absolute`` is set.
    """
    flat = [lab for grp in partition for lab in grp]
    if sorted(flat) != sorted(ordering.labels):
        raise ValueError(f"partition {partition} must cover {ordering.labels} exactly once")

    def energy(p, labels):
        return sum(specs[ordering.index(lab)].omega * reduced_populations(p, [lab], ordering)[1] for lab in labels)

    per_group = {"+".join(g): float(energy(pf, g) - energy(p0, g)) for g in partition}
    delta = sum(per_group.values())
    e0 = energy(p0, flat)
    if e0 <= 0:
        return EnergyBalance(float(delta), True, per_group)
    return EnergyBalance(float(delta / e0), False, per_group)
