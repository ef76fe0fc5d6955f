"""Global passivity sweeps, the entropy-free second law and passivity deformation."""
from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from ..qcore import DEFAULT_ORDERING, QubitOrdering, reduced_populations
from ..thermal import QubitSpec
from .observable import (
    DEFAULT_ZERO_FLOOR,
    ObservableB,
    observable_from_coefficients,
    observable_power,
)


# Guards exact-mode verdicts against round-off in differences of equal numbers.
DETECTION_TOL = 1e-12


def default_alpha_grid(alpha_min: float = -2.0, alpha_max: float = 2.0, steps: int = 81) -> np.ndarray:
    """Evenly spaced exponents with the point ``alpha = 0`` removed."""
    grid = np.linspace(alpha_min, alpha_max, steps)
    grid = np.round(grid, 12)
    return grid[grid != 0.0]


def delta_B_alpha(
    b: ObservableB,
    p0: np.ndarray,
    pf: np.ndarray,
    alpha: float,
    zero_floor: float = DEFAULT_ZERO_FLOOR,
) -> float:
    """``sign(alpha) * (<B^alpha>_f - <B^alpha>_0)``; zero at ``alpha = 0``."""
    p0 = np.asarray(p0, dtype=float)
    pf = np.asarray(pf, dtype=float)
    if p0.shape != pf.shape:
        raise ValueError("p0 and pf must live on the same register")
    if alpha == 0:
        return 0.0
    powered = observable_power(b.levels_for(p0), alpha, zero_floor)
    return float(np.sign(alpha) * (powered @ (pf - p0)))


@dataclass
class AlphaSweep:
    alphas: np.ndarray
    values: np.ndarray
    ci_halfwidth: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.ci_halfwidth is not None:
            self.ci_halfwidth = np.asarray(self.ci_halfwidth, dtype=float)

    def value_at(self, alpha: float) -> float:
        i = int(np.argmin(np.abs(self.alphas - alpha)))
        if abs(self.alphas[i] - alpha) > 1e-9:
            raise KeyError(f"alpha={alpha} not on the grid")
        return float(self.values[i])

    def upper(self) -> np.ndarray:
        hw = 0.0 if self.ci_halfwidth is None else self.ci_halfwidth
        return self.values + hw

    def detected(self, tol: float = DETECTION_TOL) -> np.ndarray:
        """Boolean mask: the whole confidence band lies below zero (below ``-tol``)."""
        return self.upper() < -tol

    def detecting_alphas(self, tol: float = DETECTION_TOL) -> np.ndarray:
        return self.alphas[self.detected(tol)]

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        buf.write("alpha,value,ci_halfwidth\n")
        for k, (a, v) in enumerate(zip(self.alphas, self.values)):
            hw = "" if self.ci_halfwidth is None else f"{self.ci_halfwidth[k]:.{digits}g}"
            buf.write(f"{a:.{digits}g},{v:.{digits}g},{hw}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "AlphaSweep":
        rows = [line.split(",") for line in text.strip().splitlines()[1:]]
        alphas = [float(r[0]) for r in rows]
        values = [float(r[1]) for r in rows]
        hw = None if any(r[2] == "" for r in rows) else [float(r[2]) for r in rows]
        return cls(np.array(alphas), np.array(values), None if hw is None else np.array(hw))


def alpha_sweep(
    b: ObservableB,
    p0: np.ndarray,
    pf: np.ndarray,
    alphas: Iterable[float] | None = None,
    zero_floor: float = DEFAULT_ZERO_FLOOR,
    label: str = "",
) -> AlphaSweep:
    alphas = default_alpha_grid() if alphas is None else np.asarray(list(alphas), dtype=float)
    values = [delta_B_alpha(b, p0, pf, a, zero_floor) for a in alphas]
    return AlphaSweep(alphas, np.array(values), None, label)


def crossing_points(
    b: ObservableB,
    p0: np.ndarray,
    pf: np.ndarray,
    lo: float,
    hi: float,
    zero_floor: float = DEFAULT_ZERO_FLOOR,
    resolution: int = 400,
) -> list[float]:
    """Sign changes of the exact statistic on ``(lo, hi)``, refined by root bracketing."""
    f = lambda a: delta_B_alpha(b, p0, pf, a, zero_floor)  # noqa: E731
    grid = np.linspace(lo, hi, resolution)
    grid = grid[grid != 0]
    vals = np.array([f(a) for a in grid])
    roots = []
    for a0, a1, v0, v1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if v0 == 0:
            roots.append(float(a0))
        elif np.sign(v0) != np.sign(v1) and not (a0 < 0 < a1):
            roots.append(float(brentq(f, a0, a1, xtol=1e-12)))
    return roots


def heat_flows(
    specs: Sequence[QubitSpec],
    p0: np.ndarray,
    pf: np.ndarray,
    labels: Sequence[str],
    ordering: QubitOrdering = DEFAULT_ORDERING,
) -> np.ndarray:
    """``q_k = Delta <H_k>`` for each labelled microbath, from full-register populations."""
    q = []
    for lab in labels:
        w = specs[ordering.index(lab)].omega
        e0 = reduced_populations(p0, [lab], ordering)[1]
        ef = reduced_populations(pf, [lab], ordering)[1]
        q.append(w * (ef - e0))
    return np.array(q)


def second_law(specs: Sequence[QubitSpec], q: Sequence[float]) -> float:
    """Entropy-free second law statistic ``sum_k beta_k q_k`` (nonnegative if isolated)."""
    if len(specs) != len(q):
        raise ValueError("one inverse temperature per microbath")
    return float(sum(s.beta * qk for s, qk in zip(specs, q)))


def is_passive(p: np.ndarray, b: ObservableB | np.ndarray, atol: float = 1e-12) -> bool:
    """True iff ``B_i < B_j`` implies ``p_i >= p_j`` (ties in ``B`` unconstrained)."""
    p = np.asarray(p, dtype=float)
    levels = b.levels_for(p) if isinstance(b, ObservableB) else np.asarray(b, dtype=float)
    if levels.shape != p.shape:
        raise ValueError("dimension mismatch between populations and observable")
    order = np.argsort(levels, kind="stable")
    lv, pv = levels[order], p[order]
    # group equal levels, then require min(p) of each group >= max(p) of every higher group
    breaks = np.flatnonzero(np.diff(lv) > atol) + 1
    groups = np.split(pv, breaks)
    higher_max = -np.inf
    for grp in reversed(groups):
        if grp.min() < higher_max - atol:
            return False
        higher_max = max(higher_max, grp.max())
    return True


def _first_crossing(coeffs: np.ndarray, k: int, target: float, atol: float = 1e-12) -> float:
    """Move ``coeffs[k]`` toward ``target``; stop where two strictly ordered levels first meet."""
    n = len(coeffs)
    start = coeffs[k]
    if target == start:
        return start
    direction = np.sign(target - start)
    bits = np.array(list(itertools.product((0, 1), repeat=n)))
    levels = bits @ coeffs
    best = abs(target - start)
    for x, y in itertools.combinations(range(len(bits)), 2):
        dk = bits[x, k] - bits[y, k]
        d0 = levels[x] - levels[y]
        if dk == 0 or abs(d0) <= atol:
            continue
        step = -d0 / dk  # coefficient change that equalizes the two levels
        if np.sign(step) == direction and abs(step) <= best:
            best = abs(step)
    return float(start + direction * best)


def deform_passivity(
    b: ObservableB,
    p0: np.ndarray,
    include_original: bool = False,
) -> list[ObservableB]:
    """Deformed observables that keep ``p0`` passive.

    For each ordered pair of subset qubits ``(k, j)``, the coefficient of ``k``
    is slid toward that of ``j`` until two previously distinct levels meet.
    Levels that were degenerate may split along the way; candidates that do
    not keep ``p0`` (its marginal on the subset) passive, or that vanish, are
    discarded. Results are
    deduplicated up to positive rescaling.
    """
    coeffs = np.array(b.coefficients, dtype=float)
    n = len(coeffs)
    p0 = np.asarray(p0, dtype=float)
    if len(p0) == len(b.diagonal) and len(b.qubit_subset) < len(b.ordering):
        # the deformed family acts on the subset, so passivity is judged on its marginal
        p0 = reduced_populations(p0, b.qubit_subset, b.ordering)
    candidates = [coeffs.copy()] if include_original else []
    for k, j in itertools.permutations(range(n), 2):
        moved = coeffs.copy()
        moved[k] = _first_crossing(coeffs, k, coeffs[j])
        candidates.append(moved)

    out: list[ObservableB] = []
    seen: list[np.ndarray] = []
    for c in candidates:
        obs = observable_from_coefficients(c, b.qubit_subset, b.ordering)
        span = obs.diagonal.max()
        if span <= 1e-12:
            continue
        unit = obs.diagonal / span
        if any(np.allclose(unit, s, atol=1e-10) for s in seen):
            continue
        if is_passive(p0, obs.subset_diagonal):
            seen.append(unit)
            out.append(obs)
    return out


def proportional(a: ObservableB, b: ObservableB, atol: float = 1e-10) -> bool:
    """Whether two observables agree up to a positive factor."""
    sa, sb = a.diagonal.max(), b.diagonal.max()
    if sa <= 0 or sb <= 0:
        return sa <= 0 and sb <= 0
    return bool(np.allclose(a.diagonal / sa, b.diagonal / sb, atol=atol))
