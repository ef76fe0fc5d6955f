"""Recover an effective circuit from a measured transfer matrix.

Miscalibrated gates are modelled by ``Ry`` corrections inserted around the
entangling gates. The correction angles are fitted by minimising the
Frobenius distance between ``M @ T(U(angles))`` and the measured ``T_exp``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .detector import (
    DEFAULT_SHOTS,
    DetectorMatrix,
    build_detector_matrix,
    calibration_records,
    estimate_detector_matrix,
    get_profile,
    sample_shots,
)
from .qcore import Circuit, CircuitError, Gate, assemble_unitary, leak_circuit, transfer_matrix


@dataclass(frozen=True)
class CalibrationProblem:
    """``correction_slots[i] = (position, qubit)`` puts ``Ry(angles[i])`` on ``qubit``
    just before gate ``position`` of ``base_circuit`` (``position == len`` means at the end).
    Slots sharing a position are applied in list order.
    """

    base_circuit: Circuit
    correction_slots: tuple[tuple[int, int], ...]
    t_exp: np.ndarray
    m: DetectorMatrix

    def __post_init__(self):
        slots = tuple((int(p), int(q)) for p, q in self.correction_slots)
        for p, q in slots:
            if not 0 <= p <= len(self.base_circuit):
                raise CircuitError(f"slot position {p} outside 0..{len(self.base_circuit)}")
            if not 0 <= q < self.base_circuit.qubit_count:
                raise CircuitError(f"slot qubit {q} out of range")
        object.__setattr__(self, "correction_slots", slots)
        t = np.asarray(self.t_exp, dtype=float)
        if t.shape != (self.base_circuit.dim,) * 2:
            raise ValueError(f"t_exp must be {self.base_circuit.dim}x{self.base_circuit.dim}")
        object.__setattr__(self, "t_exp", t)

    @property
    def parameter_count(self) -> int:
        return len(self.correction_slots)


def default_slots(circuit: Circuit) -> tuple[tuple[int, int], ...]:
    """One correction per involved qubit right before and right after every two-qubit gate."""
    slots = []
    for pos, g in enumerate(circuit.gates):
        if len(g.qubits) == 2:
            slots += [(pos, q) for q in g.qubits]
            slots += [(pos + 1, q) for q in g.qubits]
    return tuple(slots)


def parameterized_circuit(base: Circuit, slots: Sequence[tuple[int, int]], angles: Sequence[float]) -> Circuit:
    if len(angles) != len(slots):
        raise ValueError(f"expected {len(slots)} angles, got {len(angles)}")
    before: dict[int, list[Gate]] = {}
    for (pos, q), a in zip(slots, angles):
        before.setdefault(pos, []).append(Gate.ry(q, a))
    gates: list[Gate] = []
    for pos in range(len(base.gates) + 1):
        gates += before.get(pos, [])
        if pos < len(base.gates):
            gates.append(base.gates[pos])
    return Circuit(base.qubit_count, tuple(gates), base.ordering)


def predicted_transfer(problem: CalibrationProblem, angles: Sequence[float]) -> np.ndarray:
    u = assemble_unitary(parameterized_circuit(problem.base_circuit, problem.correction_slots, angles))
    return problem.m.matrix @ transfer_matrix(u)


def objective(problem: CalibrationProblem, angles: Sequence[float]) -> float:
    """``|| M T(U(angles)) - T_exp ||_F``."""
    return float(np.linalg.norm(predicted_transfer(problem, angles) - problem.t_exp))


@dataclass
class CalibrationResult:
    angles: np.ndarray
    err_initial: float
    err_final: float
    relative_err_initial: float
    relative_err_final: float
    evaluations: int
    stagnant: bool = False
    restart_errors: list[float] = field(default_factory=list)

    @property
    def improvement(self) -> float:
        return self.err_initial / self.err_final if self.err_final > 0 else float("inf")

    def to_json(self) -> str:
        return json.dumps(
            {
                "angles": [float(a) for a in self.angles],
                "err_initial": self.err_initial,
                "err_final": self.err_final,
                "relative_err_initial": self.relative_err_initial,
                "relative_err_final": self.relative_err_final,
                "evaluations": self.evaluations,
                "stagnant": self.stagnant,
                "restart_errors": self.restart_errors,
            },
            indent=2,
        )


def _nm_polish(fun, x0: np.ndarray, budget: int, step: float, chunk: int = 600):
    """Repeated Nelder-Mead runs from a fresh axis-aligned simplex of shrinking size.

    A single simplex collapses on this landscape long before the budget runs
    out; restarting it around the incumbent keeps making progress. Returns
    ``(x, f(x), evaluations)``; the incumbent never gets worse.
    """
    x = np.array(x0, dtype=float)
    fx = fun(x)
    used = 1
    eye = np.eye(len(x))
    while used < budget:
        res = minimize(
            fun,
            x,
            method="Nelder-Mead",
            options={
                "maxfev": min(budget - used, chunk),
                "xatol": 1e-12,
                "fatol": 1e-20,
                "adaptive": True,
                "initial_simplex": np.vstack([x, x + step * eye]),
            },
        )
        used += res.nfev
        if res.fun < fx:
            x, fx = res.x, float(res.fun)
        step = max(step * 0.3, 1e-6)
    return x, fx, used


def calibrate(
    problem: CalibrationProblem,
    restarts: int = 10,
    max_evals: int = 2000,
    seed=None,
    init_range: float = 0.3,
    keep: int = 3,
) -> CalibrationResult:
    """Multi-restart simplex search; total budget ``restarts * max_evals`` objective calls.

    Half of the budget explores from ``restarts`` uniform starts in
    ``[-init_range, init_range]``; the rest refines the ``keep`` best.
    """
    if restarts < 1 or max_evals < 10:
        raise ValueError("need at least one restart and ten evaluations")
    n = problem.parameter_count
    sq = lambda a: objective(problem, a) ** 2  # noqa: E731
    zero = np.zeros(n)
    err0 = objective(problem, zero)
    norm_t = float(np.linalg.norm(problem.t_exp))

    total = restarts * max_evals
    explore = max_evals // 2
    streams = np.random.SeedSequence(seed).spawn(restarts)
    candidates = []
    used = 0
    for ss in streams:
        x0 = np.random.default_rng(ss).uniform(-init_range, init_range, n)
        x, fx, k = _nm_polish(sq, x0, explore, step=0.1)
        candidates.append((fx, x))
        used += k
    candidates.sort(key=lambda c: c[0])
    restart_errors = [float(np.sqrt(fx)) for fx, _ in candidates]

    best_f, best_x = err0 ** 2, zero
    top = candidates[: max(1, keep)]
    share = max(10, (total - used) // len(top))
    for fx, x in top:
        x, fx, k = _nm_polish(sq, x, share, step=0.01)
        used += k
        if fx < best_f:
            best_f, best_x = fx, x

    stagnant = not best_f < err0 ** 2
    err_final = float(np.sqrt(best_f))
    return CalibrationResult(
        angles=np.asarray(best_x),
        err_initial=err0,
        err_final=err_final,
        relative_err_initial=err0 / norm_t,
        relative_err_final=err_final / norm_t,
        evaluations=used,
        stagnant=stagnant,
        restart_errors=restart_errors,
    )


def measure_transfer_matrix(
    circuit: Circuit,
    m: DetectorMatrix,
    shots: int | None = DEFAULT_SHOTS,
    seed=None,
) -> np.ndarray:
    """Feed every basis state through ``circuit`` and the detector.

    ``shots=None`` returns the expectation ``M @ T(U)``.
    """
    t = transfer_matrix(assemble_unitary(circuit))
    if shots is None:
        return m.matrix @ t
    if shots <= 0:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    return np.column_stack([sample_shots(t[:, j], m, shots, rng).frequencies for j in range(circuit.dim)])


def synthetic_problem(
    seed=None,
    perturbation: float = 0.3,
    shots: int | None = None,
    noise_profile: str = "ideal",
    circuit: Circuit | None = None,
) -> tuple[CalibrationProblem, np.ndarray]:
    """A problem whose ``T_exp`` comes from known hidden corrections.

    With ``shots`` set, both ``T_exp`` and the detector matrix handed to the
    problem are estimated from samples, as on hardware. Returns the problem
    and the hidden angles.
    """
    base = leak_circuit() if circuit is None else circuit
    slots = default_slots(base)
    rng = np.random.default_rng(seed)
    truth = rng.uniform(-perturbation, perturbation, len(slots))
    m_true = build_detector_matrix(get_profile(noise_profile, base.qubit_count))
    actual = parameterized_circuit(base, slots, truth)
    t_exp = measure_transfer_matrix(actual, m_true, shots, rng)
    m = m_true if shots is None else estimate_detector_matrix(calibration_records(m_true, shots, rng))
    return CalibrationProblem(base, slots, t_exp, m), truth
