"""Dense few-qubit circuits, unitaries and population transfer matrices.

Bit convention: qubit ``k`` is bit ``k`` of the computational-basis index, so
qubit 0 is the least significant bit. ``|0>`` is the ground state. Labels are
attached through :class:`QubitOrdering`; for the three-qubit setup the default
ordering is ``('c', 'h', 'e')``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 12


class CircuitError(ValueError):
    """Raised for structurally invalid circuits or qubit selections."""


@dataclass(frozen=True)
class QubitOrdering:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise CircuitError(f"duplicate qubit labels in {labels}")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise CircuitError(f"unknown qubit label {label!r}; have {self.labels}") from None

    def indices(self, labels: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.index(lab) for lab in labels)

    def bitstring(self, i: int) -> str:
        """Bitstring for basis index ``i``; qubit 0 is the rightmost character."""
        return format(i, f"0{len(self.labels)}b")

    def bitstrings(self) -> list[str]:
        return [self.bitstring(i) for i in range(2 ** len(self.labels))]

    @classmethod
    def generic(cls, n: int) -> "QubitOrdering":
        return cls(tuple(f"q{k}" for k in range(n)))


DEFAULT_ORDERING = QubitOrdering(("c", "h", "e"))


@dataclass(frozen=True)
class Gate:
    kind: str  # 'ry' | 'cnot' | 'swap'
    qubits: tuple[int, ...]
    angle: float = 0.0

    @classmethod
    def ry(cls, qubit: int, angle: float) -> "Gate":
        return cls("ry", (qubit,), float(angle))

    @classmethod
    def cnot(cls, control: int, target: int) -> "Gate":
        return cls("cnot", (control, target))

    @classmethod
    def swap(cls, a: int, b: int) -> "Gate":
        return cls("swap", (a, b))


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[Gate, ...] = ()
    ordering: QubitOrdering | None = field(default=None, compare=False)

    def __post_init__(self):
        n = self.qubit_count
        if not 1 <= n <= MAX_QUBITS:
            raise CircuitError(f"qubit_count must be in 1..{MAX_QUBITS}, got {n}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            _check_gate(g, n)
        if self.ordering is None:
            object.__setattr__(self, "ordering", QubitOrdering.generic(n))
        elif len(self.ordering) != n:
            raise CircuitError("ordering length does not match qubit_count")

    @property
    def dim(self) -> int:
        return 2 ** self.qubit_count

    def append(self, *gates: Gate) -> "Circuit":
        return Circuit(self.qubit_count, self.gates + gates, self.ordering)

    def without(self, positions: Iterable[int]) -> "Circuit":
        drop = set(positions)
        kept = tuple(g for i, g in enumerate(self.gates) if i not in drop)
        return Circuit(self.qubit_count, kept, self.ordering)

    def __len__(self):
        return len(self.gates)


def _check_gate(g: Gate, n: int) -> None:
    arity = {"ry": 1, "cnot": 2, "swap": 2}
    if g.kind not in arity:
        raise CircuitError(f"unknown gate kind {g.kind!r}")
    if len(g.qubits) != arity[g.kind]:
        raise CircuitError(f"{g.kind} takes {arity[g.kind]} qubit(s), got {g.qubits}")
    for q in g.qubits:
        if not 0 <= q < n:
            raise CircuitError(f"qubit index {q} out of range for {n} qubits")
    if len(set(g.qubits)) != len(g.qubits):
        raise CircuitError(f"{g.kind} needs distinct qubits, got {g.qubits}")


def ry_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)  # basis |control, target>
SWAP_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def _axis(q: int, n: int) -> int:
    # C-order reshape puts the most significant bit first
    return n - 1 - q


def apply_gate(states: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply ``gate`` to a state vector or to each column of a ``(2**n, m)`` batch."""
    batch = states.reshape(2 ** n, -1)
    m = batch.shape[1]
    t = batch.reshape((2,) * n + (m,))
    if gate.kind == "ry":
        ax = _axis(gate.qubits[0], n)
        t = np.moveaxis(np.tensordot(ry_matrix(gate.angle), t, axes=([1], [ax])), 0, ax)
    else:
        a, b = (_axis(q, n) for q in gate.qubits)
        t = np.moveaxis(t, (a, b), (0, 1))
        t = t.reshape(4, -1)
        mat = CNOT_MATRIX if gate.kind == "cnot" else SWAP_MATRIX
        t = (mat @ t).reshape((2,) * n + (m,))
        t = np.moveaxis(t, (0, 1), (a, b))
    return t.reshape(states.shape)


def assemble_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of ``circuit``; gates act in listed order (first gate first)."""
    n = circuit.qubit_count
    u = np.eye(2 ** n, dtype=complex)
    for g in circuit.gates:
        u = apply_gate(u, g, n)
    return u


def gate_unitary(gate: Gate, n: int) -> np.ndarray:
    """Full-register matrix of a single gate (tensor-embedded with identities)."""
    return assemble_unitary(Circuit(n, (gate,)))


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and (
        np.linalg.norm(u @ u.conj().T - np.eye(u.shape[0])) <= tol
    )


def transfer_matrix(u: np.ndarray) -> np.ndarray:
    """Population transfer matrix ``T[i, j] = |U[i, j]|**2`` (column j = input j)."""
    return np.abs(np.asarray(u)) ** 2


def is_column_stochastic(t: np.ndarray, tol: float = 1e-10) -> bool:
    t = np.asarray(t)
    return bool(np.all(t >= -tol) and np.allclose(t.sum(axis=0), 1.0, rtol=0, atol=tol))


def is_doubly_stochastic(t: np.ndarray, tol: float = 1e-10) -> bool:
    t = np.asarray(t)
    return is_column_stochastic(t, tol) and bool(
        np.allclose(t.sum(axis=1), 1.0, rtol=0, atol=tol)
    )


def is_permutation(t: np.ndarray, tol: float = 1e-12) -> bool:
    t = np.asarray(t)
    binary = np.all((np.abs(t) < tol) | (np.abs(t - 1) < tol))
    return bool(binary and is_doubly_stochastic(t, tol))


def _bits(n: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    return (idx[:, None] >> np.arange(n)[None, :]) & 1  # (2**n, n), column k = qubit k


def subset_index(n: int, keep: Sequence[int]) -> np.ndarray:
    """Map each full-register basis index to its index on the kept qubits."""
    bits = _bits(n)
    return sum(bits[:, q] << k for k, q in enumerate(keep)).astype(int) if keep else np.zeros(2 ** n, int)


def reduced_populations(
    p_full: np.ndarray,
    keep: Sequence[str],
    ordering: QubitOrdering = DEFAULT_ORDERING,
) -> np.ndarray:
    """Marginal distribution over the qubits named in ``keep``.

    The result uses the same bit convention restricted to ``keep``: the first
    kept label becomes the least significant bit.
    """
    if not keep:
        raise CircuitError("keep must name at least one qubit")
    p_full = np.asarray(p_full, dtype=float)
    n = len(ordering)
    if p_full.shape != (2 ** n,):
        raise CircuitError(f"expected a vector of length {2 ** n}, got shape {p_full.shape}")
    if abs(p_full.sum() - 1.0) > 1e-9:
        raise ValueError(f"populations sum to {p_full.sum():.12g}, not 1")
    idx = subset_index(n, ordering.indices(keep))
    return np.bincount(idx, weights=p_full, minlength=2 ** len(keep))


def kron_populations(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Product distribution; ``vectors[k]`` belongs to qubit k (least significant first)."""
    out = np.array([1.0])
    for v in vectors:
        out = np.kron(np.asarray(v, dtype=float), out)
    return out


# --- circuits used throughout -------------------------------------------------

def scaleup_ordering(n_sub: int) -> QubitOrdering:
    if n_sub == 1:
        return DEFAULT_ORDERING
    return QubitOrdering(
        tuple(f"c{k}" for k in range(1, n_sub + 1))
        + tuple(f"h{k}" for k in range(1, n_sub + 1))
        + ("e",)
    )


def scaleup_circuit(n_sub: int, variant: str = "chain", leak: bool = True) -> Circuit:
    """Heat-leak circuit with ``n_sub`` cold and ``n_sub`` hot qubits plus one environment qubit.

    Both variants open with the two-CNOT exchange between the first hot qubit
    and the environment (``CNOT(h1->e)``, ``CNOT(e->h1)``); ``leak=False`` drops it.

    * ``chain``: then ``CNOT(h_k->c_k)`` for every pair. For ``n_sub=1`` this is
      the three-CNOT evolution circuit.
    * ``swap``: then ``SWAP(h1, c1)`` followed by nearest-neighbour swaps along
      the hot chain and along the cold chain. For ``n_sub=1`` the third CNOT is
      simply replaced by an energy-conserving swap.
    """
    if not 1 <= n_sub <= 5:
        raise CircuitError(f"n_sub must be in 1..5, got {n_sub}")
    if variant not in ("chain", "swap"):
        raise CircuitError(f"unknown variant {variant!r}")
    ordering = scaleup_ordering(n_sub)
    cold = list(range(n_sub))
    hot = list(range(n_sub, 2 * n_sub))
    env = 2 * n_sub
    gates: list[Gate] = []
    if leak:
        gates += [Gate.cnot(hot[0], env), Gate.cnot(env, hot[0])]
    if variant == "chain":
        gates += [Gate.cnot(hot[k], cold[k]) for k in range(n_sub)]
    else:
        gates.append(Gate.swap(hot[0], cold[0]))
        gates += [Gate.swap(hot[k], hot[k + 1]) for k in range(n_sub - 1)]
        gates += [Gate.swap(cold[k], cold[k + 1]) for k in range(n_sub - 1)]
    return Circuit(2 * n_sub + 1, tuple(gates), ordering)


def leak_circuit(leak: bool = True) -> Circuit:
    """The three-CNOT evolution circuit on (c, h, e); ``leak=False`` keeps only ``CNOT(h->c)``."""
    return scaleup_circuit(1, "chain", leak=leak)


def swap_leak_circuit(leak: bool = True) -> Circuit:
    return scaleup_circuit(1, "swap", leak=leak)


LEAK_GATE_COUNT = 2  # leading gates that couple the environment qubit
