"""Readout-noise model, detector (confusion) matrices and finite-shot sampling.

A detector matrix ``M`` is column stochastic: column ``j`` is the distribution
of recorded outcomes when the register is truly in basis state ``j``.
Measured frequencies are ``M @ p``; compensation applies ``M^-1``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qcore import DEFAULT_ORDERING, QubitOrdering, is_column_stochastic

DEFAULT_SHOTS = 8192
NEGATIVITY_TOLERANCE = 1e-6


class NegativeProbabilityError(ValueError):
    """Compensated populations went negative beyond tolerance."""

    def __init__(self, vector: np.ndarray, tol: float = NEGATIVITY_TOLERANCE):
        self.vector = np.asarray(vector)
        super().__init__(
            f"compensated vector has entry {self.vector.min():.3e} below -{tol:g}: {self.vector}"
        )


@dataclass(frozen=True)
class ReadoutNoiseProfile:
    """Independent per-qubit readout errors ``(eps01, eps10)``.

    ``eps01`` is P(read 1 | true 0) and ``eps10`` is P(read 0 | true 1).
    """

    pairs: tuple[tuple[float, float], ...]
    name: str = "custom"

    def __post_init__(self):
        pairs = tuple((float(a), float(b)) for a, b in self.pairs)
        for e01, e10 in pairs:
            for eps in (e01, e10):
                if not 0.0 <= eps < 0.5:
                    raise ValueError(f"readout error {eps} outside [0, 0.5)")
        object.__setattr__(self, "pairs", pairs)

    @property
    def qubit_count(self) -> int:
        return len(self.pairs)

    @classmethod
    def symmetric(cls, eps: Sequence[float], name: str = "symmetric") -> "ReadoutNoiseProfile":
        return cls(tuple((e, e) for e in eps), name)

    @classmethod
    def ideal(cls, n: int) -> "ReadoutNoiseProfile":
        return cls(((0.0, 0.0),) * n, "ideal")

    def resized(self, n: int) -> "ReadoutNoiseProfile":
        """Cycle the per-qubit pairs to cover ``n`` qubits."""
        if n == self.qubit_count:
            return self
        return ReadoutNoiseProfile(tuple(self.pairs[k % self.qubit_count] for k in range(n)), self.name)


# Per-qubit pairs for (c, h, e). Asymmetric errors chosen so that the
# uncompensated angle read-outs land near the published Tenerife/Yorktown
# biases at mean error rates of 0.10/0.10/0.15 and 0.03.
PROFILES: dict[str, ReadoutNoiseProfile] = {
    "ideal": ReadoutNoiseProfile.ideal(3),
    "tenerife": ReadoutNoiseProfile(
        ((0.0053, 0.1947), (0.0285, 0.1715), (0.1865, 0.1135)), "tenerife"
    ),
    "yorktown": ReadoutNoiseProfile(
        ((0.0074, 0.0526), (0.0058, 0.0542), (0.0142, 0.0458)), "yorktown"
    ),
    "symmetric-0.1": ReadoutNoiseProfile.symmetric((0.1, 0.1, 0.1), "symmetric-0.1"),
    "tenerife-symmetric": ReadoutNoiseProfile.symmetric((0.07, 0.12, 0.2), "tenerife-symmetric"),
}


def get_profile(name: str, n: int | None = None) -> ReadoutNoiseProfile:
    try:
        profile = PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown noise profile {name!r}; choose from {sorted(PROFILES)}") from None
    return profile if n is None else profile.resized(n)


@dataclass(frozen=True)
class DetectorMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"detector matrix must be square, got {m.shape}")
        if not is_column_stochastic(m, tol=1e-9):
            raise ValueError("detector matrix columns must be nonnegative and sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    def apply(self, p: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(p, dtype=float)

    @classmethod
    def identity(cls, dim: int) -> "DetectorMatrix":
        return cls(np.eye(dim))


def qubit_confusion(e01: float, e10: float) -> np.ndarray:
    return np.array([[1.0 - e01, e10], [e01, 1.0 - e10]])


def build_detector_matrix(profile: ReadoutNoiseProfile) -> DetectorMatrix:
    m = np.array([[1.0]])
    for e01, e10 in profile.pairs:
        if e01 >= 0.5 or e10 >= 0.5:
            raise ValueError("readout error >= 0.5 makes the detector non-invertible")
        m = np.kron(qubit_confusion(e01, e10), m)
    return DetectorMatrix(m)


@dataclass
class ShotRecord:
    counts: np.ndarray
    shots: int
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.sum() != self.shots:
            raise ValueError(f"counts sum to {self.counts.sum()}, expected {self.shots}")
        if not self.labels:
            n = int(round(math.log2(len(self.counts))))
            self.labels = [format(i, f"0{n}b") for i in range(len(self.counts))]

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def to_json(self) -> str:
        return json.dumps(
            {"counts": self.counts.tolist(), "shots": int(self.shots), "labels": list(self.labels)}
        )

    @classmethod
    def from_json(cls, text: str) -> "ShotRecord":
        d = json.loads(text)
        return cls(np.array(d["counts"]), int(d["shots"]), list(d.get("labels", [])))

    def __add__(self, other: "ShotRecord") -> "ShotRecord":
        return ShotRecord(self.counts + other.counts, self.shots + other.shots, self.labels)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_shots(
    true_populations: np.ndarray,
    m: DetectorMatrix,
    shots: int = DEFAULT_SHOTS,
    seed=None,
    ordering: QubitOrdering | None = None,
) -> ShotRecord:
    """Multinomial draw of ``shots`` outcomes from ``M @ p``."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    p = np.asarray(true_populations, dtype=float)
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"populations sum to {p.sum():.12g}, not 1")
    q = np.clip(m.apply(p), 0.0, None)
    q /= q.sum()
    counts = _rng(seed).multinomial(shots, q)
    labels = ordering.bitstrings() if ordering is not None else []
    return ShotRecord(counts, shots, labels)


def calibration_records(
    m: DetectorMatrix, shots: int = DEFAULT_SHOTS, seed=None
) -> list[ShotRecord]:
    """One record per computational basis input, sampled through the detector."""
    rng = _rng(seed)
    return [sample_shots(np.eye(m.dim)[j], m, shots, rng) for j in range(m.dim)]


def estimate_detector_matrix(calibration_shots: Sequence[ShotRecord]) -> DetectorMatrix:
    """Column j is the empirical outcome distribution for basis input j."""
    records = list(calibration_shots)
    if not records:
        raise ValueError("no calibration records")
    dim = len(records[0].counts)
    if len(records) != dim:
        raise ValueError(f"need one record per basis state ({dim}), got {len(records)}")
    for r in records:
        if r.shots <= 0 or len(r.counts) != dim:
            raise ValueError("calibration records must be non-empty and share the outcome space")
    return DetectorMatrix(np.column_stack([r.frequencies for r in records]))


def compensate(
    measured: np.ndarray, m: DetectorMatrix, tol: float = NEGATIVITY_TOLERANCE
) -> np.ndarray:
    """``M^-1 @ measured``, renormalized. Entries in (-tol, 0) are clipped to zero."""
    p = np.linalg.solve(m.matrix, np.asarray(measured, dtype=float))
    if p.min() < -tol:
        raise NegativeProbabilityError(p, tol)
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def recover_angle(populations) -> float:
    """Preparation angle from a single-qubit pair (p0, p1), or from p1 alone."""
    p = np.atleast_1d(np.asarray(populations, dtype=float))
    p1 = p[1] / p.sum() if p.size == 2 else p[0]
    if not -1e-12 <= p1 <= 1 + 1e-12:
        raise ValueError(f"excited population {p1} outside [0, 1]")
    return 2.0 * math.asin(math.sqrt(min(max(p1, 0.0), 1.0)))


def average_detector_matrices(estimates: Sequence[DetectorMatrix]) -> DetectorMatrix:
    return DetectorMatrix(np.mean([e.matrix for e in estimates], axis=0))


def detector_drift(estimates: Sequence[DetectorMatrix]) -> float:
    """Largest pairwise Frobenius distance between per-execution estimates."""
    return max(
        (float(np.linalg.norm(a.matrix - b.matrix)) for a, b in itertools.combinations(estimates, 2)),
        default=0.0,
    )


def counts_for_ordering(record: ShotRecord, ordering: QubitOrdering = DEFAULT_ORDERING) -> dict[str, int]:
    return dict(zip(ordering.bitstrings(), record.counts.tolist()))
