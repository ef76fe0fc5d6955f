import json
import math

import numpy as np
import pytest

from thermoleak.calibrate import (
    CalibrationProblem,
    calibrate,
    default_slots,
    measure_transfer_matrix,
    objective,
    parameterized_circuit,
    synthetic_problem,
)
from thermoleak.detector import DetectorMatrix, build_detector_matrix, get_profile
from thermoleak.qcore import Circuit, assemble_unitary, is_permutation, leak_circuit, transfer_matrix


def ideal_problem(t_exp=None, m=None):
    base = leak_circuit()
    m = m or DetectorMatrix.identity(8)
    t = m.matrix @ transfer_matrix(assemble_unitary(base)) if t_exp is None else t_exp
    return CalibrationProblem(base, default_slots(base), t, m)


def test_default_slots_count_and_placement():
    slots = default_slots(leak_circuit())
    assert len(slots) == 12
    assert slots[:4] == ((0, 1), (0, 2), (1, 1), (1, 2))


def test_parameterized_zero_angles_reproduce_base():
    base = leak_circuit()
    c = parameterized_circuit(base, default_slots(base), np.zeros(12))
    assert np.allclose(assemble_unitary(c), assemble_unitary(base))
    with pytest.raises(ValueError):
        parameterized_circuit(base, default_slots(base), np.zeros(3))


def test_objective_examples():
    p = ideal_problem()
    assert objective(p, np.zeros(12)) == pytest.approx(0, abs=1e-14)
    m = build_detector_matrix(get_profile("symmetric-0.1"))
    pm = ideal_problem(m=m)
    assert objective(pm, np.zeros(12)) == pytest.approx(0, abs=1e-14)
    perturbed, truth = synthetic_problem(seed=3)
    assert objective(perturbed, np.zeros(12)) > 1e-3
    assert objective(perturbed, truth) == pytest.approx(0, abs=1e-12)


def test_objective_is_2pi_periodic():
    prob, truth = synthetic_problem(seed=5)
    shifted = truth.copy()
    shifted[4] += 2 * math.pi
    assert objective(prob, shifted) == pytest.approx(objective(prob, truth), abs=1e-12)


def test_problem_validation():
    base = leak_circuit()
    with pytest.raises(ValueError):
        CalibrationProblem(base, ((9, 0),), np.eye(8), DetectorMatrix.identity(8))
    with pytest.raises(ValueError):
        CalibrationProblem(base, ((0, 0),), np.eye(4), DetectorMatrix.identity(8))


def test_measure_transfer_matrix():
    ident = Circuit(3)
    assert np.allclose(measure_transfer_matrix(ident, DetectorMatrix.identity(8), None), np.eye(8))
    t = measure_transfer_matrix(leak_circuit(), DetectorMatrix.identity(8), 4096, seed=1)
    assert is_permutation(np.round(t))  # noiseless readout: every column is a delta
    m = build_detector_matrix(get_profile("tenerife"))
    avg = np.mean([measure_transfer_matrix(leak_circuit(), m, 4096, seed=s) for s in range(20)], axis=0)
    expected = m.matrix @ transfer_matrix(assemble_unitary(leak_circuit()))
    assert np.abs(avg - expected).max() < 0.01
    with pytest.raises(ValueError):
        measure_transfer_matrix(ident, DetectorMatrix.identity(8), 0)


def test_never_worse_than_start_and_json():
    prob, _ = synthetic_problem(seed=2, shots=2048, noise_profile="symmetric-0.1")
    r = calibrate(prob, restarts=2, max_evals=200, seed=0)
    assert r.err_final <= r.err_initial
    d = json.loads(r.to_json())
    assert {"angles", "err_initial", "err_final", "relative_err_initial", "relative_err_final"} <= set(d)
    assert len(d["angles"]) == 12


def test_zero_perturbation_is_stagnant_at_floor():
    prob, _ = synthetic_problem(seed=0, perturbation=0.0)
    r = calibrate(prob, restarts=2, max_evals=100, seed=0)
    assert r.err_initial == pytest.approx(0, abs=1e-14)
    assert r.stagnant and r.err_final == r.err_initial


def test_noiseless_recovery_small_perturbation():
    """Small perturbations: transfer matrices match and the angles come back (up to gauge)."""
    prob, truth = synthetic_problem(seed=0)
    r = calibrate(prob, seed=0)
    assert r.err_final < 1e-6
    t_fit = transfer_matrix(assemble_unitary(parameterized_circuit(prob.base_circuit, prob.correction_slots, r.angles)))
    assert np.abs(t_fit - prob.t_exp).max() < 1e-6


def test_bad_budget():
    prob, _ = synthetic_problem(seed=0)
    with pytest.raises(ValueError):
        calibrate(prob, restarts=0)
