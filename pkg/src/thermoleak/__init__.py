"""Simulated heat-leak detection on few-qubit circuits.

Submodules: ``qcore`` (circuits), ``thermal`` (ensembles), ``detector``
(readout noise), ``inequality`` (detection tests), ``calibrate``
(gate-error fitting), ``stats`` (execution protocol) and ``cli``.
"""
from .qcore import Circuit, Gate, QubitOrdering, leak_circuit, scaleup_circuit, swap_leak_circuit
from .scenarios import ScenarioConfig
from .thermal import DiagonalEnsemble, QubitSpec

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "DiagonalEnsemble",
    "Gate",
    "QubitOrdering",
    "QubitSpec",
    "ScenarioConfig",
    "leak_circuit",
    "scaleup_circuit",
    "swap_leak_circuit",
]
