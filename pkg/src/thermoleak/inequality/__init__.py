"""Thermodynamic detection tests for heat leaks."""
from .fluctuation import (
    TrajectoryEnsemble,
    fluctuation_theorem,
    reduced_transfer_matrix,
    trajectory_ensemble,
)
from .majorization import MajorizationResult, lorenz_curve, majorization_test, process_majorization
from .observable import (
    DEFAULT_ZERO_FLOOR,
    ObservableB,
    build_B,
    energy_observable,
    observable_from_coefficients,
    observable_power,
)
from .passivity import (
    AlphaSweep,
    alpha_sweep,
    crossing_points,
    default_alpha_grid,
    deform_passivity,
    delta_B_alpha,
    heat_flows,
    is_passive,
    proportional,
    second_law,
)
from .resource import (
    EnergyBalance,
    RenyiParams,
    default_renyi_grid,
    energy_conservation_defect,
    renyi_divergence,
    rt_test,
    subsystem_rt_test,
)

__all__ = [name for name in dir() if not name.startswith("_")]
