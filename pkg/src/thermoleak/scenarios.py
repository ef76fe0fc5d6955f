"""Scenario configuration and the exact and sampled detection pipelines."""
from __future__ import annotations

import json
import math
import os
import re
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Mapping

import numpy as np

from .calibrate import default_slots, parameterized_circuit
from .detector import (
    DEFAULT_SHOTS,
    DetectorMatrix,
    PROFILES,
    ReadoutNoiseProfile,
    build_detector_matrix,
    calibration_records,
    compensate,
    estimate_detector_matrix,
    recover_angle,
    sample_shots,
)
from .inequality import (
    AlphaSweep,
    build_B,
    default_alpha_grid,
    default_renyi_grid,
    delta_B_alpha,
    energy_observable,
    fluctuation_theorem,
    heat_flows,
    majorization_test,
    process_majorization,
    reduced_transfer_matrix,
    second_law,
    subsystem_rt_test,
    trajectory_ensemble,
)
from .inequality.observable import DEFAULT_ZERO_FLOOR
from .qcore import (
    Circuit,
    QubitOrdering,
    assemble_unitary,
    reduced_populations,
    scaleup_circuit,
    transfer_matrix,
)
from .thermal import QubitSpec, coherent_preparation_state, ensemble_populations

SEED_ENV = "THERMOLEAK_SEED"
VARIANTS = ("fig2b", "fig2b-no-leak", "swap", "swap-no-leak", "scaleup")
FRAMEWORKS = ("second_law", "global_passivity", "passivity_deformation", "resource_theory",
              "fluctuation_theorem", "majorization")


class ConfigError(ValueError):
    """A scenario field is missing, unknown or malformed."""


_ANGLE_RE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*$", re.IGNORECASE)


def parse_angle(value: Any) -> float:
    """Radians from a number or a multiple of pi such as ``"0.25pi"``, ``"pi"`` or ``"pi/4"``."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"angle must be a number or a string like '0.25pi', got {value!r}")
    text = value.strip()
    frac = re.match(r"^\s*pi\s*/\s*(\d+(?:\.\d*)?)\s*$", text, re.IGNORECASE)
    if frac:
        return math.pi / float(frac.group(1))
    m = _ANGLE_RE.match(text)
    if m:
        coef = m.group(1)
        return (float(coef) if coef not in (None, "", "+", "-") else (-1.0 if coef == "-" else 1.0)) * math.pi
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse angle {value!r}") from None


@dataclass
class ScenarioConfig:
    variant: str = "fig2b"
    theta_c: float = math.pi / 4
    theta_h: float = 0.4 * math.pi
    theta_e: float = math.pi / 4
    scaleup_n: int = 1
    scaleup_variant: str = "chain"
    noise_profile: Any = "tenerife"
    shots: int = DEFAULT_SHOTS
    executions: int = 20
    alpha_min: float = -2.0
    alpha_max: float = 2.0
    alpha_steps: int = 81
    renyi_max: float = 3.0
    renyi_steps: int = 60
    seed: int | None = None
    mode: str = "exact"
    zero_floor: float = DEFAULT_ZERO_FLOOR
    gate_perturbation: float = 0.0
    perturbation_seed: int = 0
    frameworks: tuple[str, ...] = FRAMEWORKS

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("theta_c", "theta_h", "theta_e"):
            setattr(self, name, parse_angle(getattr(self, name)))
            if not 0 < getattr(self, name) < math.pi:
                raise ConfigError(f"{name}: must lie strictly between 0 and pi")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant: {self.variant!r} is not one of {VARIANTS}")
        if self.scaleup_variant not in ("chain", "swap"):
            raise ConfigError(f"scaleup_variant: {self.scaleup_variant!r} is not 'chain' or 'swap'")
        if not 1 <= int(self.scaleup_n) <= 5:
            raise ConfigError("scaleup_n: must be in 1..5")
        if self.mode not in ("exact", "sampled"):
            raise ConfigError(f"mode: {self.mode!r} is not 'exact' or 'sampled'")
        for name in ("shots", "executions", "alpha_steps", "renyi_steps"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name}: must be a positive integer")
        if self.mode == "sampled" and self.executions < 2:
            raise ConfigError("executions: a confidence interval needs at least 2")
        if self.alpha_min >= self.alpha_max:
            raise ConfigError("alpha_min: must be below alpha_max")
        if self.zero_floor < 0:
            raise ConfigError("zero_floor: must be nonnegative")
        unknown = set(self.frameworks) - set(FRAMEWORKS)
        if unknown:
            raise ConfigError(f"frameworks: unknown entries {sorted(unknown)}")
        self.frameworks = tuple(self.frameworks)
        self.noise()  # fail early on a bad profile

    # ---- derived objects -------------------------------------------------
    def circuit(self) -> Circuit:
        n = int(self.scaleup_n) if self.variant == "scaleup" else 1
        kind = self.scaleup_variant if self.variant == "scaleup" else (
            "swap" if self.variant.startswith("swap") else "chain")
        base = scaleup_circuit(n, kind, leak=not self.variant.endswith("no-leak"))
        if self.gate_perturbation > 0:
            slots = default_slots(base)
            rng = np.random.default_rng(self.perturbation_seed)
            angles = rng.uniform(-self.gate_perturbation, self.gate_perturbation, len(slots))
            return parameterized_circuit(base, slots, angles)
        return base

    @property
    def ordering(self) -> QubitOrdering:
        return self.circuit().ordering

    def specs(self) -> tuple[QubitSpec, ...]:
        theta = {"c": self.theta_c, "h": self.theta_h, "e": self.theta_e}
        return tuple(QubitSpec(theta[lab[0]]) for lab in self.ordering.labels)

    def alpha_grid(self) -> np.ndarray:
        return default_alpha_grid(self.alpha_min, self.alpha_max, int(self.alpha_steps))

    def renyi_grid(self) -> np.ndarray:
        return default_renyi_grid(self.renyi_max, int(self.renyi_steps))

    def noise(self) -> ReadoutNoiseProfile:
        n = len(self.ordering)
        spec = self.noise_profile
        if isinstance(spec, str):
            if spec not in PROFILES:
                raise ConfigError(f"noise_profile: unknown name {spec!r}; choose from {sorted(PROFILES)}")
            return PROFILES[spec].resized(n)
        try:
            items = list(spec)
            if all(isinstance(x, (int, float)) for x in items):
                return ReadoutNoiseProfile.symmetric(items, "custom").resized(n)
            return ReadoutNoiseProfile(tuple(tuple(x) for x in items), "custom").resized(n)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"noise_profile: {exc}") from None

    def system_labels(self) -> tuple[str, ...]:
        return tuple(lab for lab in self.ordering.labels if lab != "e")

    # ---- serialization ---------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["frameworks"] = list(self.frameworks)
        return d

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], source: str = "<config>") -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        clean = {}
        for key, value in data.items():
            name = key.replace("-", "_")
            if name not in known:
                raise ConfigError(f"{source}: unknown field {key!r}")
            clean[name] = value
        int_fields = {"scaleup_n", "shots", "executions", "alpha_steps", "renyi_steps", "perturbation_seed"}
        float_fields = {"alpha_min", "alpha_max", "renyi_max", "zero_floor", "gate_perturbation"}
        for name, value in clean.items():
            try:
                if name in int_fields:
                    if isinstance(value, float) and not value.is_integer():
                        raise ValueError
                    clean[name] = int(value)
                elif name in float_fields:
                    clean[name] = float(value)
                elif name == "seed" and value is not None:
                    clean[name] = int(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{source}: field {name!r} has invalid value {value!r}") from None
        try:
            return cls(**clean)
        except ConfigError as exc:
            raise ConfigError(f"{source}: {exc}") from None

    @classmethod
    def from_json_file(cls, path: str) -> "ScenarioConfig":
        return cls.from_mapping(read_config_file(path), path)


def read_config_file(path: str) -> dict[str, Any]:
    """Raw JSON mapping; syntax errors are reported as ``path:line:col``."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def resolve_seed(seed: int | None) -> int:
    """Explicit seed, else ``$THERMOLEAK_SEED``, else fresh entropy (returned so it can be logged)."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None
    return int(np.random.SeedSequence().entropy % (2 ** 63))


PRESETS: dict[str, dict[str, Any]] = {
    "fig1": {"variant": "fig2b", "theta_c": "0.25pi", "theta_h": "0.4pi", "theta_e": "0.25pi"},
    "fig1-no-leak": {"variant": "fig2b-no-leak", "theta_c": "0.25pi", "theta_h": "0.4pi", "theta_e": "0.25pi"},
    "fig2": {"variant": "swap", "theta_c": "0.25pi", "theta_h": "0.4pi", "theta_e": "0.35pi"},
    "fig3": {"variant": "fig2b", "theta_c": "0.25pi", "theta_h": "0.5pi", "theta_e": "0.25pi"},
    "fig3-no-leak": {"variant": "fig2b-no-leak", "theta_c": "0.25pi", "theta_h": "0.5pi", "theta_e": "0.25pi"},
    "fig5-chain": {"variant": "scaleup", "scaleup_variant": "chain", "theta_c": "0.25pi",
                   "theta_h": "0.4pi", "theta_e": "0.05pi"},
    "fig5-swap": {"variant": "scaleup", "scaleup_variant": "swap", "theta_c": "0.25pi",
                  "theta_h": "0.4pi", "theta_e": "0.35pi"},
}


# ---------------------------------------------------------------------------
# Pipelines. Both return populations on the full register plus the c-h
# (system) transfer matrix used for trajectory statistics.


@dataclass
class PipelineData:
    p0: np.ndarray
    pf: np.ndarray
    t_system: np.ndarray
    detector_estimate: DetectorMatrix | None = None


def exact_data(config: ScenarioConfig) -> PipelineData:
    """Infinite shots, perfect compensation: ``pf = T p0`` exactly."""
    specs = config.specs()
    t = transfer_matrix(assemble_unitary(config.circuit()))
    p0 = ensemble_populations(specs)
    return PipelineData(p0, t @ p0, _system_transfer(config, t))


def _system_transfer(config: ScenarioConfig, t_full: np.ndarray) -> np.ndarray:
    ordering = config.ordering
    env = [lab for lab in ordering.labels if lab not in config.system_labels()]
    specs = config.specs()
    env_pop = ensemble_populations([specs[ordering.index(lab)] for lab in env])
    return reduced_transfer_matrix(t_full, env_pop, config.system_labels(), ordering)


def statistical_tolerance(shots: int) -> float:
    """Negativity allowed after inversion: five binomial deviations at p = 1/2."""
    return 2.5 / math.sqrt(shots)


def _invert_columns(t_meas: np.ndarray, m: DetectorMatrix) -> np.ndarray:
    # Plain linear inversion, negatives kept: the trajectory average is linear
    # in T, so clipping would bias it while raw inversion does not.
    return np.linalg.solve(m.matrix, t_meas)


def sampled_data(config: ScenarioConfig, rng: np.random.Generator, need_transfer: bool = True) -> PipelineData:
    """One execution: fresh detector calibration, every sign pattern sampled before and after."""
    circuit = config.circuit()
    specs = config.specs()
    n = circuit.qubit_count
    u = assemble_unitary(circuit)
    m_true = build_detector_matrix(config.noise())
    m_est = estimate_detector_matrix(calibration_records(m_true, config.shots, rng))

    counts0 = np.zeros(2 ** n, dtype=np.int64)
    countsf = np.zeros(2 ** n, dtype=np.int64)
    for signs in _sign_patterns(n):
        psi = coherent_preparation_state(signs, specs)
        counts0 += sample_shots(np.abs(psi) ** 2, m_true, config.shots, rng).counts
        countsf += sample_shots(np.abs(u @ psi) ** 2, m_true, config.shots, rng).counts
    tol = statistical_tolerance(int(counts0.sum()))
    p0 = compensate(counts0 / counts0.sum(), m_est, tol)
    pf = compensate(countsf / countsf.sum(), m_est, tol)

    t_sys = np.full((1, 1), np.nan)
    if need_transfer:
        t = transfer_matrix(u)
        t_meas = np.column_stack(
            [sample_shots(t[:, j], m_true, config.shots, rng).frequencies for j in range(2 ** n)]
        )
        t_sys = _system_transfer(config, _invert_columns(t_meas, m_est))
    return PipelineData(p0, pf, t_sys, m_est)


def _sign_patterns(n: int):
    for k in range(2 ** n):
        yield tuple(-1 if (k >> q) & 1 else 1 for q in range(n))


# ---------------------------------------------------------------------------
# Statistics evaluated on one data set.


def evaluate(config: ScenarioConfig, data: PipelineData) -> dict[str, np.ndarray]:
    """Every requested statistic as an array (scalars become length-1 arrays)."""
    specs = config.specs()
    ordering = config.ordering
    system = config.system_labels()
    grid = config.alpha_grid()
    wanted = set(config.frameworks)
    out: dict[str, np.ndarray] = {}

    def sweep(obs):
        return np.array([delta_B_alpha(obs, data.p0, data.pf, a, config.zero_floor) for a in grid])

    if "global_passivity" in wanted:
        out["gp_system"] = sweep(build_B(specs, system, ordering))
        out["gp_full"] = sweep(build_B(specs, ordering.labels, ordering))
    if "second_law" in wanted:
        sys_specs = [specs[ordering.index(lab)] for lab in system]
        out["second_law"] = np.array([second_law(sys_specs, heat_flows(specs, data.p0, data.pf, system, ordering))])
    if "passivity_deformation" in wanted:
        out["pd_system"] = sweep(energy_observable(specs, system, ordering))
    if "resource_theory" in wanted and system == ("c", "h"):
        rgrid = config.renyi_grid()
        out["rt_c"] = subsystem_rt_test(specs, data.p0, data.pf, "c", "h", ordering, rgrid).values
        out["rt_h"] = subsystem_rt_test(specs, data.p0, data.pf, "h", "c", ordering, rgrid).values
    if "fluctuation_theorem" in wanted and data.t_system.shape[0] > 1:
        sys_specs = [specs[ordering.index(lab)] for lab in system]
        p0_sys = reduced_populations(data.p0, system, ordering) if config.mode == "sampled" else \
            ensemble_populations(sys_specs)
        traj = trajectory_ensemble(data.t_system, p0_sys / p0_sys.sum(), sys_specs)
        out["ft"] = np.array([fluctuation_theorem(traj, [s.beta for s in sys_specs])])
    return out


@dataclass
class DetectionReport:
    scenario: dict[str, Any]
    verdicts: dict[str, Any]
    files: dict[str, str] = field(default_factory=dict)
    seed: int | None = None
    schema: int = 1

    def to_json(self) -> str:
        return json.dumps(
            {"schema": self.schema, "scenario": self.scenario, "seed": self.seed,
             "verdicts": self.verdicts, "files": self.files},
            indent=2,
            sort_keys=False,
            default=_json_default,
        )


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _sweep_verdict(sweep: AlphaSweep) -> dict[str, Any]:
    hits = sweep.detecting_alphas()
    return {"detected": bool(hits.size), "detecting_alphas": [round(float(a), 12) for a in hits],
            "min_value": float(np.nanmin(sweep.values))}


FT_TOLERANCE = 1e-9


def verdicts(config: ScenarioConfig, sweeps: dict[str, AlphaSweep], data: PipelineData,
             ft_halfwidth: float | None = None) -> dict[str, Any]:
    """Turn sweeps (with or without confidence bands) into per-framework verdicts."""
    out: dict[str, Any] = {}
    if "second_law" in sweeps:
        s = sweeps["second_law"]
        out["second_law"] = {"value": float(s.values[0]), "detected": bool(s.detected()[0])}
    if "gp_system" in sweeps:
        out["global_passivity"] = {"system": _sweep_verdict(sweeps["gp_system"]),
                                   "full": _sweep_verdict(sweeps["gp_full"])}
    if "pd_system" in sweeps:
        out["passivity_deformation"] = _sweep_verdict(sweeps["pd_system"])
    if "rt_c" in sweeps:
        out["resource_theory"] = {"c": _sweep_verdict(sweeps["rt_c"]), "h": _sweep_verdict(sweeps["rt_h"])}
    if "ft" in sweeps:
        value = float(sweeps["ft"].values[0])
        tol = FT_TOLERANCE if ft_halfwidth is None else ft_halfwidth
        out["fluctuation_theorem"] = {"value": value, "deviation": abs(value - 1.0),
                                      "detected": bool(abs(value - 1.0) > tol)}
    if "majorization" in config.frameworks:
        tol = 1e-9 if config.mode == "exact" else 3.0 / math.sqrt(config.shots)
        full = majorization_test(data.p0, data.pf, tol)
        out["majorization"] = {"ensemble_majorizes": full.majorizes}
        if data.t_system.shape[0] > 1:
            proc = process_majorization(data.t_system, tol)
            out["majorization"]["process_majorizes"] = proc.majorizes
            out["majorization"]["detected"] = not proc.majorizes
    return out


def energy_defects(config: ScenarioConfig) -> dict[str, Any]:
    """Energy bookkeeping for the whole circuit and for its system-interaction stage.

    The leak gates at the front of every variant are the only place the
    environment is touched; what follows acts on the system alone. The
    interaction stage is evaluated on the state the leak gates hand over.
    """
    from .inequality import energy_conservation_defect
    from .qcore import LEAK_GATE_COUNT

    specs = config.specs()
    ordering = config.ordering
    circuit = config.circuit()
    partition = [["e"], list(config.system_labels())]
    p0 = ensemble_populations(specs)
    whole = energy_conservation_defect(
        specs, p0, transfer_matrix(assemble_unitary(circuit)) @ p0, partition, ordering)
    leaky = not config.variant.endswith("no-leak") and config.gate_perturbation == 0
    split = LEAK_GATE_COUNT if leaky else 0
    head = Circuit(circuit.qubit_count, circuit.gates[:split], ordering)
    tail = Circuit(circuit.qubit_count, circuit.gates[split:], ordering)
    p_mid = transfer_matrix(assemble_unitary(head)) @ p0
    stage = energy_conservation_defect(
        specs, p_mid, transfer_matrix(assemble_unitary(tail)) @ p_mid, partition, ordering)
    return {
        "circuit": {"defect": whole.defect, "absolute": whole.absolute, "per_group": whole.per_group},
        "interaction_stage": {"defect": stage.defect, "absolute": stage.absolute, "per_group": stage.per_group},
    }


def preparation_angles(config: ScenarioConfig, seed=None) -> dict[str, dict[str, float]]:
    """Read back the preparation angles from sampled ensemble data, before and after ``M^-1``.

    Every sign pattern gets ``config.shots`` shots; a fresh detector
    calibration is sampled for the compensation.
    """
    rng = np.random.default_rng(seed)
    specs = config.specs()
    ordering = config.ordering
    n = len(ordering)
    m_true = build_detector_matrix(config.noise())
    m_est = estimate_detector_matrix(calibration_records(m_true, config.shots, rng))
    counts = np.zeros(2 ** n, dtype=np.int64)
    for signs in _sign_patterns(n):
        psi = coherent_preparation_state(signs, specs)
        counts += sample_shots(np.abs(psi) ** 2, m_true, config.shots, rng).counts
    raw = counts / counts.sum()
    fixed = compensate(raw, m_est, statistical_tolerance(int(counts.sum())))
    out = {}
    for lab, spec in zip(ordering.labels, specs):
        out[lab] = {
            "theory": spec.theta,
            "uncompensated": recover_angle(reduced_populations(raw, [lab], ordering)),
            "compensated": recover_angle(reduced_populations(fixed, [lab], ordering)),
        }
    return out
