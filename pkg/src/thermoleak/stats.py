"""Repeated-execution protocol and 99% confidence intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detector import DEFAULT_SHOTS
from .inequality import AlphaSweep
from .scenarios import PipelineData, ScenarioConfig, evaluate, exact_data, sampled_data, verdicts

Z_99 = 2.576  # two-sided 99% normal quantile, as quoted for the band


@dataclass(frozen=True)
class ExecutionProtocol:
    executions: int = 20
    shots: int = DEFAULT_SHOTS
    preparations: int = 8

    def __post_init__(self):
        if min(self.executions, self.shots, self.preparations) < 1:
            raise ValueError("protocol sizes must be positive")


@dataclass(frozen=True)
class ConfidenceInterval:
    mean: float
    halfwidth: float
    level: float = 0.99

    @property
    def upper(self) -> float:
        return self.mean + self.halfwidth

    @property
    def lower(self) -> float:
        return self.mean - self.halfwidth

    @property
    def detected(self) -> bool:
        """The whole band sits below zero."""
        return self.upper < 0


def confidence_interval(samples) -> ConfidenceInterval:
    """Mean and ``2.576 * s / sqrt(N)`` with the unbiased sample deviation ``s``."""
    v = np.asarray(samples, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("a confidence interval needs at least two samples")
    mean, hw = confidence_bands(v[:, None])
    return ConfidenceInterval(float(mean[0]), float(hw[0]))


def confidence_bands(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column-wise mean and halfwidth of an ``(N, k)`` sample matrix."""
    s = np.asarray(samples, dtype=float)
    if s.ndim != 2 or s.shape[0] < 2:
        raise ValueError("need an (N, k) sample matrix with N >= 2")
    hw = Z_99 * s.std(axis=0, ddof=1) / math.sqrt(s.shape[0])
    constant = np.ptp(s, axis=0) == 0
    # identical samples: report the value itself and an exact zero width
    return np.where(constant, s[0], s.mean(axis=0)), np.where(constant, 0.0, hw)


@dataclass
class ProtocolRun:
    """Per-execution samples ``samples[name][i, k]`` plus the data of the last execution."""

    config: ScenarioConfig
    samples: dict[str, np.ndarray]
    last: PipelineData
    seed: int | None

    def sweeps(self) -> dict[str, AlphaSweep]:
        out = {}
        for name, s in self.samples.items():
            grid = _grid_for(self.config, name, s.shape[1])
            if s.shape[0] >= 2:
                mean, hw = confidence_bands(s)
                out[name] = AlphaSweep(grid, mean, hw, name)
            else:
                out[name] = AlphaSweep(grid, s[0], None, name)
        return out

    def verdicts(self) -> dict:
        sw = self.sweeps()
        ft_hw = None
        if "ft" in sw and sw["ft"].ci_halfwidth is not None:
            ft_hw = float(sw["ft"].ci_halfwidth[0])
        return verdicts(self.config, sw, self.last, ft_hw)


def _grid_for(config: ScenarioConfig, name: str, k: int) -> np.ndarray:
    if name.startswith("rt_"):
        return config.renyi_grid()
    if k == 1:
        return np.array([1.0])
    return config.alpha_grid()


def execution_seeds(seed: int | None, executions: int) -> list[np.random.SeedSequence]:
    """Independent child streams of one master seed."""
    return np.random.SeedSequence(seed).spawn(executions)


def run_protocol(config: ScenarioConfig, protocol: ExecutionProtocol | None = None, seed: int | None = None) -> ProtocolRun:
    """``N`` independent simulated executions of the scenario.

    In exact mode a single noiseless data set stands for every execution, so
    all samples coincide and the band collapses onto the exact statistic.
    Sampled mode re-estimates the detector for each execution and may raise
    :class:`~thermoleak.detector.NegativeProbabilityError`.
    """
    protocol = protocol or ExecutionProtocol(config.executions, config.shots, 2 ** len(config.ordering))
    if protocol.shots != config.shots:
        config = ScenarioConfig(**{**config.to_dict(), "shots": protocol.shots})
    if config.mode == "exact":
        data = exact_data(config)
        stats = evaluate(config, data)
        samples = {k: np.tile(v, (protocol.executions, 1)) for k, v in stats.items()}
        return ProtocolRun(config, samples, data, seed)

    need_t = "fluctuation_theorem" in config.frameworks or "majorization" in config.frameworks
    rows: dict[str, list[np.ndarray]] = {}
    data = None
    for ss in execution_seeds(seed, protocol.executions):
        data = sampled_data(config, np.random.default_rng(ss), need_t)
        for k, v in evaluate(config, data).items():
            rows.setdefault(k, []).append(v)
    return ProtocolRun(config, {k: np.vstack(v) for k, v in rows.items()}, data, seed)
