"""Command-line entry point: each subcommand writes CSV data plus a JSON report."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .calibrate import calibrate, synthetic_problem
from .detector import PROFILES, NegativeProbabilityError
from .inequality import (
    AlphaSweep,
    majorization_test,
    process_majorization,
    trajectory_ensemble,
)
from .output import atomic_write
from .scenarios import (
    PRESETS,
    ConfigError,
    DetectionReport,
    ScenarioConfig,
    energy_defects,
    read_config_file,
    resolve_seed,
)
from .stats import run_protocol
from .thermal import ensemble_populations

# Framework subsets used by each figure-oriented command.
_SWEEP = ("second_law", "global_passivity", "majorization")
_PD = ("second_law", "global_passivity", "passivity_deformation")
_RT = ("global_passivity", "resource_theory")
_FT = ("fluctuation_theorem", "majorization")
_SCALE = ("second_law", "global_passivity")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", choices=sorted(PRESETS), help="start from a named preset")
    p.add_argument("--config", help="JSON file with scenario fields")
    p.add_argument("--variant", help="fig2b | fig2b-no-leak | swap | swap-no-leak | scaleup")
    p.add_argument("--theta-c", help="radians, or a multiple of pi such as 0.25pi")
    p.add_argument("--theta-h")
    p.add_argument("--theta-e")
    p.add_argument("--alpha-min", type=float)
    p.add_argument("--alpha-max", type=float)
    p.add_argument("--alpha-steps", type=int)
    p.add_argument("--mode", choices=("exact", "sampled"))
    p.add_argument("--shots", type=int)
    p.add_argument("--executions", type=int)
    p.add_argument("--noise-profile", help=f"one of {sorted(PROFILES)} or comma-separated epsilons")
    p.add_argument("--zero-floor", type=float)
    p.add_argument("--gate-perturbation", type=float, help="uniform Ry miscalibration range (rad)")
    p.add_argument("--perturbation-seed", type=int)
    p.add_argument("--seed", type=int, help="master seed (falls back to $THERMOLEAK_SEED)")
    p.add_argument("--out", default="out", help="output directory")


_FLAG_FIELDS = ("variant", "theta_c", "theta_h", "theta_e", "alpha_min", "alpha_max", "alpha_steps",
                "mode", "shots", "executions", "noise_profile", "zero_floor", "gate_perturbation",
                "perturbation_seed", "seed")


def build_config(args: argparse.Namespace, frameworks: Sequence[str], **overrides: Any) -> ScenarioConfig:
    """Preset, then config file, then explicit flags; later sources win."""
    data: dict[str, Any] = {}
    source = "<flags>"
    if args.scenario:
        data.update(PRESETS[args.scenario])
    if args.config:
        raw = read_config_file(args.config)
        ScenarioConfig.from_mapping({**data, **raw}, args.config)  # report file errors against the file
        data.update({k.replace("-", "_"): v for k, v in raw.items()})
        source = args.config
    for name in _FLAG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    if isinstance(data.get("noise_profile"), str) and "," in data["noise_profile"]:
        try:
            data["noise_profile"] = [float(x) for x in data["noise_profile"].split(",")]
        except ValueError:
            raise ConfigError(f"noise_profile: cannot parse {data['noise_profile']!r}") from None
    data["frameworks"] = list(frameworks)
    data.update(overrides)
    data["seed"] = resolve_seed(data.get("seed"))
    return ScenarioConfig.from_mapping(data, source)


def _write_sweep(out: Path, name: str, sweep: AlphaSweep, files: dict[str, str]) -> None:
    files[name] = str(atomic_write(out / f"{name}.csv", sweep.to_csv()))


def _report(out: Path, config: ScenarioConfig, verdicts: dict, files: dict, extra: dict | None = None) -> DetectionReport:
    if extra:
        verdicts = {**verdicts, **extra}
    files["report"] = str(out / "report.json")
    report = DetectionReport(config.to_dict(), verdicts, files, config.seed)
    atomic_write(out / "report.json", report.to_json() + "\n")
    return report


def cmd_sweep(args: argparse.Namespace) -> DetectionReport:
    config = build_config(args, _SWEEP)
    run = run_protocol(config, seed=config.seed)
    sweeps = run.sweeps()
    out, files = Path(args.out), {}
    _write_sweep(out, "gp_system", sweeps["gp_system"], files)
    _write_sweep(out, "gp_full", sweeps["gp_full"], files)
    tol = 1e-9 if config.mode == "exact" else 3.0 / np.sqrt(config.shots)
    maj = majorization_test(run.last.p0, run.last.pf, tol)
    files["lorenz"] = str(atomic_write(out / "lorenz.csv", maj.to_csv()))
    extra = {"majorization": {"ensemble_majorizes": maj.majorizes,
                              "touching_points": maj.touching_points(tol).tolist()}}
    return _report(out, config, run.verdicts(), files, extra)


def cmd_pd(args: argparse.Namespace) -> DetectionReport:
    config = build_config(args, _PD)
    run = run_protocol(config, seed=config.seed)
    sweeps = run.sweeps()
    out, files = Path(args.out), {}
    _write_sweep(out, "gp_system", sweeps["gp_system"], files)
    _write_sweep(out, "pd_system", sweeps["pd_system"], files)
    return _report(out, config, run.verdicts(), files)


def cmd_rt(args: argparse.Namespace) -> DetectionReport:
    config = build_config(args, _RT)
    run = run_protocol(config, seed=config.seed)
    sweeps = run.sweeps()
    out, files = Path(args.out), {}
    for name in ("rt_c", "rt_h", "gp_system"):
        _write_sweep(out, name, sweeps[name], files)
    return _report(out, config, run.verdicts(), files, {"energy": energy_defects(config)})


def cmd_ft(args: argparse.Namespace) -> DetectionReport:
    config = build_config(args, _FT)
    run = run_protocol(config, seed=config.seed)
    out, files = Path(args.out), {}
    specs = config.specs()
    sys_specs = [specs[config.ordering.index(lab)] for lab in config.system_labels()]
    traj = trajectory_ensemble(run.last.t_system, ensemble_populations(sys_specs), sys_specs)
    traj = type(traj)(traj.joint, traj.energies, config.system_labels())
    files["trajectories"] = str(atomic_write(out / "trajectories.csv", traj.to_csv()))
    tol = 1e-9 if config.mode == "exact" else 3.0 / np.sqrt(config.shots)
    proc = process_majorization(run.last.t_system, tol)
    files["process_lorenz"] = str(atomic_write(out / "process_lorenz.csv", proc.to_csv()))
    return _report(out, config, run.verdicts(), files)


def cmd_scaleup(args: argparse.Namespace) -> DetectionReport:
    sizes = args.sizes or list(range(1, 5))
    base = build_config(args, _SCALE, variant="scaleup", scaleup_variant=args.scaleup_variant)
    if base.mode != "exact":
        raise ConfigError("mode: scale-up runs support exact mode only")
    out, files = Path(args.out), {}
    per_size = {}
    for n in sizes:
        config = ScenarioConfig.from_mapping({**base.to_dict(), "scaleup_n": n})
        run = run_protocol(config, seed=config.seed)
        sweep = run.sweeps()["gp_system"]
        _write_sweep(out, f"gp_system_n{n}", sweep, files)
        neg = sweep.alphas < 0
        per_size[str(n)] = {
            "qubits": 2 * n + 1,
            "alpha_1_value": float(run.sweeps()["second_law"].values[0]),
            "alpha_1_detects": bool(run.sweeps()["second_law"].detected()[0]),
            "negative_alpha_detects": bool(np.any(sweep.detected()[neg])),
            "detecting_alphas": [round(float(a), 12) for a in sweep.detecting_alphas()],
        }
    return _report(out, base, {"scaleup": per_size}, files)


def cmd_calibrate(args: argparse.Namespace) -> dict:
    seed = resolve_seed(args.seed)
    problem, truth = synthetic_problem(
        seed=args.perturbation_seed if args.perturbation_seed is not None else seed,
        perturbation=args.gate_perturbation if args.gate_perturbation is not None else 0.3,
        shots=None if args.mode == "exact" else (args.shots or 8192),
        noise_profile=args.noise_profile or ("ideal" if args.mode == "exact" else "symmetric-0.1"),
    )
    result = calibrate(problem, restarts=args.restarts, max_evals=args.max_evals, seed=seed)
    out = Path(args.out)
    text = result.to_json()
    atomic_write(out / "calibration.json", text + "\n")
    return json.loads(text)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermoleak", description="Heat-leak detection experiments on simulated qubits.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, helptext in (
        ("sweep", cmd_sweep, "global passivity sweeps on the system and the full register"),
        ("pd", cmd_pd, "global passivity against the deformed (H_c+H_h) family"),
        ("rt", cmd_rt, "Renyi resource-theory sweeps and energy bookkeeping"),
        ("ft", cmd_ft, "integral fluctuation theorem and trajectory table"),
        ("scaleup", cmd_scaleup, "larger registers, one CSV per size"),
    ):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.set_defaults(func=fn)
        if name == "scaleup":
            p.add_argument("--sizes", type=int, nargs="+", help="cold/hot qubits per side (default 1 2 3 4)")
            p.add_argument("--scaleup-variant", choices=("chain", "swap"), default="chain")
    p = sub.add_parser("calibrate", help="fit Ry corrections to a synthetic miscalibrated circuit")
    p.add_argument("--mode", choices=("exact", "sampled"), default="sampled")
    p.add_argument("--shots", type=int)
    p.add_argument("--noise-profile", choices=sorted(PROFILES))
    p.add_argument("--gate-perturbation", type=float, help="range of the hidden Ry perturbations (rad)")
    p.add_argument("--perturbation-seed", type=int, help="seed for the hidden perturbation and sampling")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-evals", type=int, default=2000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        result = args.func(args)
    except ConfigError as exc:
        print(f"thermoleak: configuration error: {exc}", file=sys.stderr)
        return 2
    except NegativeProbabilityError as exc:
        print(f"thermoleak: compensation failed: {exc}", file=sys.stderr)
        return 1
    text = result.to_json() if isinstance(result, DetectionReport) else json.dumps(result, indent=2)
    print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
