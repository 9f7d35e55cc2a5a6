"""Command-line front end.

Usage::

    landau-phase {phase,trajectory,wavefunction,validate,suite} [options]

Settings come from built-in defaults, then an optional JSON file given by
``--config``, then individual flags; later sources win.

State JSON schema (``--state`` or the ``state`` key of the config file)::

    {"kind": "number",           "n": 2, "n_prime": 0}
    {"kind": "superposition",    "terms": [[0, 0, [1, 0]], [1, 0, [1, 0]]]}
    {"kind": "displaced_number", "n": 1, "alpha": [0.8, 0.0]}
    {"kind": "coherent",         "alpha": [1.0, 0.0], "b_shift": [0.5, 0.5]}
    {"kind": "random",           "seed": 7, "n_max": 10}

Complex numbers are ``[re, im]`` pairs; a bare real number is also
accepted.  ``b_shift`` is optional for every kind and displaces the
guiding-center mode.  Superposition weights are normalized automatically.

Config file keys: ``state``, ``epsilon``, ``omega_B``, ``flux_unit``,
``nmax_a``, ``nmax_b``, ``grid`` (``"NXxNY"``), ``extent``, ``steps``,
``out``, ``format``, ``seed``, ``units``, ``samples``, ``dump_every``,
``dump_prefix``.

Exit codes: 0 success, 1 an invariant or validation check failed,
2 bad configuration, 3 numerical failure (truncation or boundary).
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .dynamics import center_trajectory, fit_circle, phase_report
from .errors import ConfigError, LandauPhaseError, ValidationFailure
from .fock import FockTruncation, PhysicalParams
from .oracle import PropagatorConfig, cross_validate
from .realspace import Grid, synthesize_state
from .states import StateSpec, adequacy_requirement, make_state

COMMANDS = ("phase", "trajectory", "wavefunction", "validate", "suite")
DEFAULT_STATE = {"kind": "coherent", "alpha": [1.0, 0.0]}
DEFAULT_NMAX_A = 32
DEFAULT_NMAX_B = 8
CONFIG_KEYS = {
    "state", "epsilon", "omega_B", "flux_unit", "nmax_a", "nmax_b", "grid", "extent",
    "steps", "out", "format", "seed", "units", "samples", "dump_every", "dump_prefix",
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    state: StateSpec
    params: PhysicalParams
    trunc: FockTruncation
    grid: Grid
    steps: int = 2048
    samples: int = 65
    out: str | None = None
    format: str = "json"
    units: str = "natural"
    seed: int = 0
    dump_every: int = 0
    dump_prefix: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        if self.units not in ("natural", "physical"):
            raise ConfigError(f"units must be natural or physical, got {self.units!r}")
        if self.out is not None:
            parent = Path(self.out).resolve().parent
            if not parent.is_dir() or not os.access(parent, os.W_OK):
                raise ConfigError(f"output directory {parent} is missing or not writable")


def parse_grid(text):
    try:
        nx, ny = (int(v) for v in str(text).lower().split("x"))
    except ValueError as exc:
        raise ConfigError(f"grid must look like 128x128, got {text!r}") from exc
    return nx, ny


def _epsilon(text):
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("epsilon must be +1 or -1") from exc
    if value not in (1, -1):
        raise argparse.ArgumentTypeError("epsilon must be +1 or -1")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default settings")
    common.add_argument("--state", help="state spec as JSON")
    common.add_argument("--nmax-a", type=int, dest="nmax_a", help="highest Landau level kept")
    common.add_argument("--nmax-b", type=int, dest="nmax_b", help="highest guiding-center level kept")
    common.add_argument("--epsilon", type=_epsilon, help="sign of the charge, +1 or -1")
    common.add_argument("--grid", help="grid points as NXxNY, powers of two")
    common.add_argument("--extent", type=float, help="grid half-width in both directions")
    common.add_argument("--steps", type=int, help="propagator steps per cycle")
    common.add_argument("--out", help="output path")
    common.add_argument("--format", choices=("json", "csv"), help="stdout format")
    common.add_argument("--seed", type=int, help="seed for random states and the suite")
    common.add_argument(
        "--units", choices=("natural", "physical"), help="report flux in natural units or flux_unit"
    )

    parser = argparse.ArgumentParser(
        prog="landau-phase",
        description="Geometric phases of Landau-level wave packets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "phase": "cycle phases and flux decomposition as JSON",
        "trajectory": "packet-center samples as CSV plus a circle fit",
        "wavefunction": "real-space wave function (LPGF) and density CSV",
        "validate": "compare the analytic engine with the grid propagator",
        "suite": "run the invariant suite and print a pass/fail table",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def _highest_b_level(spec):
    if spec.kind == "number":
        return spec.n_prime
    if spec.kind == "superposition":
        return max(m for _, m, _ in spec.terms)
    return 0


def _auto_truncation(spec, nmax_a, nmax_b):
    """Fill in missing cutoffs so the requested state fits."""
    if nmax_a is None:
        if spec.kind in ("displaced_number", "coherent"):
            need = adequacy_requirement(spec.n if spec.kind == "displaced_number" else 0, spec.alpha)
        elif spec.kind == "number":
            need = spec.n
        elif spec.kind == "superposition":
            need = max(n for n, _, _ in spec.terms)
        else:
            need = 0
        nmax_a = max(DEFAULT_NMAX_A, math.ceil(need))
    if nmax_b is None:
        top = _highest_b_level(spec)
        need = adequacy_requirement(top, spec.b_shift) if spec.b_shift != 0 else top
        nmax_b = max(DEFAULT_NMAX_B, math.ceil(need))
    return FockTruncation(nmax_a, nmax_b)


def resolve_config(args):
    """Merge defaults, config file and flags into a RunConfig."""
    settings = {}
    if args.config:
        settings.update(_load_config_file(args.config))
    for key in ("nmax_a", "nmax_b", "epsilon", "grid", "extent", "steps", "out", "format",
                "seed", "units"):
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    if args.state is not None:
        try:
            settings["state"] = json.loads(args.state)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--state is not valid JSON: {exc}") from exc

    state_dict = dict(settings.get("state", DEFAULT_STATE))
    seed = settings.get("seed")
    if seed is not None and state_dict.get("kind") == "random":
        state_dict["seed"] = seed
    spec = StateSpec.from_dict(state_dict)

    try:
        params = PhysicalParams(
            epsilon=int(settings.get("epsilon", 1)),
            omega_B=float(settings.get("omega_B", 1.0)),
            flux_unit=float(settings.get("flux_unit", 1.0)),
        )
        trunc = _auto_truncation(spec, settings.get("nmax_a"), settings.get("nmax_b"))
        command = args.command
        default_n = 256 if command == "wavefunction" else 128
        nx, ny = parse_grid(settings.get("grid", f"{default_n}x{default_n}"))
        extent = float(settings.get("extent", 8.0))
        return RunConfig(
            command=command,
            state=spec,
            params=params,
            trunc=trunc,
            grid=Grid(nx, ny, extent, extent),
            steps=int(settings.get("steps", 2048)),
            samples=int(settings.get("samples", 65)),
            out=settings.get("out"),
            format=settings.get("format", "json"),
            units=settings.get("units", "natural"),
            seed=int(seed) if seed is not None else 0,
            dump_every=int(settings.get("dump_every", 0)),
            dump_prefix=settings.get("dump_prefix"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad setting: {exc}") from exc


def _dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text, out, stdout):
    if out is None:
        stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc}") from exc


def _fit_path(out):
    return str(Path(out).with_suffix("")) + ".fit.json"


def _density_path(out):
    return str(Path(out).with_suffix("")) + ".density.csv"


def _cell(value):
    return repr(value) if isinstance(value, float) else str(value)


def _flat_csv(payload):
    """key,value rows; lists become key[0], key[1], ... and the state spec is skipped."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for key, value in sorted(payload.items()):
        if key == "state":
            continue
        if isinstance(value, list):
            for i, v in enumerate(value):
                w.writerow([f"{key}[{i}]", _cell(v)])
        else:
            w.writerow([key, _cell(value)])
    return buf.getvalue()


def run_phase(cfg, stdout):
    state = make_state(cfg.state, cfg.params, cfg.trunc)
    report = phase_report(state, cfg.params)
    payload = {
        "state": cfg.state.to_dict(),
        "truncation": [cfg.trunc.n_max_a, cfg.trunc.n_max_b],
        "epsilon": cfg.params.epsilon,
        "omega_B": cfg.params.omega_B,
        **report.to_dict(cfg.params, cfg.units),
    }
    if cfg.format == "csv":
        _emit(_flat_csv(payload), cfg.out, stdout)
    else:
        _emit(_dumps(payload), cfg.out, stdout)
    return 0


def run_trajectory(cfg, stdout):
    state = make_state(cfg.state, cfg.params, cfg.trunc)
    traj = center_trajectory(state, cfg.params, cfg.samples)
    fit = fit_circle(traj).to_dict()
    fit["max_discrepancy"] = traj.max_discrepancy
    if cfg.out is not None:
        _emit(traj.to_csv(), cfg.out, stdout)
        _emit(_dumps(fit), _fit_path(cfg.out), stdout)
    elif cfg.format == "csv":
        stdout.write(traj.to_csv())
    else:
        stdout.write(_dumps(fit))
    return 0


def run_wavefunction(cfg, stdout):
    if cfg.out is None:
        raise ConfigError("wavefunction writes a binary file; pass --out")
    state = make_state(cfg.state, cfg.params, cfg.trunc)
    values = synthesize_state(state, cfg.grid, cfg.params)
    values.check_boundary("synthesized wave function")
    density = _density_path(cfg.out)
    try:
        values.save(cfg.out)
        Path(density).write_text(values.density_csv(), encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write output: {exc}") from exc
    summary = {
        "lpgf": cfg.out,
        "density_csv": density,
        "grid": [cfg.grid.nx, cfg.grid.ny],
        "extent": [cfg.grid.x_extent, cfg.grid.y_extent],
        "norm": values.norm_sq(),
        "edge_density": values.edge_density(),
        "mean_position": list(values.mean_position()),
    }
    stdout.write(_dumps(summary))
    return 0


def run_validate(cfg, stdout):
    config = PropagatorConfig(
        grid=cfg.grid, n_steps=cfg.steps, dump_every=cfg.dump_every, dump_prefix=cfg.dump_prefix
    )
    report = cross_validate(cfg.state, config, cfg.params, cfg.trunc)
    _emit(_dumps(report.to_dict()), cfg.out, stdout)
    return 0 if report.passed else ValidationFailure.exit_code


def run_suite(cfg, stdout):
    from .suite import format_table, run_suite as run_checks

    results = run_checks(seed=cfg.seed)
    table = format_table(results)
    stdout.write(table)
    if cfg.out is not None:
        _emit(_dumps([r.to_dict() for r in results]), cfg.out, stdout)
    return 0 if all(r.passed for r in results) else ValidationFailure.exit_code


HANDLERS = {
    "phase": run_phase,
    "trajectory": run_trajectory,
    "wavefunction": run_wavefunction,
    "validate": run_validate,
    "suite": run_suite,
}


def run(cfg, stdout=None):
    return HANDLERS[cfg.command](cfg, stdout or sys.stdout)


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        return run(cfg, stdout)
    except LandauPhaseError as exc:
        stderr.write(f"landau-phase: {type(exc).__name__}: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
