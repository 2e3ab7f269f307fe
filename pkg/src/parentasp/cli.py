"""
Command-line driver.

Subcommands ``covariance``, ``parent``, ``estimate``, ``evolve`` and
``noise-study`` each run one stage on files; ``pipeline`` chains them over a
sweep of Hamiltonians (one per bond scale R) and trial states.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .adiabatic import FACTOR_MODES, Schedule, analyze, jordan_bound, trotter_convergence
from .ingest import (
    QubitHamiltonian,
    StateSpec,
    builtin_system,
    fock_from_orbital_energies,
    load_hamiltonian,
    load_pauli_set,
    load_state_spec,
    save_hamiltonian,
    save_series,
)
from .noise import noise_study
from .parent import (
    DEFAULT_RHO,
    KERNEL_DELTA,
    CovarianceData,
    EmptyKernelError,
    OptimizerOptions,
    ParentConfig,
    build_covariance,
    construct_parent,
)
from .pauli import DenseLimitError
from .state import ground_state
from .trial import build_trial, krylov_ritz, basis_state

log = logging.getLogger("parentasp")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILED = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    hamiltonians: list = field(default_factory=list)
    builtin: str | None = None
    builtin_params: dict = field(default_factory=dict)
    initial: str | None = None
    trials: list = field(default_factory=lambda: ["rhf"])
    reference: str | None = None
    state_file: str | None = None
    krylov_dims: list = field(default_factory=lambda: [2])
    pauli_set: str | None = None
    delta: float = KERNEL_DELTA
    rho: float = DEFAULT_RHO
    c_grid: list | None = None
    optimizer: dict = field(default_factory=dict)
    grid: int = 101
    time: float | None = None
    time_factor: float = 10.0
    steps: list = field(default_factory=list)
    factor_mode: str = "exact-factor"
    baseline_fock: bool = False
    orbital_energies: list | None = None
    out: str = "results"
    seed: int = 0
    shots: int = 1000
    noise: bool = False
    workers: int = 1
    levels: int | None = None

    def __post_init__(self):
        if isinstance(self.hamiltonians, str):
            self.hamiltonians = load_manifest(self.hamiltonians)

    def validate(self) -> None:
        if self.delta < 0:
            raise ConfigError("delta must be >= 0")
        if self.rho < 0:
            raise ConfigError("rho must be >= 0")
        if self.grid < 2:
            raise ConfigError("grid needs at least 2 points")
        if self.factor_mode not in FACTOR_MODES:
            raise ConfigError(f"factor mode must be one of {FACTOR_MODES}")
        if self.time is not None and self.time < 0:
            raise ConfigError("time must be >= 0")
        if any(int(s) < 1 for s in self.steps):
            raise ConfigError("steps must be >= 1")
        if any(int(d) < 1 for d in self.krylov_dims):
            raise ConfigError("Krylov dimensions must be >= 1")
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for entry in self.hamiltonians:
            path = entry["path"] if isinstance(entry, dict) else entry
            if not Path(path).exists():
                raise ConfigError(f"Hamiltonian file not found: {path}")
        for p in (self.initial, self.state_file, self.pauli_set):
            if p is not None and not Path(p).exists():
                raise ConfigError(f"file not found: {p}")
        if not self.hamiltonians and not self.builtin:
            raise ConfigError("no Hamiltonian given (use --hamiltonian, --builtin or a config file)")

    @property
    def parent_config(self) -> ParentConfig:
        return ParentConfig(self.delta, self.rho, self.c_grid, OptimizerOptions(**self.optimizer))


def load_manifest(path) -> list:
    """Sweep entries ``{"path", "initial", "R"}`` from a JSON manifest; paths are relative to it."""
    path = Path(path)
    try:
        entries = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
    if not isinstance(entries, list):
        raise ConfigError(f"manifest {path} must hold a list of entries")
    out = []
    for entry in entries:
        entry = {"path": entry} if isinstance(entry, str) else dict(entry)
        for key in ("path", "initial"):
            if entry.get(key):
                entry[key] = str(path.parent / entry[key])
        out.append(entry)
    return out


def _split_list(text, cast=float):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [cast(t) for t in text]
    return [cast(t) for t in str(text).split(",") if t.strip()]


def load_config(args: argparse.Namespace) -> RunConfig:
    doc: dict[str, Any] = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig(**doc)
    overrides = {
        "hamiltonians": [{"path": p} for p in args.hamiltonian] if getattr(args, "hamiltonian", None) else None,
        "builtin": getattr(args, "builtin", None),
        "initial": getattr(args, "initial", None),
        "trials": _split_list(getattr(args, "trial", None), str),
        "reference": getattr(args, "reference", None),
        "state_file": getattr(args, "state_file", None),
        "krylov_dims": _split_list(getattr(args, "krylov_dim", None), int),
        "pauli_set": getattr(args, "pauli_set", None),
        "delta": getattr(args, "delta", None),
        "rho": getattr(args, "rho", None),
        "grid": getattr(args, "grid", None),
        "time": getattr(args, "time", None),
        "steps": _split_list(getattr(args, "steps", None), int),
        "factor_mode": getattr(args, "factor_mode", None),
        "baseline_fock": True if getattr(args, "baseline_fock", False) else None,
        "orbital_energies": _split_list(getattr(args, "orbital_energies", None)),
        "out": getattr(args, "out", None),
        "seed": getattr(args, "seed", None),
        "shots": getattr(args, "shots", None),
        "noise": True if getattr(args, "noise", False) else None,
        "workers": getattr(args, "workers", None),
    }
    for k, v in overrides.items():
        if v is not None:
            setattr(cfg, k, v)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(doc, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


@dataclass
class Problem:
    """One target Hamiltonian with its sweep coordinate and optional initial Hamiltonian."""

    target: QubitHamiltonian
    R: float
    tag: str
    initial: QubitHamiltonian | None = None
    trials: tuple = ()


def _fmt_tag(R: float) -> str:
    return f"R{R:.6g}"


def resolve_problems(cfg: RunConfig) -> list[Problem]:
    problems = []
    if cfg.builtin:
        system = builtin_system(cfg.builtin, **cfg.builtin_params)
        R = float(system.target.metadata.get("R", 1.0))
        problems.append(Problem(system.target, R, _fmt_tag(R), system.initial, system.trials))
    for k, entry in enumerate(cfg.hamiltonians):
        if isinstance(entry, str):
            entry = {"path": entry}
        ham = load_hamiltonian(entry["path"], entry.get("format"))
        R = float(entry.get("R", ham.metadata.get("R", k)))
        initial = load_hamiltonian(entry["initial"]) if entry.get("initial") else None
        problems.append(Problem(ham, R, _fmt_tag(R), initial))
    if cfg.initial:
        init = load_hamiltonian(cfg.initial)
        for p in problems:
            p.initial = init
    tags = [p.tag for p in problems]
    if len(set(tags)) != len(tags):
        for k, p in enumerate(problems):
            p.tag = f"{p.tag}_{k}"
    return problems


def _reference_bits(cfg: RunConfig, problem: Problem) -> str:
    if cfg.reference:
        return cfg.reference
    ref = problem.target.metadata.get("reference")
    if ref:
        return str(ref)
    for spec in problem.trials:
        if spec.kind == "basis-state":
            return spec.payload
    if problem.initial is not None and problem.initial.n <= 12:
        return _ground_bits(problem.initial)
    energies = _orbital_energies(cfg, problem)
    if energies is not None:
        return _ground_bits(fock_from_orbital_energies(energies))
    raise ConfigError("no reference bitstring: pass --reference or add 'reference' to the Hamiltonian metadata")


def _ground_bits(ham: QubitHamiltonian) -> str:
    _, psi, _ = ground_state(ham.sum, ham.identity_offset)
    k = int(np.argmax(np.abs(psi.amplitudes)))
    return format(k, f"0{ham.n}b")


def _orbital_energies(cfg: RunConfig, problem: Problem):
    if cfg.orbital_energies:
        return cfg.orbital_energies
    return problem.target.metadata.get("orbital_energies")


def trial_specs(cfg: RunConfig, problem: Problem) -> list[StateSpec]:
    specs = []
    for name in cfg.trials:
        if isinstance(name, dict):
            specs.append(StateSpec.from_json(name))
        elif name == "none":
            continue
        elif name == "rhf":
            specs.append(StateSpec("basis-state", _reference_bits(cfg, problem), "rhf"))
        elif name == "dets":
            if cfg.state_file:
                specs.append(load_state_spec(cfg.state_file))
            else:
                found = [s for s in problem.trials if s.kind == "determinant-superposition"]
                if not found:
                    raise ConfigError("trial 'dets' needs --state-file with a determinant-superposition spec")
                specs.append(found[0])
        elif name == "krylov":
            ref = _reference_bits(cfg, problem)
            specs.extend(StateSpec("krylov", (ref, int(d))) for d in cfg.krylov_dims)
        elif name.endswith(".json"):
            specs.append(load_state_spec(name))
        else:
            raise ConfigError(f"unknown trial {name!r}; expected rhf, dets, krylov or a state-spec file")
    return specs


def baseline_initial(cfg: RunConfig, problem: Problem) -> QubitHamiltonian:
    energies = _orbital_energies(cfg, problem)
    if energies is not None:
        fock = fock_from_orbital_energies(energies)
        if fock.n != problem.target.n:
            raise ConfigError(f"Fock operator has {fock.n} qubits, target has {problem.target.n}")
        return fock
    if problem.initial is not None:
        return problem.initial
    raise ConfigError("baseline mode needs orbital energies (--orbital-energies or metadata) or an initial Hamiltonian")


def _support(cfg: RunConfig, target: QubitHamiltonian):
    if cfg.pauli_set:
        S = load_pauli_set(cfg.pauli_set)
        known = set(S)
        extra = [t for t in target.sum.paulis() if t not in known]
        return S + extra
    return target.sum.paulis()


def parent_sidecar(parent, cov: CovarianceData) -> dict:
    return {
        "pauli_set": [p.label for p in cov.pauli_set],
        "alpha": parent.alpha,
        "x": parent.x,
        "lambda": parent.lam,
        "cost_value": parent.cost_value,
        "iterations": parent.iterations,
        "converged": parent.converged,
        "identity_offset": parent.folded.identity_offset,
        "num_terms": len(parent.folded.sum),
        **parent.info,
    }


def run_cell(cfg: RunConfig, problem: Problem, spec: StateSpec | None, out_dir: Path) -> dict:
    """One (R, trial) cell: parent (or Fock baseline), diagnostics, optional evolution."""
    target = problem.target
    row: dict[str, Any] = {"R": problem.R, "tag": problem.tag}
    if spec is None:
        row["trial"] = "baseline-fock"
        H_i = baseline_initial(cfg, problem)
        save_hamiltonian(H_i, out_dir / "initial.txt")
    else:
        row["trial"] = spec.name
        row["trial_spec"] = spec.to_json()
        if spec.kind == "krylov":
            kr = krylov_ritz(target, basis_state(spec.payload[0]), spec.payload[1])
            psi = kr.state
            row["krylov"] = {"dimension_used": kr.dimension_used, "ritz_energy": kr.ritz_energy,
                             "overlap_spectrum": kr.overlap_spectrum}
        else:
            psi = build_trial(spec, target)
        cov = build_covariance(_support(cfg, target), psi, spec.name)
        parent = construct_parent(target, psi, config=cfg.parent_config, cov=cov)
        H_i = parent.folded
        save_hamiltonian(H_i, out_dir / "parent.txt")
        write_json(parent_sidecar(parent, cov), out_dir / "parent.json")
        row["cost_value"] = parent.cost_value
        row["kernel_dim"] = parent.info["kernel_dim"]
        if cfg.noise:
            study = noise_study(cov.pauli_set, psi, cfg.shots, cfg.seed, cfg.delta)
            write_json(study.to_json(), out_dir / "noise.json")
            row["noise"] = {"delta_A_spectral": study.spectral_norm,
                            "davis_kahan_passed": study.davis_kahan.passed}

    schedule = Schedule.uniform(H_i, target, cfg.grid)
    diag = analyze(schedule)
    save_series(diag.gap_columns(cfg.levels), out_dir / "gap_scan.csv")
    row.update(diag.summary())
    row["gap_initial"] = float(diag.gaps[0])
    row["gap_target"] = float(diag.gaps[-1])
    try:
        row["jordan_bound_per_unit_T"] = jordan_bound(schedule, 1.0, diag)
    except ValueError as exc:
        row["jordan_bound_per_unit_T"] = math.inf
        row["jordan_bound_error"] = str(exc)

    if cfg.steps:
        T = cfg.time if cfg.time is not None else cfg.time_factor * diag.t_est
        if not math.isfinite(T):
            row["evolution_error"] = "T_est is infinite; pass --time"
        else:
            _, start, _ = ground_state(H_i.sum, H_i.identity_offset)
            conv = trotter_convergence(schedule, T, cfg.steps, start, cfg.factor_mode)
            save_series(conv, out_dir / "evolution.csv")
            row["evolution"] = {"time": T, "factor_mode": cfg.factor_mode,
                                "final_infidelity": conv["infidelity"][-1]}
    write_json(row, out_dir / "cell.json")
    return row


def _cell_task(args):
    cfg, problem, spec, out_dir = args
    try:
        return run_cell(cfg, problem, spec, out_dir)
    except (EmptyKernelError, DenseLimitError, ConfigError, ValueError) as exc:
        return {"R": problem.R, "tag": problem.tag, "trial": spec.name if spec else "baseline-fock",
                "error": type(exc).__name__, "message": str(exc)}


def run_pipeline(cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    problems = resolve_problems(cfg)
    tasks = []
    for problem in problems:
        cells: list[StateSpec | None] = [None] if cfg.baseline_fock else []
        cells += trial_specs(cfg, problem)
        for spec in cells:
            name = spec.name if spec else "baseline-fock"
            tasks.append((cfg, problem, spec, out / "cells" / f"{problem.tag}_{name}"))
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_cell_task, tasks))
    else:
        rows = [_cell_task(t) for t in tasks]

    series: dict[str, dict[str, list]] = {}
    for row in rows:
        if "error" in row:
            continue
        s = series.setdefault(row["trial"], {"R": [], "T_est": [], "gap_parent": [], "min_gap": []})
        s["R"].append(row["R"])
        s["T_est"].append(math.inf if row["t_est_infinite"] else row["t_est"])
        s["gap_parent"].append(row["gap_initial"])
        s["min_gap"].append(row["min_gap"])
    for trial, cols in sorted(series.items()):
        order = np.argsort(cols["R"], kind="stable")
        cols = {k: [v[i] for i in order] for k, v in cols.items()}
        save_series({"R": cols["R"], "T_est": cols["T_est"]}, out / f"t_est_{trial}.csv")
        save_series({"R": cols["R"], "gap_parent": cols["gap_parent"], "min_gap": cols["min_gap"]},
                    out / f"gap_{trial}.csv")
    errors = [r for r in rows if "error" in r]
    summary = {
        "version": __version__,
        # the output location is left out so runs into different directories compare equal
        "config": {k: v for k, v in dataclasses.asdict(cfg).items() if k != "out"},
        "cells": rows,
        "series": sorted(series),
        "errors": errors,
        "status": "ok" if not errors else "failed",
    }
    write_json(summary, out / "summary.json")
    return summary


# ---------------------------------------------------------------------------
# single-stage subcommands
# ---------------------------------------------------------------------------

def _single_problem(cfg: RunConfig) -> Problem:
    problems = resolve_problems(cfg)
    if len(problems) != 1:
        raise ConfigError("this subcommand takes exactly one Hamiltonian")
    return problems[0]


def _single_trial(cfg: RunConfig, problem: Problem):
    specs = trial_specs(cfg, problem)
    if len(specs) != 1:
        raise ConfigError("this subcommand takes exactly one trial state")
    return specs[0], build_trial(specs[0], problem.target)


def cmd_covariance(cfg: RunConfig, args) -> int:
    problem = _single_problem(cfg)
    spec, psi = _single_trial(cfg, problem)
    cov = build_covariance(_support(cfg, problem.target), psi, spec.name)
    write_json(cov.to_json(), Path(cfg.out) / "covariance.json")
    print(f"covariance: m={cov.m}, min eigenvalue {np.linalg.eigvalsh(cov.A)[0]:.3e}")
    return EXIT_OK


def cmd_parent(cfg: RunConfig, args) -> int:
    problem = _single_problem(cfg)
    if args.covariance:
        with open(args.covariance, encoding="utf-8") as fh:
            cov = CovarianceData.from_json(json.load(fh))
        psi = None
    else:
        spec, psi = _single_trial(cfg, problem)
        cov = build_covariance(_support(cfg, problem.target), psi, spec.name)
    parent = construct_parent(problem.target, psi, config=cfg.parent_config, cov=cov)
    out = Path(cfg.out)
    save_hamiltonian(parent.folded, out / "parent.txt")
    write_json(parent_sidecar(parent, cov), out / "parent.json")
    print(f"parent: {len(parent.folded.sum)} terms, kernel dim {parent.info['kernel_dim']}, "
          f"cost {parent.cost_value:.6g}")
    return EXIT_OK


def _schedule_pair(cfg: RunConfig) -> tuple[QubitHamiltonian, QubitHamiltonian]:
    problem = _single_problem(cfg)
    if cfg.baseline_fock:
        H_i = baseline_initial(cfg, problem)
    elif problem.initial is not None:
        H_i = problem.initial
    else:
        raise ConfigError("need an initial Hamiltonian (--initial, --baseline-fock or a builtin system)")
    return H_i, problem.target


def cmd_estimate(cfg: RunConfig, args) -> int:
    H_i, H_f = _schedule_pair(cfg)
    schedule = Schedule.uniform(H_i, H_f, cfg.grid)
    diag = analyze(schedule)
    out = Path(cfg.out)
    save_series(diag.gap_columns(cfg.levels), out / "gap_scan.csv")
    doc = diag.summary()
    try:
        doc["jordan_bound_per_unit_T"] = jordan_bound(schedule, 1.0, diag)
    except ValueError as exc:
        doc["jordan_bound_per_unit_T"] = math.inf
        doc["jordan_bound_error"] = str(exc)
    write_json(doc, out / "estimate.json")
    t = "inf" if diag.t_est_infinite else f"{diag.t_est:.6g}"
    print(f"T_est = {t}, min gap {diag.min_gap:.6g} at s = {diag.min_gap_s:.4g}")
    return EXIT_OK


def cmd_evolve(cfg: RunConfig, args) -> int:
    H_i, H_f = _schedule_pair(cfg)
    schedule = Schedule.uniform(H_i, H_f, cfg.grid)
    T = cfg.time
    if T is None:
        diag = analyze(schedule)
        if diag.t_est_infinite:
            raise ConfigError("T_est is infinite; pass --time")
        T = cfg.time_factor * diag.t_est
    steps = cfg.steps or [64, 128, 256]
    _, start, _ = ground_state(H_i.sum, H_i.identity_offset)
    conv = trotter_convergence(schedule, T, steps, start, cfg.factor_mode)
    out = Path(cfg.out)
    save_series(conv, out / "evolution.csv")
    write_json({"time": T, "factor_mode": cfg.factor_mode, **conv}, out / "evolve.json")
    for ns, err, inf in zip(conv["n_s"], conv["error"], conv["infidelity"]):
        print(f"n_s={ns:6d}  error={err:.3e}  infidelity={inf:.3e}")
    return EXIT_OK


def cmd_noise(cfg: RunConfig, args) -> int:
    problem = _single_problem(cfg)
    spec, psi = _single_trial(cfg, problem)
    study = noise_study(_support(cfg, problem.target), psi, cfg.shots, cfg.seed, cfg.delta)
    write_json(study.to_json(), Path(cfg.out) / "noise.json")
    dk = study.davis_kahan
    print(f"||dA|| = {study.spectral_norm:.3e}, Davis-Kahan measured {dk.measured:.3e} <= bound {dk.bound:.3e}: "
          f"{'pass' if dk.passed else 'FAIL'}" if dk.applicable else dk.message)
    return EXIT_OK


def cmd_pipeline(cfg: RunConfig, args) -> int:
    summary = run_pipeline(cfg)
    for row in summary["cells"]:
        if "error" in row:
            print(f"{row['tag']} {row['trial']}: ERROR {row['error']}")
        else:
            t = "inf" if row["t_est_infinite"] else f"{row['t_est']:.6g}"
            print(f"{row['tag']} {row['trial']}: T_est={t} gap_parent={row['gap_initial']:.4g}")
    if summary["errors"]:
        sys.stderr.write(json.dumps(_jsonable({"status": "failed", "errors": summary["errors"]}), sort_keys=True) + "\n")
        return EXIT_FAILED
    return EXIT_OK


COMMANDS = {
    "covariance": cmd_covariance,
    "parent": cmd_parent,
    "estimate": cmd_estimate,
    "evolve": cmd_evolve,
    "noise-study": cmd_noise,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its fields")
    common.add_argument("--hamiltonian", action="append", help="target Hamiltonian file (repeatable for sweeps)")
    common.add_argument("--builtin", help="bundled system: one-qubit-zx, ch2-like, tfim-chain")
    common.add_argument("--initial", help="initial Hamiltonian file for estimate/evolve")
    common.add_argument("--trial", help="comma list of rhf, dets, krylov, none or state-spec JSON files")
    common.add_argument("--reference", help="reference bitstring for rhf and krylov trials")
    common.add_argument("--state-file", help="determinant-superposition state spec (JSON)")
    common.add_argument("--krylov-dim", help="Krylov dimension(s), comma separated")
    common.add_argument("--pauli-set", help="support set file; target terms are appended")
    common.add_argument("--delta", type=float, help=f"kernel threshold (default {KERNEL_DELTA:g})")
    common.add_argument("--rho", type=float, help=f"commuting-pair penalty (default {DEFAULT_RHO:g})")
    common.add_argument("--grid", type=int, help="number of s grid points (default 101)")
    common.add_argument("--time", type=float, help="total ASP time (default 10 x T_est)")
    common.add_argument("--steps", help="Trotter step counts, comma separated")
    common.add_argument("--factor-mode", choices=FACTOR_MODES)
    common.add_argument("--baseline-fock", action="store_true", help="use the Fock operator as initial Hamiltonian")
    common.add_argument("--orbital-energies", help="comma separated orbital energies for the Fock baseline")
    common.add_argument("--shots", type=int, help="shots per covariance entry (noise-study)")
    common.add_argument("--seed", type=int, help="seed for shot sampling")
    common.add_argument("--noise", action="store_true", help="pipeline: add a shot-noise study per trial cell")
    common.add_argument("--workers", type=int, help="parallel sweep cells")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="parentasp", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "parent":
            p.add_argument("--covariance", help="covariance JSON written by the covariance subcommand")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, EmptyKernelError, DenseLimitError, OSError, KeyError, ValueError) as exc:
        sys.stderr.write(json.dumps({"status": "failed", "error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_FAILED if isinstance(exc, (EmptyKernelError, DenseLimitError)) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
