"""
Linear-interpolation schedules: spectral gaps, adiabatic time estimate,
rigorous error bound and product-formula simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ingest import QubitHamiltonian
from .pauli import check_dense
from .state import StateVector, exp_pauli_array, expm_hermitian

DEGENERACY_TOL = 1e-9
COUPLING_TOL = 1e-9
DEFAULT_GRID_POINTS = 101
FACTOR_MODES = ("exact-factor", "pauli-split")


class ZeroGapError(ValueError):
    """Raised when a bound needs a strictly positive gap on the whole grid."""


@dataclass(frozen=True)
class Schedule:
    """``H(s) = (1 - s) H_i + s H_f`` sampled on ``s_grid``."""

    H_i: QubitHamiltonian
    H_f: QubitHamiltonian
    s_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 1.0, DEFAULT_GRID_POINTS))

    def __post_init__(self):
        if self.H_i.n != self.H_f.n:
            raise ValueError(f"qubit count mismatch: H_i has {self.H_i.n}, H_f has {self.H_f.n}")
        grid = np.asarray(self.s_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("s_grid needs at least two points")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("s_grid must be strictly ascending")
        if grid[0] != 0.0 or grid[-1] != 1.0:
            raise ValueError("s_grid must include both endpoints 0 and 1")
        object.__setattr__(self, "s_grid", grid)

    @classmethod
    def uniform(cls, H_i: QubitHamiltonian, H_f: QubitHamiltonian, points: int = DEFAULT_GRID_POINTS) -> "Schedule":
        return cls(H_i, H_f, np.linspace(0.0, 1.0, points))

    @property
    def n(self) -> int:
        return self.H_i.n

    def reversed(self) -> "Schedule":
        return Schedule(self.H_f, self.H_i, 1.0 - self.s_grid[::-1])

    def derivative_dense(self) -> np.ndarray:
        return self.H_f.to_dense() - self.H_i.to_dense()


def interpolate(schedule: Schedule, s: float) -> QubitHamiltonian:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    if s == 0.0:
        return schedule.H_i
    if s == 1.0:
        return schedule.H_f
    hi, hf = schedule.H_i, schedule.H_f
    return QubitHamiltonian(
        hi.sum * (1.0 - s) + hf.sum * s,
        (1.0 - s) * hi.identity_offset + s * hf.identity_offset,
        {"s": s},
    )


@dataclass
class AdiabaticDiagnostics:
    s: np.ndarray
    eigenvalues: np.ndarray
    gaps: np.ndarray
    coupling_terms: np.ndarray
    t_est: float
    t_est_s: float
    t_est_infinite: bool
    skipped_clusters: list = field(default_factory=list)
    degenerate_s: list = field(default_factory=list)
    f1: float = 0.0
    norm: str = "spectral"

    @property
    def min_gap(self) -> float:
        return float(self.gaps.min())

    @property
    def min_gap_s(self) -> float:
        return float(self.s[int(np.argmin(self.gaps))])

    def gap_columns(self, levels: int | None = None) -> dict:
        k = self.eigenvalues.shape[1] if levels is None else min(levels, self.eigenvalues.shape[1])
        cols = {"s": self.s}
        for j in range(k):
            cols[f"lambda_{j}"] = self.eigenvalues[:, j]
        cols["gap"] = self.gaps
        return cols

    def summary(self) -> dict:
        return {
            "t_est": self.t_est if not self.t_est_infinite else "inf",
            "t_est_s": self.t_est_s,
            "t_est_infinite": self.t_est_infinite,
            "min_gap": self.min_gap,
            "min_gap_s": self.min_gap_s,
            "skipped_clusters": len(self.skipped_clusters),
            "degenerate_points": len(self.degenerate_s),
            "f1": self.f1,
            "derivative_norm": self.norm,
            "grid_points": int(self.s.size),
        }


def _point_analysis(evals: np.ndarray, evecs: np.ndarray, D: np.ndarray):
    """Max over ``j > 0`` of ``|<j|D|0>| / (l_j - l_0)^2`` with the degeneracy rule.

    Returns ``(term, infinite, skipped)``.
    """
    if evals.size < 2:
        return 0.0, False, False
    v0 = evecs[:, 0]
    couplings = np.abs(evecs.conj().T @ (D @ v0))
    gaps = evals - evals[0]
    cluster = np.flatnonzero(gaps[1:] < DEGENERACY_TOL) + 1
    skipped = False
    infinite = False
    if cluster.size:
        if np.linalg.norm(couplings[cluster]) >= COUPLING_TOL:
            infinite = True
        else:
            skipped = True
    rest = np.flatnonzero(gaps >= DEGENERACY_TOL)
    term = float(np.max(couplings[rest] / gaps[rest] ** 2)) if rest.size else 0.0
    return term, infinite, skipped


def analyze(schedule: Schedule, dense_limit: int | None = None) -> AdiabaticDiagnostics:
    """Diagonalize ``H(s)`` on the grid; gaps, per-point coupling terms and ``T_est``."""
    check_dense(schedule.n, dense_limit)
    Hi = schedule.H_i.to_dense(dense_limit)
    Hf = schedule.H_f.to_dense(dense_limit)
    D = Hf - Hi
    grid = schedule.s_grid
    dim = Hi.shape[0]
    eigs = np.empty((grid.size, dim))
    terms = np.empty(grid.size)
    skipped, degenerate = [], []
    infinite = False
    for k, s in enumerate(grid):
        evals, evecs = np.linalg.eigh((1.0 - s) * Hi + s * Hf)
        eigs[k] = evals
        term, inf_k, skip_k = _point_analysis(evals, evecs, D)
        terms[k] = math.inf if inf_k else term
        infinite |= inf_k
        if skip_k:
            skipped.append(float(s))
        if dim > 1 and evals[1] - evals[0] < DEGENERACY_TOL:
            degenerate.append(float(s))
    gaps = eigs[:, 1] - eigs[:, 0] if dim > 1 else np.full(grid.size, math.inf)
    gaps = np.maximum(gaps, 0.0)
    kmax = int(np.argmax(terms))
    f1 = float(np.linalg.norm(D, 2)) if np.any(D) else 0.0
    return AdiabaticDiagnostics(
        s=grid, eigenvalues=eigs, gaps=gaps, coupling_terms=terms,
        t_est=math.inf if infinite else float(terms[kmax]), t_est_s=float(grid[kmax]),
        t_est_infinite=infinite, skipped_clusters=skipped, degenerate_s=degenerate, f1=f1,
    )


def gap_scan(schedule: Schedule, dense_limit: int | None = None) -> AdiabaticDiagnostics:
    return analyze(schedule, dense_limit)


def adiabatic_estimate(schedule: Schedule, dense_limit: int | None = None) -> AdiabaticDiagnostics:
    return analyze(schedule, dense_limit)


def jordan_bound_from_gaps(s: np.ndarray, gaps: np.ndarray, f1: float, T_asp: float, f2=0.0) -> float:
    if T_asp <= 0:
        raise ValueError("T_ASP must be positive")
    gaps = np.asarray(gaps, dtype=float)
    if np.any(gaps <= 0):
        bad = float(np.asarray(s)[np.argmin(gaps)])
        raise ZeroGapError(f"gap vanishes at s={bad}; the bound is undefined")
    f2 = np.broadcast_to(np.asarray(f2, dtype=float), gaps.shape)
    integrand = 5.0 * f1 ** 2 / gaps ** 3 + f2 / gaps ** 2
    integral = float(np.trapezoid(integrand, s))
    return (f1 / gaps[-1] ** 2 + f1 / gaps[0] ** 2 + integral) / T_asp


def jordan_bound(schedule: Schedule, T_asp: float, diagnostics: AdiabaticDiagnostics | None = None) -> float:
    """Upper bound on ``|| |Psi(1)> - |phi_0(1)> ||`` for linear interpolation.

    ``f1`` is the spectral norm of ``H_f - H_i``; ``f2 = 0``. The integral is
    the trapezoid rule on the schedule grid.
    """
    diag = diagnostics or analyze(schedule)
    if diag.f1 == 0.0:
        if T_asp <= 0:
            raise ValueError("T_ASP must be positive")
        return 0.0
    return jordan_bound_from_gaps(diag.s, diag.gaps, diag.f1, T_asp)


@dataclass(frozen=True)
class TrotterPlan:
    total_time: float
    steps: int
    factor_mode: str = "exact-factor"

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("need at least one Trotter step")
        if self.total_time < 0:
            raise ValueError("total time must be non-negative")
        if self.factor_mode not in FACTOR_MODES:
            raise ValueError(f"factor mode must be one of {FACTOR_MODES}")


def trotter_evolve(schedule: Schedule, plan: TrotterPlan, initial: StateVector) -> StateVector:
    """``prod_k exp(-i (T/n_s) H(k/n_s))`` applied to ``initial``, k = 0 first."""
    if initial.n != schedule.n:
        raise ValueError(f"qubit count mismatch: state {initial.n} vs schedule {schedule.n}")
    dt = plan.total_time / plan.steps
    vec = initial.amplitudes.copy()
    if plan.factor_mode == "exact-factor":
        Hi = schedule.H_i.to_dense()
        Hf = schedule.H_f.to_dense()
        for k in range(plan.steps):
            s = k / plan.steps
            vec = expm_hermitian((1.0 - s) * Hi + s * Hf, dt) @ vec
    else:
        for k in range(plan.steps):
            h = interpolate(schedule, k / plan.steps)
            for c, term in h.sum.terms:
                vec = exp_pauli_array(dt * c, term, vec)
            if h.identity_offset:
                vec = np.exp(-1j * dt * h.identity_offset) * vec
    return StateVector(vec)


def reference_evolve(schedule: Schedule, total_time: float, initial: StateVector, steps: int = 1 << 14) -> StateVector:
    """Fine midpoint-rule product of exact factors, used as the time-ordered reference."""
    Hi = schedule.H_i.to_dense()
    Hf = schedule.H_f.to_dense()
    dt = total_time / steps
    vec = initial.amplitudes.copy()
    for k in range(steps):
        s = (k + 0.5) / steps
        vec = expm_hermitian((1.0 - s) * Hi + s * Hf, dt) @ vec
    return StateVector(vec)


def state_distance(a: StateVector, b: StateVector) -> float:
    return float(np.linalg.norm(a.amplitudes - b.amplitudes))


def trotter_convergence(schedule: Schedule, total_time: float, steps: Sequence[int], initial: StateVector,
                        factor_mode: str = "exact-factor", target: StateVector | None = None,
                        reference: StateVector | None = None) -> dict:
    """Rows ``(n_s, error vs reference, infidelity vs target ground state)``."""
    if reference is None:
        reference = reference_evolve(schedule, total_time, initial)
    if target is None:
        evals, evecs = np.linalg.eigh(schedule.H_f.to_dense())
        target = StateVector(evecs[:, 0], normalize=True)
    rows = {"n_s": [], "error": [], "infidelity": []}
    for ns in steps:
        out = trotter_evolve(schedule, TrotterPlan(total_time, int(ns), factor_mode), initial)
        rows["n_s"].append(int(ns))
        rows["error"].append(state_distance(out, reference))
        rows["infidelity"].append(1.0 - abs(np.vdot(target.amplitudes, out.amplitudes)) ** 2)
    return rows
