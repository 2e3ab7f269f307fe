"""Shot-noise model for the covariance matrix and Davis-Kahan subspace checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .parent import CovarianceData, _check_support
from .pauli import PauliTerm, _PHASE_ARRAY, product_arrays
from .state import StateVector, pauli_apply_array


def _entry_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *key]))


def _sample_mean(mean: float, shots: int, rng: np.random.Generator) -> float:
    """Mean of ``shots`` independent +/-1 outcomes with expectation ``mean``."""
    p_plus = min(1.0, max(0.0, 0.5 * (1.0 + mean)))
    k = rng.binomial(shots, p_plus)
    return (2.0 * k - shots) / shots


def sample_covariance(S: Sequence[PauliTerm], psi: StateVector, shots: int, seed: int = 0,
                      source_state_id: str = "") -> CovarianceData:
    """Finite-shot estimate of the covariance matrix.

    Each ``b_i`` and each commuting-pair product ``<P_i P_j> = phase <Q>`` gets
    its own budget of ``shots`` measurements drawn from a stream seeded by
    ``(seed, kind, i, j)``. Anticommuting pairs have a vanishing symmetric part
    and are not measured. Diagonal entries use ``P_i^2 = I`` exactly.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    S = _check_support(S, psi.n)
    m = len(S)
    amps = psi.amplitudes

    def exact_mean(term: PauliTerm) -> float:
        return float(np.vdot(amps, pauli_apply_array(term, amps)).real)

    b_hat = np.array([_sample_mean(exact_mean(p), shots, _entry_rng(seed, 0, i)) for i, p in enumerate(S)])
    A = np.empty((m, m))
    for i in range(m):
        A[i, i] = 1.0 - b_hat[i] ** 2
    xs = np.array([p.x for p in S], dtype=np.uint64)
    zs = np.array([p.z for p in S], dtype=np.uint64)
    for i in range(m):
        for j in range(i + 1, m):
            k, qx, qz = product_arrays(xs[i], zs[i], xs[j], zs[j])
            if k % 2:
                sym = 0.0
            else:
                q = PauliTerm(S[0].n, int(qx), int(qz))
                sym = _PHASE_ARRAY[k].real * _sample_mean(exact_mean(q), shots, _entry_rng(seed, 1, i, j))
            A[i, j] = A[j, i] = sym - b_hat[i] * b_hat[j]
    return CovarianceData(S, A, b_hat, int(shots), source_state_id)


def entry_variances(cov: CovarianceData) -> np.ndarray:
    """Per-shot variance of each covariance entry estimator (delta method).

    Plug-in values come from ``cov`` itself, so on sampled data this is the
    empirical per-entry variance.
    """
    S = cov.pauli_set
    m = len(S)
    b = cov.b
    var_b = 1.0 - b ** 2
    V = np.empty((m, m))
    for i in range(m):
        V[i, i] = 4.0 * b[i] ** 2 * var_b[i]
        for j in range(i + 1, m):
            k, _, _ = product_arrays(np.uint64(S[i].x), np.uint64(S[i].z), np.uint64(S[j].x), np.uint64(S[j].z))
            if k % 2:
                var_q = 0.0
            else:
                sym = cov.A[i, j] + b[i] * b[j]
                var_q = 1.0 - min(1.0, sym * sym)
            V[i, j] = V[j, i] = var_q + b[j] ** 2 * var_b[i] + b[i] ** 2 * var_b[j]
    return np.clip(V, 0.0, None)


@dataclass
class DavisKahanReport:
    applicable: bool
    gamma: float
    delta: float
    perturbation_norm: float
    measured: float = math.nan
    bound: float = math.nan
    passed: bool = False
    vacuous: bool = False
    kernel_dim_exact: int = 0
    kernel_dim_sampled: int = 0
    message: str = ""

    def to_json(self) -> dict:
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in self.__dict__.items()}


def _matrix(c):
    return c.A if isinstance(c, CovarianceData) else np.asarray(c, dtype=float)


def davis_kahan_check(exact, sampled, delta: float) -> DavisKahanReport:
    """Compare ``||Pi_K Pi~_K~||`` with ``||Delta A|| / (gamma - delta)``.

    ``Pi_K`` projects onto eigenvectors of the exact matrix with eigenvalue
    ``>= gamma`` (the smallest exact eigenvalue above ``delta``); ``Pi~_K~``
    onto eigenvectors of the sampled matrix with eigenvalue ``<= delta``.
    """
    A = _matrix(exact)
    At = _matrix(sampled)
    if A.shape != At.shape:
        raise ValueError("exact and sampled matrices differ in shape")
    mu, U = np.linalg.eigh(0.5 * (A + A.T))
    mut, Ut = np.linalg.eigh(0.5 * (At + At.T))
    dA = float(np.linalg.norm(At - A, 2))
    above = mu > delta
    if not np.any(above):
        return DavisKahanReport(False, math.nan, delta, dA, kernel_dim_exact=int(mu.size),
                                kernel_dim_sampled=int(np.sum(mut <= delta)),
                                message="no exact eigenvalue above delta; gap condition violated, bound inapplicable")
    gamma = float(mu[above][0])
    P = U[:, mu >= gamma]
    Pt = Ut[:, mut <= delta]
    measured = float(np.linalg.norm(P.T @ Pt, 2)) if Pt.shape[1] else 0.0
    bound = dA / (gamma - delta)
    return DavisKahanReport(
        applicable=True, gamma=gamma, delta=float(delta), perturbation_norm=dA,
        measured=measured, bound=bound, passed=measured <= bound + 1e-10, vacuous=bound >= 1.0,
        kernel_dim_exact=int(np.sum(mu <= delta)), kernel_dim_sampled=int(Pt.shape[1]),
        message="bound is vacuous (>= 1)" if bound >= 1.0 else "",
    )


@dataclass
class NoiseStudy:
    exact: CovarianceData
    sampled: CovarianceData
    shots: int
    seed: int
    spectral_norm: float
    frobenius_norm: float
    footnote_estimate: float
    mean_entry_variance: float
    davis_kahan: DavisKahanReport
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "m": self.exact.m,
            "shots": self.shots,
            "seed": self.seed,
            "delta_A_spectral": self.spectral_norm,
            "delta_A_frobenius": self.frobenius_norm,
            "delta_A_frobenius_sq": self.frobenius_norm ** 2,
            "footnote_estimate_frobenius_sq": self.footnote_estimate,
            "mean_entry_variance": self.mean_entry_variance,
            "davis_kahan": self.davis_kahan.to_json(),
            "notes": list(self.notes),
        }


def noise_study(S: Sequence[PauliTerm], psi: StateVector, shots: int, seed: int, delta: float) -> NoiseStudy:
    from .parent import build_covariance

    exact = build_covariance(S, psi)
    sampled = sample_covariance(S, psi, shots, seed)
    dA = sampled.A - exact.A
    var = entry_variances(sampled)
    m = exact.m
    sigma2 = float(var.mean())
    notes = ["anticommuting pairs are not measured; their entries carry noise only through b"]
    return NoiseStudy(
        exact, sampled, shots, seed,
        spectral_norm=float(np.linalg.norm(dA, 2)),
        frobenius_norm=float(np.linalg.norm(dA)),
        footnote_estimate=sigma2 * m * m / shots,
        mean_entry_variance=sigma2,
        davis_kahan=davis_kahan_check(exact, sampled, delta),
        notes=notes,
    )
