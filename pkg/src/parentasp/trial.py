"""Trial wavefunctions: basis states, determinant superpositions, Krylov Ritz vectors."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .ingest import QubitHamiltonian, StateSpec
from .state import StateVector, fix_phase, sum_apply_array

log = logging.getLogger(__name__)

OVERLAP_THRESHOLD = 1e-8


def basis_state(bits: str) -> StateVector:
    return StateVector.basis(bits)


def determinant_superposition(entries) -> StateVector:
    """Place real amplitudes on basis states and normalize.

    Duplicate bitstrings are summed with a warning.
    """
    entries = list(entries)
    if not entries:
        raise ValueError("determinant superposition needs at least one entry")
    n = len(entries[0][0])
    amps = np.zeros(1 << n, dtype=complex)
    seen = set()
    for bits, amp in entries:
        if len(bits) != n or set(bits) - {"0", "1"}:
            raise ValueError(f"bad determinant bitstring {bits!r} (expected {n} bits)")
        if bits in seen:
            log.warning("duplicate determinant %s merged", bits)
        seen.add(bits)
        amps[int(bits, 2)] += float(amp)
    if not np.any(amps):
        raise ValueError("determinant superposition has zero norm")
    return StateVector(amps, normalize=True)


@dataclass(frozen=True)
class KrylovResult:
    state: StateVector
    dimension_used: int
    ritz_energy: float
    overlap_spectrum: np.ndarray


def krylov_ritz(ham: QubitHamiltonian, reference: StateVector, d: int,
                overlap_threshold: float = OVERLAP_THRESHOLD) -> KrylovResult:
    """Lowest Ritz pair of ``ham`` in ``span{H^p |ref>, p < d}``.

    The span is built Arnoldi-style: each new direction is ``H`` applied to the
    previous orthonormal vector, orthogonalized twice by modified Gram-Schmidt.
    A direction whose residual norm falls below ``overlap_threshold`` relative
    to ``||H q||`` means the space is invariant and the build stops. The
    retained basis is then canonically orthogonalized against its overlap
    matrix at the same threshold.

    ``overlap_spectrum`` holds the singular values of the overlap matrix of
    the normalized raw powers ``H^p|ref>/||H^p|ref>||``, the quantity a
    hardware Krylov run would have to condition.
    """
    if d < 1:
        raise ValueError("Krylov dimension must be >= 1")
    if reference.n != ham.n:
        raise ValueError(f"qubit count mismatch: {reference.n} vs {ham.n}")

    def hmul(v):
        return sum_apply_array(ham.sum, v, ham.identity_offset)

    ref = reference.amplitudes.copy()
    dim_max = min(d, ref.size)

    basis = [ref / np.linalg.norm(ref)]
    for _ in range(1, dim_max):
        w = hmul(basis[-1])
        scale = np.linalg.norm(w)
        for _sweep in range(2):
            for q in basis:
                w = w - np.vdot(q, w) * q
        r = np.linalg.norm(w)
        if scale == 0 or r <= overlap_threshold * scale:
            break
        basis.append(w / r)
    Q = np.column_stack(basis)

    S = Q.conj().T @ Q
    s_vals, s_vecs = np.linalg.eigh(S)
    keep = s_vals > overlap_threshold
    X = s_vecs[:, keep] / np.sqrt(s_vals[keep])
    V = Q @ X

    HV = np.column_stack([hmul(V[:, k]) for k in range(V.shape[1])])
    h_small = V.conj().T @ HV
    h_small = 0.5 * (h_small + h_small.conj().T)
    evals, evecs = np.linalg.eigh(h_small)
    psi = V @ evecs[:, 0]
    psi = psi / np.linalg.norm(psi)
    ov = np.vdot(basis[0], psi)
    # phase convention: <ref|psi> real positive, so d=1 returns ref untouched
    psi = psi * (abs(ov) / ov) if abs(ov) > 1e-12 else fix_phase(psi)

    raw = [ref / np.linalg.norm(ref)]
    for _ in range(1, dim_max):
        w = hmul(raw[-1])
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        raw.append(w / nw)
    R = np.column_stack(raw)
    overlap_spectrum = np.linalg.svd(R.conj().T @ R, compute_uv=False)

    return KrylovResult(StateVector(psi, normalize=True), int(V.shape[1]), float(evals[0]), overlap_spectrum)


def build_trial(spec: StateSpec, ham: QubitHamiltonian | None = None,
                overlap_threshold: float = OVERLAP_THRESHOLD) -> StateVector:
    """Materialize a ``StateSpec``; Krylov specs need the target Hamiltonian."""
    if spec.kind == "basis-state":
        return basis_state(spec.payload)
    if spec.kind == "determinant-superposition":
        return determinant_superposition(spec.payload)
    if ham is None:
        raise ValueError("a Krylov trial state needs the target Hamiltonian")
    ref_bits, d = spec.payload
    return krylov_ritz(ham, basis_state(ref_bits), d, overlap_threshold).state
