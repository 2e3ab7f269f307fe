"""Dense statevector simulation for small qubit counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliSum, PauliTerm, _term_phases, check_dense, to_dense

NORM_TOL = 1e-10
DEGENERACY_TOL = 1e-9


class StateVector:
    """Normalized amplitude vector over ``2**n`` basis states.

    Basis index bits follow the Pauli label order: qubit 0 is the most
    significant bit, so ``"10"`` is index 2.
    """

    __slots__ = ("n", "amplitudes")

    def __init__(self, amplitudes, n: int | None = None, normalize: bool = False):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        dim = amps.size
        nq = dim.bit_length() - 1
        if dim == 0 or (1 << nq) != dim:
            raise ValueError(f"amplitude count {dim} is not a power of two")
        if n is not None and n != nq:
            raise ValueError(f"expected {1 << n} amplitudes for {n} qubits, got {dim}")
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        amps.setflags(write=False)
        self.n = nq
        self.amplitudes = amps

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"invalid bitstring {bits!r}")
        amps = np.zeros(1 << len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    def __len__(self) -> int:
        return self.amplitudes.size

    def __repr__(self) -> str:
        return f"StateVector(n={self.n})"

    def vdot(self, other: "StateVector") -> complex:
        _check_n(self.n, other.n)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _check_n(a: int, b: int) -> None:
    if a != b:
        raise ValueError(f"qubit count mismatch: {a} vs {b}")


def pauli_apply_array(term: PauliTerm, vec: np.ndarray) -> np.ndarray:
    """``P @ vec`` on a raw amplitude array (no normalization checks)."""
    dim = vec.shape[0]
    idx = np.arange(dim, dtype=np.uint64)
    out = np.empty_like(vec, dtype=complex)
    out[(idx ^ np.uint64(term.x)).astype(np.intp)] = _term_phases(term, idx) * vec
    return out


def sum_apply_array(psum: PauliSum, vec: np.ndarray, identity_offset: float = 0.0) -> np.ndarray:
    """``(H + offset * I) @ vec`` without building the dense matrix."""
    out = identity_offset * np.asarray(vec, dtype=complex)
    for c, term in psum.terms:
        out = out + c * pauli_apply_array(term, vec)
    return out


def apply_pauli(term: PauliTerm, state: StateVector) -> StateVector:
    _check_n(term.n, state.n)
    return StateVector(pauli_apply_array(term, state.amplitudes))


def expectation(psum: PauliSum | PauliTerm, state: StateVector) -> float:
    """Real expectation value; terms are accumulated in canonical order."""
    if isinstance(psum, PauliTerm):
        psum = PauliSum(psum.n, [(1.0, psum)])
    _check_n(psum.n, state.n)
    psi = state.amplitudes
    total = 0.0
    for c, term in psum.terms:
        total += c * np.vdot(psi, pauli_apply_array(term, psi)).real
    return float(total)


def apply_exp_pauli(theta: float, term: PauliTerm, state: StateVector) -> StateVector:
    """``exp(-i theta P)|psi> = cos(theta)|psi> - i sin(theta) P|psi>``."""
    _check_n(term.n, state.n)
    return StateVector(exp_pauli_array(theta, term, state.amplitudes))


def exp_pauli_array(theta: float, term: PauliTerm, vec: np.ndarray) -> np.ndarray:
    if term.is_identity:
        return np.exp(-1j * theta) * vec
    return np.cos(theta) * vec - 1j * np.sin(theta) * pauli_apply_array(term, vec)


def fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude amplitude is real and positive.

    Ties within 1e-12 go to the lowest index.
    """
    mags = np.abs(vec)
    k = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    return vec * (abs(vec[k]) / vec[k])


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with phase-fixed eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ground_degenerate: bool = False
    ground_multiplicity: int = 1

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def gap(self) -> float:
        if self.eigenvalues.size < 2:
            return float("inf")
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    def state(self, j: int = 0) -> StateVector:
        return StateVector(self.eigenvectors[:, j], normalize=True)


def diagonalize(matrix: np.ndarray) -> Spectrum:
    evals, evecs = np.linalg.eigh(matrix)
    evecs = np.column_stack([fix_phase(evecs[:, j]) for j in range(evecs.shape[1])])
    mult = int(np.sum(evals - evals[0] < DEGENERACY_TOL))
    return Spectrum(evals, evecs, ground_degenerate=mult > 1, ground_multiplicity=mult)


def ground_state(psum: PauliSum, identity_offset: float = 0.0, dense_limit: int | None = None):
    """Return ``(energy, ground StateVector, Spectrum)`` by dense diagonalization."""
    check_dense(psum.n, dense_limit)
    mat = to_dense(psum, dense_limit)
    if identity_offset:
        mat = mat + identity_offset * np.eye(mat.shape[0])
    spec = diagonalize(mat)
    return spec.ground_energy, spec.state(0), spec


def expm_hermitian(matrix: np.ndarray, time: float) -> np.ndarray:
    """``exp(-i time M)`` for Hermitian ``M`` via eigendecomposition."""
    evals, evecs = np.linalg.eigh(matrix)
    return (evecs * np.exp(-1j * time * evals)) @ evecs.conj().T


def evolve_exact(psum: PauliSum, time: float, state: StateVector, identity_offset: float = 0.0,
                 dense_limit: int | None = None) -> StateVector:
    _check_n(psum.n, state.n)
    check_dense(psum.n, dense_limit)
    mat = to_dense(psum, dense_limit)
    if identity_offset:
        mat = mat + identity_offset * np.eye(mat.shape[0])
    return StateVector(expm_hermitian(mat, time) @ state.amplitudes)


def fidelity(a: StateVector, b: StateVector) -> float:
    _check_n(a.n, b.n)
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))
