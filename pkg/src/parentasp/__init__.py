"""Parent-Hamiltonian initial Hamiltonians for adiabatic state preparation."""

__version__ = "0.1.0"

from .pauli import PauliSum, PauliTerm, parse_pauli
from .state import StateVector, ground_state
from .ingest import QubitHamiltonian, StateSpec, builtin_system, load_hamiltonian, save_hamiltonian
from .trial import basis_state, build_trial, determinant_superposition, krylov_ritz
from .parent import EmptyKernelError, build_covariance, construct_parent, fold, kernel_basis
from .adiabatic import Schedule, analyze, jordan_bound, trotter_convergence
from .noise import davis_kahan_check, noise_study, sample_covariance

__all__ = [
    "PauliSum", "PauliTerm", "parse_pauli", "StateVector", "ground_state",
    "QubitHamiltonian", "StateSpec", "builtin_system", "load_hamiltonian", "save_hamiltonian",
    "basis_state", "build_trial", "determinant_superposition", "krylov_ritz",
    "EmptyKernelError", "build_covariance", "construct_parent", "fold", "kernel_basis",
    "Schedule", "analyze", "jordan_bound", "trotter_convergence",
    "davis_kahan_check", "noise_study", "sample_covariance",
]
