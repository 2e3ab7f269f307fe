import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parentasp.pauli import PauliSum, parse_pauli
from parentasp.state import (
    StateVector,
    apply_exp_pauli,
    apply_pauli,
    evolve_exact,
    expectation,
    fidelity,
    fix_phase,
    ground_state,
)

from oracles import kron_matrix, random_hamiltonian_pairs, random_label, random_state, dense_sum


def test_basis_index_convention():
    psi = StateVector.basis("10")
    assert np.flatnonzero(psi.amplitudes).tolist() == [2]
    out = apply_pauli(parse_pauli("XI"), psi)
    assert np.flatnonzero(out.amplitudes).tolist() == [0]


def test_norm_is_checked():
    with pytest.raises(ValueError, match="not normalized"):
        StateVector([1.0, 1.0])
    with pytest.raises(ValueError, match="power of two"):
        StateVector([1.0, 0.0, 0.0])
    psi = StateVector([1.0, 1.0], normalize=True)
    assert psi.amplitudes[0] == pytest.approx(2 ** -0.5)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_apply_and_expectation_match_kron(n, seed):
    rng = np.random.default_rng(seed)
    label = random_label(rng, n)
    vec = random_state(rng, n)
    psi = StateVector(vec)
    P = kron_matrix(label)
    np.testing.assert_allclose(apply_pauli(parse_pauli(label), psi).amplitudes, P @ vec, atol=1e-12)
    assert expectation(parse_pauli(label), psi) == pytest.approx(np.vdot(vec, P @ vec).real, abs=1e-12)


def test_exp_pauli_matches_matrix_exponential():
    rng = np.random.default_rng(1)
    vec = random_state(rng, 2)
    P = kron_matrix("XY")
    theta = 0.37
    ref = (np.cos(theta) * np.eye(4) - 1j * np.sin(theta) * P) @ vec
    out = apply_exp_pauli(theta, parse_pauli("XY"), StateVector(vec))
    np.testing.assert_allclose(out.amplitudes, ref, atol=1e-12)


def test_ground_state_and_evolution():
    rng = np.random.default_rng(2)
    pairs = random_hamiltonian_pairs(rng, 3, 6)
    H = PauliSum.from_labels(pairs)
    E, psi, spec = ground_state(H, identity_offset=0.5)
    w, v = np.linalg.eigh(dense_sum(pairs, 0.5))
    assert E == pytest.approx(w[0], abs=1e-10)
    assert fidelity(psi, StateVector(v[:, 0], normalize=True)) == pytest.approx(1.0, abs=1e-10)
    # eigenstates only pick up a phase
    out = evolve_exact(H, 2.0, psi, identity_offset=0.5)
    np.testing.assert_allclose(out.amplitudes, np.exp(-2j * E) * psi.amplitudes, atol=1e-9)


def test_degenerate_ground_reported():
    H = PauliSum.from_labels([(-1.0, "ZI")])
    _, _, spec = ground_state(H)
    assert spec.ground_degenerate and spec.ground_multiplicity == 2


def test_fix_phase():
    v = np.array([0.1j, -0.9, 0.2])
    out = fix_phase(v)
    assert out[1].real > 0 and abs(out[1].imag) < 1e-15
