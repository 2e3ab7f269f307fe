import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parentasp.ingest import (
    FormatError,
    QubitHamiltonian,
    StateSpec,
    builtin_system,
    fock_from_orbital_energies,
    load_hamiltonian,
    load_pauli_set,
    load_series,
    load_state_spec,
    save_hamiltonian,
    save_series,
    save_state_spec,
)
from parentasp.state import ground_state

from oracles import dense_sum, kron_matrix

DATA = Path(__file__).parent / "data"


def test_text_roundtrip(tmp_path):
    ham = QubitHamiltonian.from_labels([(0.25, "II"), (1 / 3, "XZ"), (-2.0, "YY")], metadata={"R": 1.5})
    path = tmp_path / "h.txt"
    save_hamiltonian(ham, path)
    back = load_hamiltonian(path)
    assert back.same_operator(ham)
    assert back.metadata["R"] == 1.5
    assert back.metadata["n_qubits"] == 2
    save_hamiltonian(back, tmp_path / "again.txt")
    assert (tmp_path / "again.txt").read_bytes() == path.read_bytes()


def test_json_roundtrip(tmp_path):
    ham = QubitHamiltonian.from_labels([(0.5, "III"), (0.1, "XYZ")])
    save_hamiltonian(ham, tmp_path / "h.json")
    assert load_hamiltonian(tmp_path / "h.json").same_operator(ham)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3, allow_nan=False), st.text("IXYZ", min_size=3, max_size=3)),
                min_size=1, max_size=10))
def test_roundtrip_property(tmp_path_factory, pairs):
    ham = QubitHamiltonian.from_labels(pairs)
    path = tmp_path_factory.mktemp("rt") / "h.txt"
    save_hamiltonian(ham, path)
    assert load_hamiltonian(path).same_operator(ham)


def test_duplicate_labels_merge(tmp_path):
    path = tmp_path / "h.txt"
    path.write_text("# two copies\n0.5 XX\n0.25 XX\n1.0 II\n")
    ham = load_hamiltonian(path)
    assert ham.sum.coefficient("XX") == 0.75
    assert ham.identity_offset == 1.0


@pytest.mark.parametrize("text, match", [
    ("0.5 XX\n0.5 XXX\n", ":2"),
    ("0.5 XQ\n", ":1"),
    ("1+2j XX\n", "non-real"),
    ("abc XX\n", "coefficient"),
])
def test_malformed_files(tmp_path, text, match):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(FormatError, match=match):
        load_hamiltonian(path)


def test_fock_operator_matches_occupations():
    eps = [-0.5, 0.3]
    fock = fock_from_orbital_energies(eps)
    dense = fock.to_dense()
    for idx in range(16):
        bits = format(idx, "04b")
        occ = [int(b) for b in bits]
        expected = eps[0] * (occ[0] + occ[2]) + eps[1] * (occ[1] + occ[3])
        assert dense[idx, idx].real == pytest.approx(expected)
    E, psi, _ = ground_state(fock.sum, fock.identity_offset)
    assert np.argmax(np.abs(psi.amplitudes)) == int("1010", 2)


def test_ch2_like_ground_state():
    system = builtin_system("ch2-like")
    phi = system.target.metadata["phi"]
    E, psi, spec = ground_state(system.target.sum, system.target.identity_offset)
    amps = psi.amplitudes * np.sign(psi.amplitudes[int("1010", 2)].real)
    assert amps[int("1010", 2)].real == pytest.approx(math.cos(phi), abs=1e-10)
    assert amps[int("0101", 2)].real == pytest.approx(-math.sin(phi), abs=1e-10)
    assert spec.gap > 0.1


def test_builtin_one_qubit():
    system = builtin_system("one-qubit-zx")
    target, trials = system
    np.testing.assert_allclose(target.to_dense(), -kron_matrix("X"))
    np.testing.assert_allclose(system.initial.to_dense(), -kron_matrix("Z"))
    assert trials[0].payload == "0"
    with pytest.raises(KeyError, match="available"):
        builtin_system("nope")


def test_tfim_dense():
    target = builtin_system("tfim-chain", n=3).target
    ref = dense_sum([(-1.0, "ZZI"), (-1.0, "IZZ"), (-1.0, "XII"), (-1.0, "IXI"), (-1.0, "IIX")])
    np.testing.assert_allclose(target.to_dense(), ref)


def test_state_spec_roundtrip(tmp_path):
    specs = [
        StateSpec("basis-state", "0110"),
        StateSpec("determinant-superposition", (("01", 0.6), ("10", -0.8)), "mp2"),
        StateSpec("krylov", ("0110", 3)),
    ]
    for k, spec in enumerate(specs):
        save_state_spec(spec, tmp_path / f"s{k}.json")
        assert load_state_spec(tmp_path / f"s{k}.json") == spec
    assert specs[2].name == "krylov-d3"
    with pytest.raises(ValueError):
        StateSpec("basis-state", "01a")
    with pytest.raises(ValueError):
        StateSpec("determinant-superposition", (("01", 1.0), ("101", 1.0)))


def test_series_roundtrip(tmp_path):
    path = tmp_path / "s.csv"
    save_series({"R": [0.5, 1.0], "T_est": [0.1, math.inf]}, path)
    back = load_series(path)
    assert back["R"] == [0.5, 1.0]
    assert back["T_est"][1] == math.inf
    with pytest.raises(ValueError):
        save_series({"a": [1], "b": [1, 2]}, path)


def test_pauli_set_file(tmp_path):
    path = tmp_path / "set.txt"
    path.write_text("XX\nZZ  # comment\nXX\nII\n")
    assert [p.label for p in load_pauli_set(path)] == ["XX", "ZZ"]


def test_oracle_fixture_roundtrip(tmp_path):
    files = sorted((DATA / "h2o_4e4o").glob("h2o_R*[0-9].txt"))
    if not files:
        pytest.skip("oracle-generated H2O files not present (see tools/make_h2o_fixtures.py)")
    ham = load_hamiltonian(files[0])
    assert ham.n == 5 and len(ham.sum) > 100
    assert ham.metadata["generator"] == "tools/make_h2o_fixtures.py"
    save_hamiltonian(ham, tmp_path / "copy.txt")
    assert load_hamiltonian(tmp_path / "copy.txt").same_operator(ham)
    E, _, _ = ground_state(ham.sum, ham.identity_offset)
    assert E == pytest.approx(ham.metadata["casci_energy"], abs=1e-8)
