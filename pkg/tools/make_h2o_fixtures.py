"""
Generate H2O (4e,4o) qubit Hamiltonians for the bond-scale sweep fixtures.

Recipe
------
* STO-6G RHF with C2v symmetry, O-H = 0.958 A * R, H-O-H = 104.5 deg.
* Active space: the A1 and B2 orbitals left after removing the two lowest A1
  orbitals (O 1s, O 2s); these are the in-plane O 2p / H 1s combinations.
  The B1 lone pair and the core are frozen (CASCI effective Hamiltonian).
* Jordan-Wigner on 8 spin orbitals, qubits 0-3 spin up, 4-7 spin down,
  active orbitals in energy order within each spin block.
* Reduction to 5 qubits: restrict to the sector with even spin-up parity,
  even spin-down parity and even B2 occupation parity (the RHF sector), then
  drop three qubits whose values are fixed by the remaining five.
* The Fock operator sum_p eps_p n_p is reduced the same way and written as
  the baseline initial Hamiltonian.

Each Hamiltonian is checked against the pyscf CASCI energy; the sector
ground state must be the 4-electron state.

Usage: python3 tools/make_h2o_fixtures.py tests/data/h2o_4e4o
Requires pyscf (not a package dependency).
"""

import itertools
import json
import sys
from functools import reduce
from pathlib import Path

import numpy as np
from pyscf import gto, mcscf, scf, symm

from parentasp.ingest import QubitHamiltonian, save_hamiltonian
from parentasp.pauli import PauliSum

SCALES = [0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.3]
N_ORB = 4
N_SO = 2 * N_ORB

_I = np.eye(2)
_Z = np.diag([1.0, -1.0])
_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1|, |1> = occupied
_P1 = {"I": _I, "X": np.array([[0, 1], [1, 0]], complex), "Y": np.array([[0, -1j], [1j, 0]]), "Z": _Z}


def molecule(scale):
    r = 0.958 * scale
    th = np.deg2rad(104.5) / 2
    atoms = [["O", (0, 0, 0)], ["H", (0, r * np.sin(th), r * np.cos(th))], ["H", (0, -r * np.sin(th), r * np.cos(th))]]
    return gto.M(atom=atoms, basis="sto-6g", symmetry=True, verbose=0)


def annihilators():
    ops = []
    for q in range(N_SO):
        factors = [_Z] * q + [_LOWER] + [_I] * (N_SO - q - 1)
        ops.append(reduce(np.kron, factors))
    return ops


def jw_hamiltonian(e_core, h1, eri):
    a = annihilators()
    ad = [x.T for x in a]
    dim = 1 << N_SO
    H = e_core * np.eye(dim)
    so = lambda p, s: p + s * N_ORB  # noqa: E731
    for s in (0, 1):
        for p, q in itertools.product(range(N_ORB), repeat=2):
            H += h1[p, q] * ad[so(p, s)] @ a[so(q, s)]
    for s, t in itertools.product((0, 1), repeat=2):
        for p, q, r, u in itertools.product(range(N_ORB), repeat=4):
            if eri[p, q, r, u] != 0.0:
                H += 0.5 * eri[p, q, r, u] * ad[so(p, s)] @ ad[so(r, t)] @ a[so(u, t)] @ a[so(q, s)]
    return H


def bits(x, n=N_SO):
    return [(x >> (n - 1 - k)) & 1 for k in range(n)]


def sector_states(b2_mask):
    out = []
    for x in range(1 << N_SO):
        b = bits(x)
        if sum(b[:N_ORB]) % 2 == 0 and sum(b[N_ORB:]) % 2 == 0 and sum(b[k] for k in b2_mask) % 2 == 0:
            out.append(x)
    return out


def choose_drop(states):
    for drop in itertools.combinations(range(N_SO), 3):
        keep = [k for k in range(N_SO) if k not in drop]
        images = {tuple(bits(x)[k] for k in keep) for x in states}
        if len(images) == len(states) == 32:
            return keep
    raise RuntimeError("no valid qubit reduction")


def reduce_matrix(M, states, keep):
    idx = [int("".join(str(bits(x)[k]) for k in keep), 2) for x in states]
    out = np.zeros((32, 32))
    for i, xi in enumerate(states):
        for j, xj in enumerate(states):
            out[idx[i], idx[j]] = M[xi, xj]
    return out, dict(zip(states, idx))


def decompose(M, n=5):
    terms = []
    offset = 0.0
    for label in itertools.product("IXYZ", repeat=n):
        P = reduce(np.kron, [_P1[c] for c in label])
        c = np.trace(P @ M).real / (1 << n)
        if abs(c) < 1e-12:
            continue
        if set(label) == {"I"}:
            offset = c
        else:
            terms.append((c, "".join(label)))
    return terms, offset


def build(scale):
    mol = molecule(scale)
    mf = scf.RHF(mol).run()
    labels = symm.label_orb_symm(mol, mol.irrep_name, mol.symm_orb, mf.mo_coeff)
    a1 = [k for k, lab in enumerate(labels) if lab == "A1"]
    active = sorted(a1[2:] + [k for k, lab in enumerate(labels) if lab == "B2"])
    assert len(active) == N_ORB
    cas = mcscf.CASCI(mf, N_ORB, 4)
    mo = cas.sort_mo([k + 1 for k in active])
    cas.mo_coeff = mo
    e_cas = cas.kernel(mo)[0]
    h1, e_core = cas.get_h1eff()
    eri = cas.get_h2eff()
    from pyscf import ao2mo
    eri = ao2mo.restore(1, eri, N_ORB)
    eps = mf.mo_energy[active]
    b2 = [k for k, o in enumerate(active) if labels[o] == "B2"]
    b2_mask = b2 + [k + N_ORB for k in b2]

    H = jw_hamiltonian(e_core, h1, eri)
    occ = np.diag(np.concatenate([eps, eps]))
    F = np.zeros_like(H)
    for q in range(N_SO):
        F += occ[q, q] * np.diag([bits(x)[q] for x in range(1 << N_SO)]).astype(float)

    states = sector_states(b2_mask)
    keep = choose_drop(states)
    Hr, index = reduce_matrix(H, states, keep)
    Fr, _ = reduce_matrix(F, states, keep)

    w, v = np.linalg.eigh(Hr)
    g = v[:, 0]
    inv = {i: x for x, i in index.items()}
    n_elec = sum(abs(g[i]) ** 2 * sum(bits(inv[i])) for i in range(32))
    assert abs(n_elec - 4) < 1e-8, f"sector ground state has {n_elec} electrons at R={scale}"
    assert abs(w[0] - e_cas) < 1e-8, (w[0], e_cas)

    rhf = int("".join("1" if k in (0, 1, 4, 5) else "0" for k in range(N_SO)), 2)
    ref = format(index[rhf], "05b")
    meta = {"R": scale, "reference": ref, "casci_energy": float(e_cas), "generator": "tools/make_h2o_fixtures.py",
            "kept_qubits": keep, "active_orbitals": active}
    terms, off = decompose(Hr)
    target = QubitHamiltonian(PauliSum.from_labels(terms), off, meta)
    fterms, foff = decompose(Fr)
    fock = QubitHamiltonian(PauliSum.from_labels(fterms), foff, {"R": scale, "reference": ref})
    return target, fock


def main(out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for R in SCALES:
        target, fock = build(R)
        name = f"h2o_R{R:.1f}"
        save_hamiltonian(target, out / f"{name}.txt")
        save_hamiltonian(fock, out / f"{name}_fock.txt")
        manifest.append({"path": f"{name}.txt", "initial": f"{name}_fock.txt", "R": R})
        print(f"R={R}: {len(target.sum)} terms, reference {target.metadata['reference']}, "
              f"E_CASCI={target.metadata['casci_energy']:.8f}")
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/h2o_4e4o")
