"""
Hamiltonian, trial-state and result-series file formats, plus bundled systems.

pauli-text format, one term per line::

    # comment
    #@meta {"system": "h2o", "R": 1.2, "n_qubits": 5}
    -0.8126 IIIII
    0.1712 ZIIII

The ``#@meta`` line is an optional JSON object carried through to
``QubitHamiltonian.metadata``. The identity term is split off into
``identity_offset``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .pauli import PauliSum, PauliTerm, parse_pauli, pauli_decompose, PauliParseError

META_PREFIX = "#@meta"


class FormatError(ValueError):
    """Malformed input file; message carries the path and line number."""


@dataclass(frozen=True)
class QubitHamiltonian:
    """Pauli sum without identity, the identity coefficient, and free-form metadata."""

    sum: PauliSum
    identity_offset: float = 0.0
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if any(t.is_identity for _, t in self.sum.terms):
            raise ValueError("identity term must be stored in identity_offset")

    @property
    def n(self) -> int:
        return self.sum.n

    @classmethod
    def from_labels(cls, pairs, n: int | None = None, metadata=None) -> "QubitHamiltonian":
        pairs = list(pairs)
        if n is None:
            if not pairs:
                raise ValueError("cannot infer qubit count from an empty list")
            n = len(pairs[0][1])
        offset = 0.0
        rest = []
        for c, lab in pairs:
            term = parse_pauli(lab)
            if term.is_identity:
                offset += float(c)
            else:
                rest.append((c, term))
        return cls(PauliSum(n, rest), offset, dict(metadata or {}))

    @classmethod
    def from_dense(cls, matrix, metadata=None) -> "QubitHamiltonian":
        psum, offset = pauli_decompose(matrix)
        return cls(psum, offset, dict(metadata or {}))

    def to_dense(self, dense_limit: int | None = None) -> np.ndarray:
        mat = self.sum.to_dense(dense_limit)
        if self.identity_offset:
            mat = mat + self.identity_offset * np.eye(mat.shape[0])
        return mat

    def scaled(self, factor: float) -> "QubitHamiltonian":
        return QubitHamiltonian(self.sum * factor, factor * self.identity_offset, dict(self.metadata))

    def __add__(self, other: "QubitHamiltonian") -> "QubitHamiltonian":
        return QubitHamiltonian(self.sum + other.sum, self.identity_offset + other.identity_offset,
                                dict(self.metadata))

    def same_operator(self, other: "QubitHamiltonian") -> bool:
        return self.sum == other.sum and self.identity_offset == other.identity_offset


# ---------------------------------------------------------------------------
# Hamiltonian files
# ---------------------------------------------------------------------------

def _parse_coefficient(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        pass
    try:
        val = complex(text)
    except ValueError:
        raise FormatError(f"{where}: cannot parse coefficient {text!r}") from None
    if val.imag != 0.0:
        raise FormatError(f"{where}: non-real coefficient {text!r}")
    return val.real


def _assemble(pairs, n, meta, path) -> QubitHamiltonian:
    if n is None:
        n = meta.get("n_qubits")
    if n is None:
        raise FormatError(f"{path}: no terms and no n_qubits metadata; qubit count unknown")
    offset = 0.0
    rest = []
    for coeff, term in pairs:
        if term.is_identity:
            offset += coeff
        else:
            rest.append((coeff, term))
    meta = dict(meta)
    meta.setdefault("n_qubits", n)
    return QubitHamiltonian(PauliSum(n, rest), offset, meta)


def _load_pauli_text(path: Path) -> QubitHamiltonian:
    pairs: list[tuple[float, PauliTerm]] = []
    meta: dict[str, Any] = {}
    n = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            where = f"{path}:{lineno}"
            line = raw.strip()
            if line.startswith(META_PREFIX):
                try:
                    meta.update(json.loads(line[len(META_PREFIX):]))
                except json.JSONDecodeError as exc:
                    raise FormatError(f"{where}: bad metadata JSON ({exc})") from None
                continue
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FormatError(f"{where}: expected '<coefficient> <label>', got {raw.rstrip()!r}")
            coeff = _parse_coefficient(parts[0], where)
            try:
                term = parse_pauli(parts[1])
            except PauliParseError as exc:
                raise FormatError(f"{where}: {exc}") from None
            if n is None:
                n = term.n
            elif term.n != n:
                raise FormatError(f"{where}: label has {term.n} qubits, previous lines have {n}")
            pairs.append((coeff, term))
    if n is not None and "n_qubits" in meta and meta["n_qubits"] != n:
        raise FormatError(f"{path}: metadata n_qubits={meta['n_qubits']} disagrees with labels ({n})")
    return _assemble(pairs, n, meta, path)


def _load_json(path: Path) -> QubitHamiltonian:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from None
    meta = dict(doc.get("metadata", {}))
    n = doc.get("n_qubits")
    pairs = []
    for k, entry in enumerate(doc.get("terms", [])):
        where = f"{path}: terms[{k}]"
        if isinstance(entry, Mapping):
            coeff, label = entry.get("coefficient"), entry.get("label")
        else:
            coeff, label = entry
        if isinstance(coeff, (list, tuple)):
            if len(coeff) != 2 or coeff[1] != 0:
                raise FormatError(f"{where}: non-real coefficient {coeff!r}")
            coeff = coeff[0]
        coeff = _parse_coefficient(str(coeff), where) if isinstance(coeff, str) else float(coeff)
        try:
            term = parse_pauli(label)
        except PauliParseError as exc:
            raise FormatError(f"{where}: {exc}") from None
        if n is None:
            n = term.n
        elif term.n != n:
            raise FormatError(f"{where}: label has {term.n} qubits, expected {n}")
        pairs.append((coeff, term))
    ham = _assemble(pairs, n, meta, path)
    extra = float(doc.get("identity_offset", 0.0))
    if extra:
        ham = QubitHamiltonian(ham.sum, ham.identity_offset + extra, ham.metadata)
    return ham


def _detect_format(path: Path) -> str:
    return "json" if path.suffix.lower() == ".json" else "pauli-text"


def load_hamiltonian(path, format: str | None = None) -> QubitHamiltonian:
    path = Path(path)
    fmt = format or _detect_format(path)
    if fmt == "pauli-text":
        return _load_pauli_text(path)
    if fmt == "json":
        return _load_json(path)
    raise ValueError(f"unknown Hamiltonian format {fmt!r}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_hamiltonian(ham: QubitHamiltonian, path, format: str | None = None) -> None:
    path = Path(path)
    fmt = format or _detect_format(path)
    meta = dict(ham.metadata)
    meta["n_qubits"] = ham.n
    identity = "I" * ham.n
    if fmt == "json":
        doc = {
            "n_qubits": ham.n,
            "identity_offset": float(ham.identity_offset),
            "terms": [{"coefficient": float(c), "label": t.label} for c, t in ham.sum.terms],
            "metadata": meta,
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    elif fmt == "pauli-text":
        lines = [f"{META_PREFIX} {json.dumps(meta, sort_keys=True)}"]
        if ham.identity_offset != 0.0:
            lines.append(f"{_fmt(ham.identity_offset)} {identity}")
        lines.extend(f"{_fmt(c)} {t.label}" for c, t in ham.sum.terms)
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown Hamiltonian format {fmt!r}")
    _write_text(path, text)


def load_pauli_set(path) -> list[PauliTerm]:
    """Pauli support file: one label per line, or a Hamiltonian file whose labels are used."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return load_hamiltonian(path).sum.paulis()
    terms = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].split()
            if not line:
                continue
            label = line[-1]
            try:
                term = parse_pauli(label)
            except PauliParseError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            if not term.is_identity and term not in terms:
                terms.append(term)
    return terms


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Trial-state specifications
# ---------------------------------------------------------------------------

STATE_KINDS = ("basis-state", "determinant-superposition", "krylov")


@dataclass(frozen=True)
class StateSpec:
    """Recipe for a trial state.

    ``payload`` is a bitstring for ``basis-state``, a tuple of
    ``(bitstring, amplitude)`` for ``determinant-superposition`` and
    ``(reference bitstring, dimension)`` for ``krylov``.
    """

    kind: str
    payload: Any
    label: str = ""

    def __post_init__(self):
        if self.kind not in STATE_KINDS:
            raise ValueError(f"unknown state kind {self.kind!r}; expected one of {STATE_KINDS}")
        if self.kind == "basis-state":
            _check_bits(self.payload)
        elif self.kind == "determinant-superposition":
            entries = tuple((str(b), float(a)) for b, a in self.payload)
            if not entries:
                raise ValueError("determinant superposition needs at least one entry")
            lengths = {len(b) for b, _ in entries}
            if len(lengths) != 1:
                raise ValueError("determinant bitstrings have inconsistent lengths")
            for b, _ in entries:
                _check_bits(b)
            if all(a == 0.0 for _, a in entries):
                raise ValueError("determinant amplitudes are all zero")
            object.__setattr__(self, "payload", entries)
        else:
            ref, d = self.payload
            _check_bits(ref)
            if int(d) < 1:
                raise ValueError("Krylov dimension must be >= 1")
            object.__setattr__(self, "payload", (str(ref), int(d)))

    @property
    def n(self) -> int:
        if self.kind == "basis-state":
            return len(self.payload)
        if self.kind == "determinant-superposition":
            return len(self.payload[0][0])
        return len(self.payload[0])

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == "basis-state":
            return "rhf"
        if self.kind == "determinant-superposition":
            return "dets"
        return f"krylov-d{self.payload[1]}"

    def to_json(self) -> dict:
        doc: dict[str, Any] = {"kind": self.kind}
        if self.kind == "basis-state":
            doc["bits"] = self.payload
        elif self.kind == "determinant-superposition":
            doc["entries"] = [[b, a] for b, a in self.payload]
        else:
            doc["reference"], doc["dimension"] = self.payload
        if self.label:
            doc["label"] = self.label
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "StateSpec":
        kind = doc["kind"]
        label = doc.get("label", "")
        if kind == "basis-state":
            return cls(kind, doc["bits"], label)
        if kind == "determinant-superposition":
            return cls(kind, [tuple(e) for e in doc["entries"]], label)
        if kind == "krylov":
            return cls(kind, (doc["reference"], doc["dimension"]), label)
        raise ValueError(f"unknown state kind {kind!r}")


def _check_bits(bits) -> None:
    if not isinstance(bits, str) or not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {bits!r}")


def load_state_spec(path) -> StateSpec:
    with open(path, encoding="utf-8") as fh:
        return StateSpec.from_json(json.load(fh))


def save_state_spec(spec: StateSpec, path) -> None:
    _write_text(Path(path), json.dumps(spec.to_json(), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Result series
# ---------------------------------------------------------------------------

def _fmt_cell(x) -> str:
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return _fmt(x)


def save_series(columns: Mapping[str, Sequence], path) -> None:
    """Write named equal-length columns as CSV with 17 significant digits."""
    names = list(columns)
    cols = [list(columns[k]) for k in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths: {dict(zip(names, map(len, cols)))}")
    nrows = lengths.pop() if lengths else 0
    rows = [",".join(names)]
    for r in range(nrows):
        rows.append(",".join(_fmt_cell(c[r]) for c in cols))
    _write_text(Path(path), "\n".join(rows) + "\n")


def load_series(path) -> dict[str, list[float]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data: dict[str, list[float]] = {h: [] for h in header}
        for row in reader:
            for h, cell in zip(header, row):
                data[h].append(float(cell))
    return data


# ---------------------------------------------------------------------------
# Fock operator and bundled systems
# ---------------------------------------------------------------------------

def fock_from_orbital_energies(energies: Sequence[float], metadata=None) -> QubitHamiltonian:
    """Diagonal Fock operator ``sum_p eps_p n_p`` over 2k spin-orbitals.

    Qubits ``0..k-1`` hold spin-up orbitals and ``k..2k-1`` spin-down; a set
    bit means occupied, so each spin-orbital contributes ``eps (I - Z)/2``.
    """
    eps = [float(e) for e in energies]
    if not eps:
        raise ValueError("orbital energy list is empty")
    k = len(eps)
    n = 2 * k
    terms = []
    for spin in range(2):
        for p, e in enumerate(eps):
            q = spin * k + p
            terms.append((-0.5 * e, PauliTerm(n, 0, 1 << (n - 1 - q))))
    meta = {"system": "fock", "orbital_energies": eps}
    meta.update(metadata or {})
    return QubitHamiltonian(PauliSum(n, terms), float(sum(eps)), meta)


@dataclass(frozen=True)
class BuiltinSystem:
    """Bundled analytic target with its trial states and optional initial Hamiltonian."""

    name: str
    target: QubitHamiltonian
    trials: tuple[StateSpec, ...]
    initial: QubitHamiltonian | None = None

    def __iter__(self):
        return iter((self.target, list(self.trials)))


CH2_PHI = 0.20


def _one_qubit_zx() -> BuiltinSystem:
    target = QubitHamiltonian.from_labels([(-1.0, "X")], metadata={"system": "one-qubit-zx"})
    initial = QubitHamiltonian.from_labels([(-1.0, "Z")], metadata={"system": "one-qubit-zx-initial"})
    return BuiltinSystem("one-qubit-zx", target, (StateSpec("basis-state", "0"),), initial)


def _ch2_like(phi: float = CH2_PHI, eps_h: float = -0.5, eps_l: float = 0.3) -> BuiltinSystem:
    """Two orbitals h, l; qubits ordered (h up, l up, h down, l down).

    Target = Fock(eps_h, eps_l) + K (|0101><1010| + h.c.) with K chosen so the
    ground state is cos(phi)|1010> - sin(phi)|0101>.
    """
    fock = fock_from_orbital_energies([eps_h, eps_l])
    e_hh, e_ll = 2 * eps_h, 2 * eps_l
    coupling = 0.5 * (e_ll - e_hh) * math.tan(2 * phi)
    hop = np.zeros((16, 16))
    hop[int("0101", 2), int("1010", 2)] = hop[int("1010", 2), int("0101", 2)] = coupling
    target = fock + QubitHamiltonian.from_dense(hop)
    target = QubitHamiltonian(target.sum, target.identity_offset,
                              {"system": "ch2-like", "phi": phi, "orbital_energies": [eps_h, eps_l],
                               "reference": "1010"})
    trials = (
        StateSpec("basis-state", "1010", "rhf"),
        StateSpec("determinant-superposition", (("1010", math.cos(phi)), ("0101", -math.sin(phi))), "dets"),
        StateSpec("krylov", ("1010", 2)),
    )
    return BuiltinSystem("ch2-like", target, trials, fock)


def _tfim_chain(n: int = 4, h: float = 1.0, j: float = 1.0, periodic: bool = False) -> BuiltinSystem:
    """Transverse-field Ising chain ``-J sum Z_q Z_q+1 - h sum X_q``."""
    n = int(n)
    terms = []
    bonds = [(q, q + 1) for q in range(n - 1)]
    if periodic and n > 2:
        bonds.append((n - 1, 0))
    for a, b in bonds:
        terms.append((-j, PauliTerm(n, 0, (1 << (n - 1 - a)) | (1 << (n - 1 - b)))))
    for q in range(n):
        terms.append((-h, PauliTerm(n, 1 << (n - 1 - q), 0)))
    meta = {"system": "tfim-chain", "n": n, "h": h, "J": j, "periodic": periodic, "reference": "0" * n}
    target = QubitHamiltonian(PauliSum(n, terms), 0.0, meta)
    initial = QubitHamiltonian(PauliSum(n, [(-1.0, PauliTerm(n, 0, 1 << (n - 1 - q))) for q in range(n)]), 0.0,
                               {"system": "tfim-initial"})
    trials = (StateSpec("basis-state", "0" * n, "rhf"), StateSpec("krylov", ("0" * n, 2)))
    return BuiltinSystem("tfim-chain", target, trials, initial)


BUILTIN_SYSTEMS = {
    "one-qubit-zx": _one_qubit_zx,
    "ch2-like": _ch2_like,
    "tfim-chain": _tfim_chain,
}


def builtin_system(name: str, **params) -> BuiltinSystem:
    try:
        factory = BUILTIN_SYSTEMS[name]
    except KeyError:
        raise KeyError(f"unknown builtin system {name!r}; available: {', '.join(sorted(BUILTIN_SYSTEMS))}") from None
    return factory(**params)
