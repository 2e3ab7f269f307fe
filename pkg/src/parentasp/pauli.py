"""
N-qubit Pauli strings and real-weighted Pauli sums.

A Pauli string is stored in symplectic form as two integer bitmasks. The
leftmost label character is qubit 0 and maps to the most significant bit of
both the masks and the computational-basis index, so that ``to_dense`` is the
plain Kronecker product of the label characters read left to right.

The single-qubit factor on a qubit with bits (x, z) is ``i**(x*z) X**x Z**z``,
i.e. I=(0,0), X=(1,0), Z=(0,1), Y=(1,1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

DENSE_LIMIT = 12
PRUNE_TOL = 1e-12

_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)
_PHASE_ARRAY = np.array(_PHASES, dtype=complex)


class PauliParseError(ValueError):
    """Raised for labels containing characters outside ``IXYZ``."""


class DenseLimitError(ValueError):
    """Raised when a dense operation is requested above the qubit limit."""


def check_dense(n: int, dense_limit: int | None = None) -> None:
    limit = DENSE_LIMIT if dense_limit is None else dense_limit
    if n > limit:
        raise DenseLimitError(f"{n} qubits exceeds the dense limit of {limit}")


@dataclass(frozen=True, order=False)
class PauliTerm:
    """Unsigned Pauli string on ``n`` qubits."""

    n: int
    x: int
    z: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        full = (1 << self.n) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError(f"masks do not fit in {self.n} bits")

    @classmethod
    def from_label(cls, label: str) -> "PauliTerm":
        return parse_pauli(label)

    @classmethod
    def identity(cls, n: int) -> "PauliTerm":
        return cls(n, 0, 0)

    @property
    def label(self) -> str:
        chars = []
        for q in range(self.n):
            bit = self.n - 1 - q
            xb = (self.x >> bit) & 1
            zb = (self.z >> bit) & 1
            chars.append("IZXY"[xb * 2 + zb])
        return "".join(chars)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def num_y(self) -> int:
        return (self.x & self.z).bit_count()

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def sort_key(self) -> tuple[int, int]:
        return (self.z, self.x)

    def __mul__(self, other: "PauliTerm") -> tuple[complex, "PauliTerm"]:
        return pauli_product(self, other)

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliTerm({self.label!r})"


def parse_pauli(label: str) -> PauliTerm:
    """Parse an ``IXYZ`` label; the leftmost character is qubit 0."""
    n = len(label)
    if n == 0:
        raise PauliParseError("empty Pauli label")
    x = z = 0
    for pos, ch in enumerate(label):
        bit = 1 << (n - 1 - pos)
        if ch == "I":
            continue
        if ch == "X":
            x |= bit
        elif ch == "Z":
            z |= bit
        elif ch == "Y":
            x |= bit
            z |= bit
        else:
            raise PauliParseError(f"invalid Pauli character {ch!r} at position {pos} in {label!r}")
    return PauliTerm(n, x, z)


def _check_same_n(a: PauliTerm, b: PauliTerm) -> None:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")


def pauli_product(a: PauliTerm, b: PauliTerm) -> tuple[complex, PauliTerm]:
    """Return ``(phase, term)`` with ``a @ b == phase * term``."""
    _check_same_n(a, b)
    x = a.x ^ b.x
    z = a.z ^ b.z
    ny = (x & z).bit_count()
    # Z^za X^xb = (-1)^|za & xb| X^xb Z^za
    k = (a.num_y + b.num_y - ny + 2 * (a.z & b.x).bit_count()) % 4
    return _PHASES[k], PauliTerm(a.n, x, z)


def commutes(a: PauliTerm, b: PauliTerm) -> bool:
    _check_same_n(a, b)
    return ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) % 2 == 0


def _popcount(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr).astype(np.int64)


def product_arrays(xa, za, xb, zb):
    """Vectorized ``pauli_product`` on uint64 mask arrays (broadcasting).

    Returns ``(k, x, z)`` where the phase is ``1j**k``.
    """
    x = xa ^ xb
    z = za ^ zb
    k = _popcount(xa & za) + _popcount(xb & zb) - _popcount(x & z) + 2 * _popcount(za & xb)
    return k % 4, x, z


def commutes_arrays(xa, za, xb, zb) -> np.ndarray:
    return (_popcount(xa & zb) + _popcount(za & xb)) % 2 == 0


def _term_phases(term: PauliTerm, idx: np.ndarray) -> np.ndarray:
    """``P|k> = phase[k] |k ^ x>`` for every basis index ``k``."""
    signs = 1 - 2 * (_popcount(idx & np.uint64(term.z)) & 1)
    return _PHASES[term.num_y % 4] * signs


def term_matrix(term: PauliTerm, dense_limit: int | None = None) -> np.ndarray:
    check_dense(term.n, dense_limit)
    dim = 1 << term.n
    idx = np.arange(dim, dtype=np.uint64)
    mat = np.zeros((dim, dim), dtype=complex)
    mat[(idx ^ np.uint64(term.x)).astype(np.intp), idx.astype(np.intp)] = _term_phases(term, idx)
    return mat


class PauliSum:
    """Real linear combination of distinct Pauli strings.

    Construction merges duplicate strings, drops coefficients with magnitude
    below ``tol`` and sorts terms canonically by ``(z, x)``. Instances are
    treated as immutable.
    """

    __slots__ = ("n", "_terms", "_arrays")

    def __init__(self, n: int, terms: Iterable[tuple[float, PauliTerm | str]] = (), tol: float = PRUNE_TOL):
        acc: dict[PauliTerm, float] = {}
        for coeff, term in terms:
            if isinstance(term, str):
                term = parse_pauli(term)
            if term.n != n:
                raise ValueError(f"term {term.label} has {term.n} qubits, expected {n}")
            c = complex(coeff)
            if abs(c.imag) > 0:
                raise ValueError(f"non-real coefficient {coeff!r} for {term.label}")
            acc[term] = acc.get(term, 0.0) + c.real
        kept = [(c, t) for t, c in acc.items() if abs(c) >= tol]
        kept.sort(key=lambda ct: ct[1].sort_key())
        self.n = n
        self._terms: tuple[tuple[float, PauliTerm], ...] = tuple(kept)
        self._arrays = None

    @classmethod
    def from_labels(cls, pairs: Iterable[tuple[float, str]], n: int | None = None, tol: float = PRUNE_TOL) -> "PauliSum":
        pairs = [(c, parse_pauli(lab)) for c, lab in pairs]
        if n is None:
            if not pairs:
                raise ValueError("cannot infer qubit count from an empty list")
            n = pairs[0][1].n
        return cls(n, pairs, tol=tol)

    @classmethod
    def from_arrays(cls, n: int, coeffs, xs, zs, tol: float = PRUNE_TOL) -> "PauliSum":
        terms = (
            (float(c), PauliTerm(n, int(x), int(z)))
            for c, x, z in zip(coeffs, xs, zs)
        )
        return cls(n, terms, tol=tol)

    @property
    def terms(self) -> tuple[tuple[float, PauliTerm], ...]:
        return self._terms

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(coeffs, x_masks, z_masks)`` as read-only numpy arrays."""
        if self._arrays is None:
            if self.n > 64:
                raise ValueError("array form supports at most 64 qubits")
            coeffs = np.array([c for c, _ in self._terms], dtype=float)
            xs = np.array([t.x for _, t in self._terms], dtype=np.uint64)
            zs = np.array([t.z for _, t in self._terms], dtype=np.uint64)
            for a in (coeffs, xs, zs):
                a.setflags(write=False)
            self._arrays = (coeffs, xs, zs)
        return self._arrays

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[float, PauliTerm]]:
        return iter(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, self._terms))

    def __repr__(self) -> str:
        body = ", ".join(f"({c:.6g}, {t.label})" for c, t in self._terms[:6])
        more = ", ..." if len(self._terms) > 6 else ""
        return f"PauliSum(n={self.n}, [{body}{more}])"

    def coefficient(self, term: PauliTerm | str) -> float:
        if isinstance(term, str):
            term = parse_pauli(term)
        for c, t in self._terms:
            if t == term:
                return c
        return 0.0

    def as_dict(self) -> dict[PauliTerm, float]:
        return {t: c for c, t in self._terms}

    def paulis(self) -> list[PauliTerm]:
        return [t for _, t in self._terms]

    def _combine(self, other: "PauliSum", sign: float) -> "PauliSum":
        if other.n != self.n:
            raise ValueError(f"qubit count mismatch: {self.n} vs {other.n}")
        return PauliSum(self.n, list(self._terms) + [(sign * c, t) for c, t in other._terms])

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return self._combine(other, 1.0)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self._combine(other, -1.0)

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum(self.n, [(scalar * c, t) for c, t in self._terms])

    __rmul__ = __mul__

    def __neg__(self) -> "PauliSum":
        return self * -1.0

    def one_norm(self) -> float:
        return float(sum(abs(c) for c, _ in self._terms))

    def frobenius_norm_sq(self) -> float:
        """``Tr[H^2]``, using trace orthogonality of Pauli strings."""
        return float((1 << self.n) * sum(c * c for c, _ in self._terms))

    def to_dense(self, dense_limit: int | None = None) -> np.ndarray:
        return to_dense(self, dense_limit)


def simplify(psum: PauliSum, tol: float = PRUNE_TOL) -> PauliSum:
    return PauliSum(psum.n, psum.terms, tol=tol)


def to_dense(psum: PauliSum, dense_limit: int | None = None) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a Pauli sum."""
    n = psum.n
    check_dense(n, dense_limit)
    dim = 1 << n
    idx = np.arange(dim, dtype=np.uint64)
    cols = idx.astype(np.intp)
    mat = np.zeros((dim, dim), dtype=complex)
    for c, term in psum.terms:
        rows = (idx ^ np.uint64(term.x)).astype(np.intp)
        mat[rows, cols] += c * _term_phases(term, idx)
    return mat


def pauli_decompose(matrix: np.ndarray, tol: float = PRUNE_TOL) -> tuple[PauliSum, float]:
    """Decompose a Hermitian matrix as ``sum + offset * I``.

    Coefficients are ``Tr[P M] / 2^n``; imaginary parts above ``1e-10`` mean
    the input was not Hermitian and raise ``ValueError``.
    """
    matrix = np.asarray(matrix)
    dim = matrix.shape[0]
    n = dim.bit_length() - 1
    if matrix.shape != (dim, dim) or (1 << n) != dim:
        raise ValueError("matrix must be square with power-of-two dimension")
    check_dense(n)
    idx = np.arange(dim, dtype=np.uint64)
    terms: list[tuple[float, PauliTerm]] = []
    offset = 0.0
    for x in range(dim):
        gathered = matrix[idx.astype(np.intp), (idx ^ np.uint64(x)).astype(np.intp)]
        for z in range(dim):
            term = PauliTerm(n, x, z)
            val = np.sum(_term_phases(term, idx) * gathered) / dim
            if abs(val.imag) > 1e-10:
                raise ValueError(f"matrix is not Hermitian (coefficient of {term.label} = {val})")
            if term.is_identity:
                offset = float(val.real)
            else:
                terms.append((float(val.real), term))
    return PauliSum(n, terms, tol=tol), offset


def commutation_matrix(paulis: Sequence[PauliTerm]) -> np.ndarray:
    """Boolean matrix ``[commutes(P_i, P_j)]``."""
    if not paulis:
        return np.zeros((0, 0), dtype=bool)
    xs = np.array([p.x for p in paulis], dtype=np.uint64)
    zs = np.array([p.z for p in paulis], dtype=np.uint64)
    return commutes_arrays(xs[:, None], zs[:, None], xs[None, :], zs[None, :])
