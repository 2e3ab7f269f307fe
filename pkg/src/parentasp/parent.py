"""
Parent Hamiltonians for arbitrary trial states.

Pipeline: measure the symmetrized Pauli covariance matrix ``A`` of a support
set ``S`` in the trial state, take its (numerical) null space, fold a
null-space combination ``H*[alpha] = sum_i alpha_i P_i`` into
``(H* - lambda)^2`` and pick ``alpha`` by minimizing a surrogate of the
Frobenius distance to the target Hamiltonian.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .ingest import QubitHamiltonian
from .pauli import (
    PauliSum,
    PauliTerm,
    _PHASE_ARRAY,
    check_dense,
    commutation_matrix,
    product_arrays,
)
from .state import StateVector, pauli_apply_array

log = logging.getLogger(__name__)

KERNEL_DELTA = 1e-8
DEFAULT_RHO = 1.0

EMPTY_KERNEL_REMEDIES = (
    "extend the Pauli support set S with additional operators until a nontrivial kernel appears",
    "raise the kernel threshold delta to retain near-null eigenvectors",
    "use a different support set, e.g. Pauli generators of the circuit preparing the trial state",
)


class EmptyKernelError(RuntimeError):
    """The covariance matrix has no eigenvalue at or below the threshold."""

    def __init__(self, smallest: float, delta: float):
        self.smallest = smallest
        self.delta = delta
        lines = [
            f"procedure unsuccessful: covariance matrix has no eigenvalue <= delta={delta:.3g} "
            f"(smallest eigenvalue {smallest:.6g})",
            "remediation options:",
        ]
        lines += [f"  ({k}) {r}" for k, r in enumerate(EMPTY_KERNEL_REMEDIES, start=1)]
        super().__init__("\n".join(lines))


class OptimizationError(RuntimeError):
    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


def default_c_grid() -> np.ndarray:
    mags = np.logspace(-2, 2, 21)
    return np.concatenate([-mags[::-1], mags])


@dataclass(frozen=True)
class CovarianceData:
    pauli_set: tuple[PauliTerm, ...]
    A: np.ndarray
    b: np.ndarray
    shots: int | None = None
    source_state_id: str = ""

    @property
    def m(self) -> int:
        return len(self.pauli_set)

    @property
    def n(self) -> int:
        return self.pauli_set[0].n

    @property
    def exact(self) -> bool:
        return self.shots is None

    def to_json(self) -> dict:
        return {
            "pauli_set": [p.label for p in self.pauli_set],
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "shots": self.shots,
            "source_state_id": self.source_state_id,
        }

    @classmethod
    def from_json(cls, doc) -> "CovarianceData":
        from .pauli import parse_pauli

        return cls(
            tuple(parse_pauli(p) for p in doc["pauli_set"]),
            np.array(doc["A"], dtype=float),
            np.array(doc["b"], dtype=float),
            doc.get("shots"),
            doc.get("source_state_id", ""),
        )


def _check_support(S: Sequence[PauliTerm], n: int | None = None) -> tuple[PauliTerm, ...]:
    S = tuple(S)
    if not S:
        raise ValueError("Pauli support set is empty")
    n = S[0].n if n is None else n
    for p in S:
        if p.n != n:
            raise ValueError(f"qubit count mismatch: {p.label} vs {n} qubits")
        if p.is_identity:
            raise ValueError("support set must not contain the identity")
    if len(set(S)) != len(S):
        raise ValueError("support set contains duplicate Pauli strings")
    return S


def build_covariance(S: Sequence[PauliTerm], psi: StateVector, source_state_id: str = "") -> CovarianceData:
    """``A_ij = Re<P_i P_j> - b_i b_j`` and ``b_i = <P_i>`` from the statevector."""
    S = _check_support(S, psi.n)
    amps = psi.amplitudes
    V = np.column_stack([pauli_apply_array(p, amps) for p in S])
    b = (amps.conj() @ V).real
    # <psi|P_i P_j|psi> = <P_i psi|P_j psi>
    G = (V.conj().T @ V).real
    A = G - np.outer(b, b)
    A = 0.5 * (A + A.T)
    return CovarianceData(S, A, b, None, source_state_id)


@dataclass(frozen=True)
class KernelBasis:
    E: np.ndarray
    delta: float
    eigenvalues: np.ndarray
    gap_above: float

    @property
    def dim(self) -> int:
        return self.E.shape[1]


def _fix_column_signs(E: np.ndarray) -> np.ndarray:
    E = E.copy()
    for k in range(E.shape[1]):
        col = E[:, k]
        j = int(np.flatnonzero(np.abs(col) >= np.abs(col).max() - 1e-12)[0])
        if col[j] < 0:
            E[:, k] = -col
    return E


def kernel_basis(cov: CovarianceData | np.ndarray, delta: float = KERNEL_DELTA) -> KernelBasis:
    """Orthonormal eigenvectors of ``A`` with eigenvalue ``<= delta``."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    A = cov.A if isinstance(cov, CovarianceData) else np.asarray(cov, dtype=float)
    mu, vecs = np.linalg.eigh(0.5 * (A + A.T))
    ell = int(np.sum(mu <= delta))
    if ell == 0:
        raise EmptyKernelError(float(mu[0]), delta)
    gap = float(mu[ell]) if ell < mu.size else math.inf
    return KernelBasis(_fix_column_signs(vecs[:, :ell]), float(delta), mu, gap)


@dataclass(frozen=True)
class ParentHamiltonian:
    alpha: np.ndarray
    lam: float
    proto: PauliSum
    folded: QubitHamiltonian
    cost_value: float = math.nan
    x: np.ndarray | None = None
    iterations: int = 0
    converged: bool = True
    info: dict = field(default_factory=dict)

    def with_cost(self, **kw) -> "ParentHamiltonian":
        return dataclasses.replace(self, **kw)


def fold(alpha, cov: CovarianceData) -> ParentHamiltonian:
    """Spectrum-folded parent ``(sum_i alpha_i P_i - lambda)^2`` with ``lambda = alpha . b``.

    The double sum keeps only commuting pairs: for anticommuting ``P_i, P_j``
    the two orderings cancel. Commuting distinct pairs contribute
    ``2 alpha_i alpha_j phase Q`` with real ``phase``; diagonal pairs give
    ``alpha_i^2 I``.
    """
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    S = cov.pauli_set
    m = len(S)
    if alpha.size != m:
        raise ValueError(f"alpha has length {alpha.size}, expected {m}")
    if not np.any(alpha):
        raise ValueError("alpha is the zero vector")
    n = S[0].n
    # exactly rounded sums keep the written operator independent of array alignment
    lam = math.fsum(alpha * cov.b)

    xs = np.array([p.x for p in S], dtype=np.uint64)
    zs = np.array([p.z for p in S], dtype=np.uint64)
    iu, ju = np.triu_indices(m, k=1)
    k, px, pz = product_arrays(xs[iu], zs[iu], xs[ju], zs[ju])
    comm = (k % 2) == 0
    phase = _PHASE_ARRAY[k[comm]].real
    pair_coeffs = 2.0 * alpha[iu[comm]] * alpha[ju[comm]] * phase

    coeffs = np.concatenate([pair_coeffs, -2.0 * lam * alpha])
    all_x = np.concatenate([px[comm], xs])
    all_z = np.concatenate([pz[comm], zs])
    offset = math.fsum(alpha * alpha) + lam * lam

    # merge duplicates before building PauliSum objects
    key = np.stack([all_z, all_x], axis=1)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inv.reshape(-1), coeffs)
    is_id = (uniq[:, 0] == 0) & (uniq[:, 1] == 0)
    offset += float(merged[is_id].sum())
    keep = ~is_id
    folded_sum = PauliSum.from_arrays(n, merged[keep], uniq[keep, 1], uniq[keep, 0])

    proto = PauliSum(n, zip(alpha.tolist(), S))
    folded = QubitHamiltonian(folded_sum, offset, {"kind": "parent", "lambda": lam})
    return ParentHamiltonian(alpha, lam, proto, folded)


def exact_cost(alpha, cov: CovarianceData, target: QubitHamiltonian, dense_limit: int | None = None) -> float:
    """``||H_P[alpha] - H_f||_F^2`` from dense matrices (validation path)."""
    check_dense(target.n, dense_limit)
    parent = fold(alpha, cov)
    diff = parent.folded.to_dense(dense_limit) - target.to_dense(dense_limit)
    return float(np.sum(np.abs(diff) ** 2))


def target_coefficients(S: Sequence[PauliTerm], target: QubitHamiltonian) -> np.ndarray:
    """``beta`` aligned with ``S``; zero for support elements absent from the target."""
    if S[0].n != target.n:
        raise ValueError(f"qubit count mismatch: support {S[0].n} vs target {target.n}")
    index = {p: i for i, p in enumerate(S)}
    beta = np.zeros(len(S))
    missing = []
    for c, t in target.sum.terms:
        i = index.get(t)
        if i is None:
            missing.append(t.label)
        else:
            beta[i] = c
    if missing:
        preview = ", ".join(missing[:5]) + (" ..." if len(missing) > 5 else "")
        raise ValueError(f"target has {len(missing)} terms outside the support set: {preview}")
    return beta


def penalty_matrix(S: Sequence[PauliTerm]) -> np.ndarray:
    """``delta_bar_ij = 1`` iff ``i != j`` and ``[P_i, P_j] = 0``."""
    D = commutation_matrix(list(S)).astype(float)
    np.fill_diagonal(D, 0.0)
    return D


@dataclass(frozen=True)
class ReducedProblem:
    """Surrogate cost in kernel coordinates ``alpha = E x``."""

    b_tilde: np.ndarray
    beta_tilde: np.ndarray
    delta_tilde: np.ndarray
    beta_norm_sq: float
    rho: float
    kernel: KernelBasis
    beta: np.ndarray

    @property
    def dim(self) -> int:
        return self.b_tilde.size

    def penalty_floor(self) -> float:
        """Smallest eigenvalue of ``rho * delta~`` on the complement of ``b~``.

        Along those directions the quartic term vanishes, so a negative value
        means the surrogate cost is unbounded below and only local minima
        near the starting point are meaningful.
        """
        if self.rho == 0 or self.dim < 2:
            return 0.0
        nb = np.linalg.norm(self.b_tilde)
        if nb == 0:
            M = self.delta_tilde
        else:
            u = self.b_tilde / nb
            P = np.eye(self.dim) - np.outer(u, u)
            M = P @ self.delta_tilde @ P
        return float(self.rho * np.linalg.eigvalsh(M)[0])

    @property
    def bounded(self) -> bool:
        return self.penalty_floor() >= -1e-12


def reduce(kernel: KernelBasis, cov: CovarianceData, target: QubitHamiltonian,
           rho: float = DEFAULT_RHO) -> ReducedProblem:
    if rho < 0:
        raise ValueError("penalty rho must be non-negative")
    if kernel.E.shape[0] != cov.m:
        raise ValueError(f"kernel basis has {kernel.E.shape[0]} rows, support set has {cov.m}")
    E = kernel.E
    beta = target_coefficients(cov.pauli_set, target)
    D = penalty_matrix(cov.pauli_set)
    dt = E.T @ D @ E
    return ReducedProblem(E.T @ cov.b, E.T @ beta, 0.5 * (dt + dt.T), float(beta @ beta), float(rho),
                          kernel, beta)


def reduced_cost(x, problem: ReducedProblem) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != problem.b_tilde.shape:
        raise ValueError(f"x has shape {x.shape}, expected {problem.b_tilde.shape}")
    u = problem.b_tilde @ x
    v = problem.beta_tilde @ x
    return float(4 * u * u * (x @ x) + 4 * u * v + problem.rho * (x @ problem.delta_tilde @ x))


def reduced_gradient(x, problem: ReducedProblem) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    bt, btt = problem.b_tilde, problem.beta_tilde
    u = bt @ x
    v = btt @ x
    q = x @ x
    return 8 * u * q * bt + 8 * u * u * x + 4 * v * bt + 4 * u * btt + 2 * problem.rho * (problem.delta_tilde @ x)


class InitialGuess(NamedTuple):
    x: np.ndarray
    c: float
    cost: float
    fallback: bool


def constrained_start(problem: ReducedProblem, c: float) -> np.ndarray:
    """Minimizer of ``||2 c x + beta~||^2`` subject to ``b~ . x = c``."""
    if c == 0:
        raise ValueError("c = 0 is excluded")
    bt, btt = problem.b_tilde, problem.beta_tilde
    mu = (c + (bt @ btt) / (2 * c)) / (bt @ bt)
    return -btt / (2 * c) + mu * bt


def init_alpha(problem: ReducedProblem, c_grid=None) -> InitialGuess:
    """Scan the fixed-``b . alpha`` family and keep the lowest surrogate cost."""
    grid = default_c_grid() if c_grid is None else np.asarray(c_grid, dtype=float)
    grid = grid[grid != 0]
    if grid.size == 0:
        raise ValueError("c grid has no nonzero entries")
    bt = problem.b_tilde
    if np.linalg.norm(bt) < 1e-14:
        btt = problem.beta_tilde
        nb = np.linalg.norm(btt)
        if nb > 0:
            x = -btt / nb
        else:
            x = np.zeros(problem.dim)
            x[0] = 1.0
        log.warning("b~ vanishes on the kernel; starting from the unit -beta~ direction")
        return InitialGuess(x, math.nan, reduced_cost(x, problem), True)
    best = None
    for c in grid:
        x = constrained_start(problem, float(c))
        cost = reduced_cost(x, problem)
        if best is None or cost < best.cost:
            best = InitialGuess(x, float(c), cost, False)
    return best


@dataclass(frozen=True)
class OptimizerOptions:
    max_iter: int = 5000
    gtol: float = 1e-9
    armijo: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 60
    max_growth: float = 1e2


class MinimizeResult(NamedTuple):
    x: np.ndarray
    iterations: int
    converged: bool
    trace: list
    diverged: bool = False


def minimize_reduced(problem: ReducedProblem, x0, options: OptimizerOptions | None = None) -> MinimizeResult:
    """Monotone gradient descent with Armijo backtracking.

    The first trial step of each line search is the Barzilai-Borwein step
    from the previous iterate pair. The run stops early, flagged as diverged,
    once ``||x||`` exceeds ``max_growth * max(1, ||x0||)``; that only happens
    when the surrogate is unbounded below.
    """
    opts = options or OptimizerOptions()
    x = np.asarray(x0, dtype=float).copy()
    f = reduced_cost(x, problem)
    g = reduced_gradient(x, problem)
    trace = [(0, f, float(np.linalg.norm(g)))]
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        raise OptimizationError("non-finite cost at the starting point", trace)
    step = 1.0 / max(1.0, float(np.linalg.norm(g)))
    radius = opts.max_growth * max(1.0, float(np.linalg.norm(x)))
    x_prev = g_prev = None
    accepted = step
    for it in range(1, opts.max_iter + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm < opts.gtol:
            return MinimizeResult(x, it - 1, True, trace)
        if np.linalg.norm(x) > radius:
            return MinimizeResult(x, it - 1, False, trace, True)
        if x_prev is not None:
            s = x - x_prev
            y = g - g_prev
            sy = s @ y
            if sy > 0:
                step = float(s @ s) / sy
            else:
                # negative curvature along the last step: BB is undefined, expand instead
                step = 2.0 * accepted
        t = step
        for _ in range(opts.max_backtracks):
            x_new = x - t * g
            f_new = reduced_cost(x_new, problem)
            if not np.isfinite(f_new):
                t *= opts.shrink
                continue
            if f_new <= f - opts.armijo * t * gnorm * gnorm:
                break
            t *= opts.shrink
        else:
            # no decrease possible at machine precision
            return MinimizeResult(x, it - 1, gnorm < 1e3 * opts.gtol, trace)
        g_new = reduced_gradient(x_new, problem)
        if not (np.isfinite(f_new) and np.all(np.isfinite(g_new))):
            trace.append((it, f_new, math.nan))
            raise OptimizationError(f"non-finite cost encountered at iteration {it}", trace)
        accepted = t
        x_prev, g_prev = x, g
        x, f, g = x_new, f_new, g_new
        trace.append((it, f, float(np.linalg.norm(g))))
    return MinimizeResult(x, opts.max_iter, bool(np.linalg.norm(g) < opts.gtol), trace)


def optimize_alpha(problem: ReducedProblem, x0, cov: CovarianceData,
                   options: OptimizerOptions | None = None) -> ParentHamiltonian:
    """Locally minimize the surrogate cost from ``x0`` and fold the result."""
    if problem.dim < 1:
        raise ValueError("empty kernel")
    x, iters, converged, trace, diverged = minimize_reduced(problem, x0, options)
    floor = problem.penalty_floor()
    if diverged:
        log.warning("surrogate cost is unbounded below for rho=%g (penalty floor %.3g); "
                    "optimization stopped after %d iterations, consider a smaller rho",
                    problem.rho, floor, iters)
    elif not converged:
        gnorm = trace[-1][2]
        (log.warning if not gnorm < 1e-6 else log.info)(
            "alpha optimization stopped after %d iterations with gradient norm %.3g", iters, gnorm)
    alpha = problem.kernel.E @ x
    if not np.any(alpha):
        raise OptimizationError("optimizer collapsed to alpha = 0", trace)
    parent = fold(alpha, cov)
    cost = reduced_cost(x, problem) + problem.beta_norm_sq
    return parent.with_cost(cost_value=float(cost), x=x, iterations=iters, converged=converged,
                            info={"initial_cost": trace[0][1] + problem.beta_norm_sq, "diverged": diverged,
                                  "penalty_floor": floor, "surrogate_bounded": floor >= -1e-12})


@dataclass
class ParentConfig:
    delta: float = KERNEL_DELTA
    rho: float = DEFAULT_RHO
    c_grid: Sequence[float] | None = None
    optimizer: OptimizerOptions = field(default_factory=OptimizerOptions)


def construct_parent(target: QubitHamiltonian, psi: StateVector, S: Sequence[PauliTerm] | None = None,
                     config: ParentConfig | None = None, cov: CovarianceData | None = None) -> ParentHamiltonian:
    """Covariance, kernel, reduction, initialization and optimization in one call.

    ``S`` defaults to the non-identity terms of ``target``.
    """
    cfg = config or ParentConfig()
    if cov is None:
        S = target.sum.paulis() if S is None else list(S)
        cov = build_covariance(S, psi)
    kernel = kernel_basis(cov, cfg.delta)
    problem = reduce(kernel, cov, target, cfg.rho)
    start = init_alpha(problem, cfg.c_grid)
    parent = optimize_alpha(problem, start.x, cov, cfg.optimizer)
    info = dict(parent.info)
    info.update({
        "kernel_dim": kernel.dim,
        "kernel_gap_above": kernel.gap_above,
        "kernel_eigenvalues": kernel.eigenvalues.tolist(),
        "init_c": start.c,
        "init_fallback": start.fallback,
        "delta": cfg.delta,
        "rho": cfg.rho,
    })
    return parent.with_cost(info=info)
