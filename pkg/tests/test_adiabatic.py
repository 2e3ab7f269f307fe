import math

import numpy as np
import pytest

from parentasp.adiabatic import (
    Schedule,
    TrotterPlan,
    ZeroGapError,
    analyze,
    interpolate,
    jordan_bound,
    jordan_bound_from_gaps,
    reference_evolve,
    trotter_convergence,
    trotter_evolve,
)
from parentasp.ingest import QubitHamiltonian, builtin_system
from parentasp.state import StateVector, evolve_exact

from oracles import two_level_t_est


@pytest.fixture
def one_qubit():
    system = builtin_system("one-qubit-zx")
    return system.initial, system.target


def test_schedule_validation(one_qubit):
    hi, hf = one_qubit
    with pytest.raises(ValueError, match="endpoints"):
        Schedule(hi, hf, np.linspace(0.1, 1, 5))
    with pytest.raises(ValueError, match="ascending"):
        Schedule(hi, hf, np.array([0.0, 0.6, 0.5, 1.0]))
    with pytest.raises(ValueError, match="mismatch"):
        Schedule(hi, QubitHamiltonian.from_labels([(1.0, "XX")]))


def test_interpolate_endpoints(one_qubit):
    sched = Schedule.uniform(*one_qubit)
    assert interpolate(sched, 0.0) is sched.H_i
    assert interpolate(sched, 1.0) is sched.H_f
    np.testing.assert_allclose(interpolate(sched, 0.25).to_dense(),
                               0.75 * sched.H_i.to_dense() + 0.25 * sched.H_f.to_dense())


def test_two_level_estimate_matches_analytic(one_qubit):
    sched = Schedule.uniform(*one_qubit, points=201)
    diag = analyze(sched)
    t_ref, gaps = two_level_t_est(sched.s_grid)
    assert diag.t_est == pytest.approx(t_ref, rel=1e-10)
    np.testing.assert_allclose(diag.gaps, gaps, atol=1e-12)


def test_reversed_schedule_mirrors_gaps(one_qubit):
    sched = Schedule.uniform(*one_qubit, points=51)
    a = analyze(sched)
    b = analyze(sched.reversed())
    np.testing.assert_allclose(a.gaps, b.gaps[::-1], atol=1e-12)


def test_identical_endpoints_give_zero_estimate(one_qubit):
    hi, _ = one_qubit
    diag = analyze(Schedule.uniform(hi, hi, 11))
    assert diag.t_est == 0.0
    assert jordan_bound(Schedule.uniform(hi, hi, 11), 3.0, diag) == 0.0


def test_degenerate_uncoupled_cluster_is_skipped(one_qubit):
    # a spectator qubit doubles every level but D never touches it
    hi = QubitHamiltonian.from_labels([(-1.0, "ZI")])
    hf = QubitHamiltonian.from_labels([(-1.0, "XI")])
    diag = analyze(Schedule.uniform(hi, hf, 11))
    assert not diag.t_est_infinite
    assert len(diag.skipped_clusters) == 11
    assert diag.t_est == pytest.approx(analyze(Schedule.uniform(*one_qubit, points=11)).t_est, rel=1e-10)


def test_degenerate_coupled_is_infinite():
    hi = QubitHamiltonian.from_labels([(-1.0, "ZI")])
    hf = QubitHamiltonian.from_labels([(-1.0, "XI"), (0.3, "IX")])
    diag = analyze(Schedule.uniform(hi, hf, 11))
    assert diag.t_est_infinite
    assert math.isinf(diag.t_est)


def test_jordan_bound_analytic(one_qubit):
    # f1 = ||Z - X|| = sqrt 2, gap = 2r; 5 f1^2 int 1/(8 r^3) ds = (5/4) * 2 = 2.5
    exact = math.sqrt(2) / 4 * 2 + 2.5
    sched = Schedule.uniform(*one_qubit, points=2001)
    assert jordan_bound(sched, 1.0) == pytest.approx(exact, rel=1e-6)
    assert jordan_bound(sched, 4.0) == pytest.approx(exact / 4, rel=1e-6)


def test_jordan_bound_zero_gap():
    s = np.linspace(0, 1, 5)
    with pytest.raises(ZeroGapError):
        jordan_bound_from_gaps(s, np.array([1.0, 0.5, 0.0, 0.5, 1.0]), 1.0, 1.0)
    with pytest.raises(ValueError):
        jordan_bound_from_gaps(s, np.ones(5), 1.0, 0.0)


def test_trotter_single_step_is_one_factor(one_qubit):
    sched = Schedule.uniform(*one_qubit)
    psi = StateVector.basis("0")
    out = trotter_evolve(sched, TrotterPlan(0.7, 1), psi)
    ref = evolve_exact(sched.H_i.sum, 0.7, psi, sched.H_i.identity_offset)
    np.testing.assert_allclose(out.amplitudes, ref.amplitudes, atol=1e-12)


def test_trotter_modes_agree_for_commuting_terms():
    hi = QubitHamiltonian.from_labels([(-1.0, "ZI"), (-0.5, "IZ")])
    hf = QubitHamiltonian.from_labels([(-1.0, "ZZ"), (0.2, "ZI")])
    sched = Schedule.uniform(hi, hf)
    psi = StateVector.basis("00")
    a = trotter_evolve(sched, TrotterPlan(3.0, 10, "exact-factor"), psi)
    b = trotter_evolve(sched, TrotterPlan(3.0, 10, "pauli-split"), psi)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)


def test_trotter_plan_validation():
    with pytest.raises(ValueError):
        TrotterPlan(1.0, 0)
    with pytest.raises(ValueError):
        TrotterPlan(1.0, 4, "second-order")


def test_slow_evolution_reaches_ground_state(one_qubit):
    sched = Schedule.uniform(*one_qubit)
    diag = analyze(sched)
    T = 10 * diag.t_est
    rows = trotter_convergence(sched, T, [512], StateVector.basis("0"))
    assert rows["infidelity"][0] < 0.1


def test_asp_end_to_end_on_ch2_like():
    from parentasp.parent import ParentConfig, construct_parent
    from parentasp.trial import build_trial

    system = builtin_system("ch2-like")
    psi = build_trial(system.trials[0], system.target)
    parent = construct_parent(system.target, psi, config=ParentConfig(rho=0.1))
    sched = Schedule.uniform(parent.folded, system.target)
    diag = analyze(sched)
    # the trial state is a zero-energy ground state of the parent by construction
    assert np.linalg.norm(parent.folded.to_dense() @ psi.amplitudes) < 1e-8
    rows = trotter_convergence(sched, 10 * diag.t_est, [400], psi)
    assert 1 - rows["infidelity"][0] >= 0.9


def test_reference_is_converged(one_qubit):
    sched = Schedule.uniform(*one_qubit)
    psi = StateVector.basis("0")
    a = reference_evolve(sched, 5.0, psi, steps=4096)
    b = reference_evolve(sched, 5.0, psi, steps=8192)
    assert np.linalg.norm(a.amplitudes - b.amplitudes) < 1e-6
