import itertools

import numpy as np
import pytest

from parentasp.noise import davis_kahan_check, entry_variances, noise_study, sample_covariance
from parentasp.parent import build_covariance
from parentasp.pauli import parse_pauli
from parentasp.state import StateVector

from oracles import random_state

TWO_QUBIT = [parse_pauli("".join(t)) for t in itertools.product("IXYZ", repeat=2)][1:]
BELL = StateVector(np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_sampling_is_deterministic_per_seed():
    a = sample_covariance(TWO_QUBIT, BELL, 500, seed=3)
    b = sample_covariance(TWO_QUBIT, BELL, 500, seed=3)
    c = sample_covariance(TWO_QUBIT, BELL, 500, seed=4)
    np.testing.assert_array_equal(a.A, b.A)
    assert not np.array_equal(a.A, c.A)
    assert a.shots == 500 and not a.exact


def test_sampled_matrix_structure():
    rng = np.random.default_rng(0)
    psi = StateVector(random_state(rng, 2))
    cov = sample_covariance(TWO_QUBIT, psi, 200, seed=1)
    np.testing.assert_array_equal(cov.A, cov.A.T)
    assert np.all(np.abs(cov.b) <= 1)
    # diagonal is the plug-in variance 1 - b^2
    np.testing.assert_allclose(np.diag(cov.A), 1 - cov.b ** 2)
    # each entry is a product estimate minus a product of means, bounded by 2
    assert np.all(np.abs(cov.A) <= 2)


def test_deterministic_outcomes_have_no_noise():
    cov = sample_covariance([parse_pauli(x) for x in ("XX", "ZZ", "YY")], BELL, 10, seed=0)
    exact = build_covariance([parse_pauli(x) for x in ("XX", "ZZ", "YY")], BELL)
    np.testing.assert_allclose(cov.A, exact.A, atol=1e-12)
    np.testing.assert_allclose(cov.b, exact.b, atol=1e-15)


def test_sampled_mean_is_unbiased_for_b():
    rng = np.random.default_rng(2)
    psi = StateVector(random_state(rng, 2))
    exact = build_covariance(TWO_QUBIT, psi)
    mean_b = np.mean([sample_covariance(TWO_QUBIT, psi, 400, seed=s).b for s in range(200)], axis=0)
    np.testing.assert_allclose(mean_b, exact.b, atol=0.02)


def test_entry_variances_match_empirical():
    rng = np.random.default_rng(5)
    psi = StateVector(random_state(rng, 2))
    exact = build_covariance(TWO_QUBIT, psi)
    shots = 2000
    samples = np.array([sample_covariance(TWO_QUBIT, psi, shots, seed=s).A for s in range(300)])
    emp = samples.var(axis=0) * shots
    pred = entry_variances(exact)
    mask = pred > 0.05
    np.testing.assert_allclose(emp[mask], pred[mask], rtol=0.35)


def test_davis_kahan_report_fields():
    rng = np.random.default_rng(7)
    psi = StateVector(random_state(rng, 2))
    exact = build_covariance(TWO_QUBIT, psi)
    sampled = sample_covariance(TWO_QUBIT, psi, 50000, seed=0)
    rep = davis_kahan_check(exact, sampled, 0.05)
    assert rep.applicable and rep.passed and not rep.vacuous
    assert rep.kernel_dim_exact == rep.kernel_dim_sampled
    assert rep.measured <= rep.bound


def test_davis_kahan_symmetric_perturbation_oracle():
    rng = np.random.default_rng(9)
    U, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    A = U @ np.diag([0, 0, 1, 2, 3, 4.0]) @ U.T
    for k in range(20):
        E = rng.normal(size=(6, 6)) * 0.05
        dA = 0.5 * (E + E.T)
        rep = davis_kahan_check(A, A + dA, 0.2)
        assert rep.gamma == pytest.approx(1.0)
        if rep.gamma - rep.delta > rep.perturbation_norm:
            assert rep.passed


def test_davis_kahan_inapplicable():
    rep = davis_kahan_check(np.zeros((2, 2)), np.eye(2) * 1e-3, 1e-2)
    assert not rep.applicable
    assert "gap" in rep.message


def test_noise_study_json():
    study = noise_study(TWO_QUBIT, BELL, 1000, 0, 0.05)
    doc = study.to_json()
    assert doc["m"] == 15 and doc["shots"] == 1000
    assert doc["delta_A_frobenius_sq"] == pytest.approx(study.frobenius_norm ** 2)
    assert doc["davis_kahan"]["passed"]


def test_footnote_estimate_within_factor_three():
    studies = [noise_study(TWO_QUBIT, BELL, 1000, s, 0.05) for s in range(20)]
    observed = np.mean([s.frobenius_norm ** 2 for s in studies])
    estimate = np.mean([s.footnote_estimate for s in studies])
    assert estimate / 3 <= observed <= 3 * estimate
