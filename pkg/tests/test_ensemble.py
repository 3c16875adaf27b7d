import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from qblockcode.ensemble import (
    BlockEnsemble,
    block_conditional_state,
    block_ensemble_state,
    check_density_matrix,
    ensemble_state,
    purity,
    spectrum,
)
from qblockcode.errors import DensityMatrixError, EnumerationGuardError, UndefinedConditionalError
from qblockcode.source_model import BlockConfig, random_source

seeds = st.integers(0, 2**32 - 1)


def _params(model):
    proc = model.process
    if hasattr(proc, "probs"):
        return "iid", {"probs": list(proc.probs)}
    return "markov", {"initial": list(proc.initial), "transition": [list(r) for r in proc.transition]}


def test_uniform_orthonormal_is_maximally_mixed(uniform_source):
    np.testing.assert_allclose(ensemble_state(uniform_source, 1), np.eye(2) / 2, atol=1e-12)


def test_schumacher_single_emission(schumacher_source):
    np.testing.assert_allclose(ensemble_state(schumacher_source, 1), [[0.75, 0.25], [0.25, 0.25]], atol=1e-12)


def test_deterministic_source_is_pure(deterministic_source):
    rho = ensemble_state(deterministic_source, 2)
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    np.testing.assert_allclose(rho, expected, atol=1e-12)


def test_markov_conditional_block(markov_source):
    rho = block_conditional_state(markov_source, BlockConfig(2, 2), 2, (1, 1))
    np.testing.assert_allclose(rho, np.diag([0.81, 0.09, 0.01, 0.09]), atol=1e-12)


def test_markov_block_ensemble(markov_source):
    rho = block_ensemble_state(markov_source, BlockConfig(2, 2), 2)
    np.testing.assert_allclose(rho, np.diag([0.45, 0.05, 0.05, 0.45]), atol=1e-12)


def test_first_block_is_ensemble_state(markov_source):
    cfg = BlockConfig(2, 2)
    be = BlockEnsemble(markov_source, cfg)
    assert np.array_equal(be.conditional_state(1, ()), ensemble_state(markov_source, 2))
    assert np.array_equal(be.block_state(1), ensemble_state(markov_source, 2))


def test_zero_probability_history(deterministic_source):
    be = BlockEnsemble(deterministic_source, BlockConfig(1, 2))
    with pytest.raises(UndefinedConditionalError):
        be.conditional_state(2, (2,))
    assert [h for h, _ in be.histories(2)] == [(1,)]


def test_guard(markov_source):
    with pytest.raises(EnumerationGuardError):
        BlockEnsemble(markov_source, BlockConfig(3, 3, max_enumeration=50)).joint(3)


def test_spectrum_diagonal_reorders():
    s = spectrum(np.diag([0.1, 0.9]))
    np.testing.assert_allclose(s.values, [0.9, 0.1])
    np.testing.assert_allclose(s.vectors, [[0, 1], [1, 0]], atol=1e-12)


def test_spectrum_schumacher_closed_form():
    s = spectrum(np.array([[0.75, 0.25], [0.25, 0.25]]))
    np.testing.assert_allclose(s.values, [(2 + math.sqrt(2)) / 4, (2 - math.sqrt(2)) / 4], atol=1e-12)


def test_degenerate_spectrum_is_deterministic():
    s = spectrum(np.eye(2) / 2)
    np.testing.assert_allclose(s.values, [0.5, 0.5])
    np.testing.assert_allclose(s.vectors, np.eye(2), atol=1e-12)
    # rotated input of the same degenerate matrix gives the same basis
    u = oracles.haar_unitary(np.random.default_rng(3), 2)
    s2 = spectrum(u @ (np.eye(2) / 2) @ u.conj().T)
    np.testing.assert_allclose(s2.vectors, np.eye(2), atol=1e-9)


def test_degenerate_markov_block_basis_order(markov_source):
    s = BlockEnsemble(markov_source, BlockConfig(2, 2)).block_spectrum(2)
    np.testing.assert_allclose(s.values, [0.45, 0.45, 0.05, 0.05], atol=1e-12)
    expected = np.eye(4)[:, [0, 3, 1, 2]]
    np.testing.assert_allclose(s.vectors, expected, atol=1e-12)


def test_phase_canonicalization():
    v = np.array([1j, 1]) / math.sqrt(2)
    rho = 0.8 * np.outer(v, v.conj()) + 0.2 * np.eye(2) / 2
    s = spectrum(rho)
    first = s.vectors[0, 0]
    assert abs(first.imag) < 1e-12 and first.real > 0


def test_density_matrix_validation():
    with pytest.raises(DensityMatrixError):
        check_density_matrix(np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(DensityMatrixError):
        check_density_matrix(np.diag([0.6, 0.6]))
    with pytest.raises(DensityMatrixError):
        spectrum(np.diag([1.1, -0.1]))


def test_tiny_negative_eigenvalues_are_clamped():
    s = spectrum(np.diag([1.0 + 5e-10, -5e-10]))
    assert s.values[-1] == 0.0


@given(seeds, st.sampled_from(["iid", "markov"]), st.integers(1, 2))
def test_ensemble_matches_oracle(seed, kind, q):
    model = random_source(np.random.default_rng(seed), 3, 2, kind)
    k, params = _params(model)
    np.testing.assert_allclose(ensemble_state(model, q), oracles.ensemble(model.alphabet.states, k, params, q), atol=1e-12)


@given(seeds, st.sampled_from(["iid", "markov"]))
def test_conditional_matches_oracle(seed, kind):
    model = random_source(np.random.default_rng(seed), 2, 2, kind)
    k, params = _params(model)
    be = BlockEnsemble(model, BlockConfig(2, 2))
    for hist, _ in be.histories(2):
        expected = oracles.block_conditional(model.alphabet.states, k, params, 2, hist)
        np.testing.assert_allclose(be.conditional_state(2, hist), expected, atol=1e-12)


@given(seeds, st.integers(1, 2), st.integers(2, 3))
def test_block_state_is_history_average(seed, l, m):
    model = random_source(np.random.default_rng(seed), 2, 2, "markov")
    be = BlockEnsemble(model, BlockConfig(l, m))
    for k in range(1, m + 1):
        avg = sum(p * be.conditional_state(k, h) for h, p in be.histories(k))
        assert np.linalg.norm(avg - be.block_state(k)) <= 1e-9


@given(seeds, st.integers(1, 2))
def test_iid_conditionals_all_equal(seed, l):
    model = random_source(np.random.default_rng(seed), 3, 2, "iid")
    be = BlockEnsemble(model, BlockConfig(l, 2))
    ref = ensemble_state(model, l)
    for k in (1, 2):
        for h, _ in be.histories(k):
            assert np.max(np.abs(be.conditional_state(k, h) - ref)) <= 1e-9


@given(seeds, st.sampled_from(["iid", "markov"]), st.integers(1, 3))
def test_spectrum_invariants(seed, kind, q):
    rho = ensemble_state(random_source(np.random.default_rng(seed), 3, 2, kind), q)
    s = spectrum(rho)
    assert np.all(np.diff(s.values) <= 0)
    assert np.all(s.values >= 0)
    assert math.fsum(s.values) == pytest.approx(1.0, abs=1e-9)
    gram = s.vectors.conj().T @ s.vectors
    assert np.max(np.abs(gram - np.eye(len(gram)))) <= 1e-9
    assert np.linalg.norm(s.reconstruct() - rho) <= 1e-8
    np.testing.assert_allclose(spectrum(s.reconstruct()).values, s.values, atol=1e-9)
    dim = len(rho)
    assert 1 / dim - 1e-9 <= purity(rho) <= 1 + 1e-9
