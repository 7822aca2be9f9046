import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stabgeom import qmat as Q
from stabgeom.cliffstab import I2, X, Z

from conftest import random_hermitian, random_mixed, random_pure

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def test_tensor_identity_and_blocks():
    assert np.allclose(Q.tensor(I2, I2), np.eye(4))
    zx = Q.tensor(Z, X)
    assert np.allclose(zx[:2, :2], X) and np.allclose(zx[2:, 2:], -X)
    assert np.allclose(Q.tensor(Q.ket_to_dm(KET0), Q.ket_to_dm(KET1)), np.diag([0, 1, 0, 0]))


def test_tensor_accepts_list():
    assert np.allclose(Q.tensor([X, X, X]), np.kron(X, np.kron(X, X)))


def test_partial_trace_examples():
    rho = Q.ket_to_dm(np.kron(KET0, KET0))
    assert np.allclose(Q.partial_trace(rho, [2, 2], [0]), Q.ket_to_dm(KET0))
    assert np.allclose(Q.partial_trace(Q.ket_to_dm(PHI_PLUS), [2, 2], [0]), np.eye(2) / 2)
    with pytest.raises(ValueError):
        Q.partial_trace(rho, [2, 3], [0])
    with pytest.raises(ValueError):
        Q.partial_trace(rho, [2, 2], [2])


def test_partial_trace_of_product_recovers_factors():
    a, b, c = random_mixed(2, 1), random_mixed(3, 2), random_mixed(2, 3)
    rho = Q.tensor(a, b, c)
    assert np.allclose(Q.partial_trace(rho, [2, 3, 2], [1]), b)
    assert np.allclose(Q.partial_trace(rho, [2, 3, 2], [2, 0]), np.kron(a, c))
    assert np.isclose(Q.partial_trace(rho, [2, 3, 2], []).item(), 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([(2, 2), (2, 2, 2), (3, 2), (2, 3)]))
def test_partial_trace_preserves_trace_and_positivity(seed, dims):
    D = int(np.prod(dims))
    rho = random_mixed(D, seed)
    red = Q.partial_trace(rho, dims, [0])
    assert np.isclose(np.trace(red), 1)
    assert np.linalg.eigvalsh(red).min() > -1e-12


def test_eigh_sorted_descending_and_rejects_non_hermitian():
    h = random_hermitian(5, 0)
    w, v = Q.eigh(h)
    assert np.all(np.diff(w) <= 1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, h)
    with pytest.raises(ValueError):
        Q.eigh(np.array([[0, 1], [0, 0]]))


def test_trace_norm_and_distance():
    assert np.isclose(Q.trace_norm(Z), 2)
    assert np.isclose(Q.trace_norm(np.array([[0, 1], [0, 0]])), 1)
    assert np.isclose(Q.trace_distance(KET0, KET1), 1)
    assert np.isclose(Q.trace_distance(KET0, np.eye(2) / 2), 0.5)
    with pytest.raises(ValueError):
        Q.trace_distance(KET0, PHI_PLUS)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_pure_trace_distance_matches_fidelity(seed):
    psi, phi = random_pure(4, seed), random_pure(4, seed + 1)
    assert np.isclose(Q.trace_distance(psi, phi), np.sqrt(1 - Q.fidelity_pure(psi, phi)))


def test_entropies():
    assert Q.von_neumann_entropy(Q.ket_to_dm(KET0)) == 0
    assert np.isclose(Q.von_neumann_entropy(np.eye(4) / 4), 2)
    assert np.isclose(Q.entropy_of([0.5, 0.5, 0]), 1)


def test_state_validation():
    with pytest.raises(Q.StateError):
        Q.as_pure([1, 1])
    with pytest.raises(Q.StateError):
        Q.as_density(np.diag([1.0, 0.5]))
    with pytest.raises(Q.StateError):
        Q.as_density(np.diag([1.5, -0.5]))
    with pytest.raises(Q.StateError):
        Q.as_density(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(Q.StateError):
        Q.normalize([0, 0])
    tiny = np.diag([1 + 1e-11, -1e-11])
    rho = Q.as_density(tiny)
    assert np.linalg.eigvalsh(rho).min() >= 0


def test_phase_handling():
    psi = random_pure(3, 7)
    phi = np.exp(0.7j) * psi
    assert Q.states_equal_up_to_phase(psi, phi)
    assert Q.phase_key(psi) == Q.phase_key(phi)
    assert np.allclose(Q.canonical_phase(phi), Q.canonical_phase(psi))
