import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from stabgeom import convex as CV
from stabgeom.cliffstab import pauli_expectations, stabilizer_vertices
from stabgeom.qmat import ket_to_dm, trace_distance

from conftest import random_mixed, random_pure

SYS = {2: (2, 1), 3: (3, 1), 4: (2, 2)}


def _ntd_sdp(rho, vs):
    cp = pytest.importorskip("cvxpy")
    P = vs.projectors()
    d = rho.shape[0]
    w = cp.Variable(len(P), nonneg=True)
    sigma = sum(w[k] * P[k] for k in range(len(P)))
    T = cp.Variable((d, d), hermitian=True)
    cons = [cp.sum(w) == 1, T - (rho - sigma) >> 0, T + (rho - sigma) >> 0]
    prob = cp.Problem(cp.Minimize(0.5 * cp.real(cp.trace(T))), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


def test_hermitian_basis_orthonormal():
    for d in (2, 3, 4):
        B = CV.hermitian_basis(d)
        G = np.real(np.einsum("kij,lji->kl", B, B))
        assert np.allclose(G, np.eye(d * d))


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_ntd_matches_sdp_oracle(dim):
    vs = stabilizer_vertices(*SYS[dim])
    for seed in range(3):
        rho = ket_to_dm(random_pure(dim, seed))
        res = CV.ntd_minimize(rho, vs)
        assert abs(res.value - _ntd_sdp(rho, vs)) < 1e-5
        assert res.certificate.gap <= 1e-6
        assert res.certificate.dual <= res.value + 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4]))
def test_ntd_certificate(seed, dim):
    vs = stabilizer_vertices(*SYS[dim])
    rho = random_mixed(dim, seed)
    w, value, cert = CV.ntd_minimize(rho, vs)
    assert w.min() >= 0 and np.isclose(w.sum(), 1)
    sigma = CV.mixture(w, vs)
    assert np.isclose(trace_distance(rho, sigma), value, atol=1e-9)
    assert cert.gap <= 1e-6


def test_ntd_zero_inside():
    vs = stabilizer_vertices(2, 2)
    assert CV.ntd_minimize(np.eye(4) / 4, vs).value < 1e-9
    assert CV.ntd_minimize(ket_to_dm(vs.vertices[3]), vs).value < 1e-9


def test_rom_matches_highs():
    vs = stabilizer_vertices(2, 2)
    P = vs.projectors()
    A = np.array([pauli_expectations(p, 2) for p in P]).T
    for seed in range(4):
        rho = ket_to_dm(random_pure(4, seed))
        b = pauli_expectations(rho, 2)
        ref = linprog(np.ones(2 * len(P)), A_eq=np.hstack([A, -A]), b_eq=b, method="highs").fun
        res = CV.rom_minimize(rho, vs)
        assert np.isclose(res.value, ref, atol=1e-8)
        assert res.residual <= 1e-8
        assert res.certificate.dual <= res.value + 1e-9


def test_rom_is_one_inside():
    vs = stabilizer_vertices(3, 1)
    assert np.isclose(CV.rom_minimize(np.eye(3) / 3, vs).value, 1)


def test_membership_methods_agree():
    vs = stabilizer_vertices(2, 1)
    for seed in range(20):
        rho = random_mixed(2, seed)
        assert CV.polytope_membership(rho, vs) == CV.polytope_membership(rho, vs, method="ntd")


def test_gauge_against_bisection():
    vs = stabilizer_vertices(2, 2)
    for seed in range(5):
        rho = ket_to_dm(random_pure(4, seed))
        t = CV.depolarizing_gauge(rho, vs)
        mix = np.eye(4) / 4
        assert CV.polytope_membership(mix + (t - 1e-6) * (rho - mix), vs)
        assert not CV.polytope_membership(mix + (t + 1e-4) * (rho - mix), vs)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        CV.rom_minimize(np.eye(2) / 2, stabilizer_vertices(3, 1))


def test_sparse_vertex_mixture_is_certified_zero():
    # low-rank mixtures can put the barrier exactly on a vertex constraint
    vs = stabilizer_vertices(2, 3)
    g = np.random.default_rng(1)
    for _ in range(5):
        idx = g.choice(len(vs), 4, replace=False)
        rho = sum(w * ket_to_dm(vs.vertices[j]) for w, j in zip(g.dirichlet(np.ones(4)), idx))
        res = CV.ntd_minimize(rho, vs)
        assert res.value <= CV.NTD_TOL and res.certificate.status == "converged"


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4, 8]))
def test_certificate_primal_recomputes(seed, dim):
    vs = stabilizer_vertices(*{2: (2, 1), 3: (3, 1), 4: (2, 2), 8: (2, 3)}[dim])
    rho = ket_to_dm(random_pure(dim, seed))
    w, value, cert = CV.ntd_minimize(rho, vs)
    sigma = CV.mixture(w, vs)
    assert abs(0.5 * np.abs(np.linalg.eigvalsh(rho - sigma)).sum() - value) < 1e-10
    assert cert.dual <= value and cert.status == "converged"


def test_t_state_examples():
    from stabgeom.measures import t_state
    vs = stabilizer_vertices(2, 1)
    rho = ket_to_dm(t_state())
    assert not CV.polytope_membership(rho, vs)
    assert CV.polytope_membership(0.57 * rho + 0.43 * np.eye(2) / 2, vs)
    assert np.isclose(CV.rom_minimize(rho, vs).value, np.sqrt(3), atol=1e-8)
    assert np.isclose(CV.ntd_minimize(rho, vs).value, (np.sqrt(3) - 1) / (2 * np.sqrt(3)), atol=1e-6)


def test_ntd_monotone_under_stabilizer_channel():
    # trace out the second qubit and replace it with |+>
    from stabgeom.qmat import partial_trace
    vs = stabilizer_vertices(2, 2)
    plus = np.full((2, 2), 0.5)
    for seed in range(5):
        rho = ket_to_dm(random_pure(4, seed))
        out = np.kron(partial_trace(rho, [2, 2], [0]), plus)
        assert CV.ntd_minimize(out, vs).value <= CV.ntd_minimize(rho, vs).value + 2e-6
