import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacobi_ncft import ncft_gauge as ng
from jacobi_ncft import spectral_triple as sp


def dec_for(N, mu=1.0):
    G = ng.kinetic_reduced(mu, N)
    return G, sp.decompose(G)


def test_decompose_n2():
    G, dec = dec_for(2)
    assert np.allclose(dec.lambdas, [1, 3], atol=1e-15)
    v0, v1 = dec.vectors[:, 0], dec.vectors[:, 1]
    assert np.allclose(v0, np.array([1, 1]) / math.sqrt(2), atol=1e-15)
    assert np.allclose(np.abs(v1), np.array([1, 1]) / math.sqrt(2), atol=1e-15)
    assert v1[0] * v1[1] < 0
    assert np.allclose(dec.reconstruct(), [[2, -1], [-1, 2]], atol=1e-15)


def test_decompose_n1():
    _, dec = dec_for(1, 2.5)
    assert np.allclose(dec.lambdas, [5.0])
    assert np.allclose(dec.vectors, [[1.0]])


def test_dirac_n1():
    _, dec = dec_for(1, 1.5)
    assert sp.dirac_sqrt(dec).matrix[0, 0] == pytest.approx(math.sqrt(3.0))


def test_dirac_n2(oracles):
    _, dec = dec_for(2)
    D = sp.dirac_sqrt(dec).matrix
    assert np.allclose(D, oracles["dirac_2x2"], atol=1e-15)
    s3 = math.sqrt(3)
    assert np.allclose(D, [[(1 + s3) / 2, (1 - s3) / 2], [(1 - s3) / 2, (1 + s3) / 2]], atol=1e-15)


def test_dirac_kernel_trivial_with_plus_signs():
    _, dec = dec_for(20)
    assert np.min(np.linalg.eigvalsh(sp.dirac_sqrt(dec).matrix)) > 0


def test_dirac_rejects_bad_signs():
    _, dec = dec_for(3)
    with pytest.raises(ValueError):
        sp.dirac_sqrt(dec, [1, 0, 1])
    bad = sp.SpectralDecomposition(2, np.array([1.0, -1.0]), np.eye(2))
    with pytest.raises(ValueError):
        sp.dirac_sqrt(bad)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 128), st.integers(0, 2 ** 32 - 1))
def test_dirac_squares_to_g(N, seed):
    G, dec = dec_for(N, 1.7)
    signs = np.random.default_rng(seed).choice([-1, 1], size=N)
    D = sp.dirac_sqrt(dec, signs).matrix
    assert np.linalg.norm(D @ D - G.to_dense()) <= 1e-10
    assert np.array_equal(D, D.T)


def test_reconstruction_and_orthonormality():
    for N in (1, 5, 64, 128):
        G, dec = dec_for(N)
        assert sp.reconstruction_residual(dec, G) <= 1e-10
        assert dec.orthonormality_residual() <= 1e-10


def test_isometry_trivial_and_mixed():
    _, dec = dec_for(2)
    assert np.allclose(sp.isometry_J(dec, [1, 1]), np.eye(2), atol=1e-15)
    assert np.allclose(sp.isometry_J(dec, [-1, -1]), -np.eye(2), atol=1e-15)
    J = sp.isometry_J(dec, [1, -1])
    assert np.allclose(J, dec.projector(0) - dec.projector(1))
    D = sp.dirac_sqrt(dec).matrix
    assert np.max(np.abs(J @ D - D @ J)) <= 1e-12
    assert np.max(np.abs(J @ J - np.eye(2))) <= 1e-12


def test_clifford_relations_exact():
    cl = sp.clifford_rep()
    assert cl.anticommutator_residual() == 0
    assert np.array_equal(cl.grading, -np.kron(sp.SIGMA3, sp.SIGMA3))
    assert np.array_equal(cl.grading @ cl.grading, np.eye(4))
    assert np.array_equal(sp.SIGMA3, 1j * sp.SIGMA1 @ sp.SIGMA2)


def test_gamma2_conjugate_product():
    g2 = sp.clifford_rep().gamma[1]
    assert np.array_equal(g2 @ np.conj(g2), -np.eye(4))


@pytest.mark.parametrize("N", [1, 2, 8, 32])
def test_ko_relations(N):
    _, dec = dec_for(N)
    res = sp.ko_relations(sp.dirac_sqrt(dec), sp.clifford_rep())
    assert len(res) == 5
    assert max(res.values()) <= 1e-13
    assert res["Gamma^2 = 1"] == 0 and res["J^2 = -1"] == 0


def test_ko_relations_random_symmetric_d():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 6))
    D = sp.DiracTruncation(6, A + A.T, ())
    assert max(sp.ko_relations(D, sp.clifford_rep()).values()) <= 1e-14


def test_antilinear_composition():
    L = np.array([[0, 1j], [-1j, 0]])
    J = sp.AntilinearOperator(L)
    JJ = J.then(J)
    assert not JJ.conjugate
    x = np.array([1 + 2j, 3 - 1j])
    assert np.allclose(JJ(x), J(J(x)))
    assert np.allclose(J(1j * x), -1j * J(x))


def test_commutant_witness():
    for N in (2, 5, 40):
        _, dec = dec_for(N)
        a, comm, dist = sp.commutant_witness(dec, 0)
        assert comm <= 1e-12
        assert dist == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(a @ a, a)


def test_commutant_witness_rejects_n1():
    _, dec = dec_for(1)
    with pytest.raises(ValueError):
        sp.commutant_witness(dec, 0)


def test_non_spectral_projector_does_not_commute():
    _, dec = dec_for(6)
    D = sp.dirac_sqrt(dec).matrix
    v = np.random.default_rng(0).standard_normal(6)
    v /= np.linalg.norm(v)
    P = np.outer(v, v)
    assert np.linalg.norm(D @ P - P @ D, 2) > 1e-3


def test_hs_trivial_cases():
    _, dec = dec_for(5)
    D = sp.dirac_sqrt(dec).matrix
    r0 = sp.hs_bound_check(D, np.zeros((5, 5)), 0.3j)
    assert r0.comm_op == r0.comm_hs == r0.comm_bound == r0.res_lhs == 0
    rD = sp.hs_bound_check(D, D, 0.3j)
    assert rD.comm_hs <= 1e-13 and rD.min_slack >= 0


def test_hs_rejects_spectral_z():
    _, dec = dec_for(3)
    D = sp.dirac_sqrt(dec)
    with pytest.raises(ValueError):
        sp.hs_bound_check(D.matrix, np.eye(3), math.sqrt(dec.lambdas[1]))


def test_hs_random_sweep():
    _, dec = dec_for(32)
    D = sp.dirac_sqrt(dec).matrix
    rng = np.random.default_rng(11)
    slack = min(
        sp.hs_bound_check(D, rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32)),
                          complex(rng.uniform(0, 2), rng.uniform(0.05, 1))).min_slack
        for _ in range(100)
    )
    assert slack >= 0


def test_strong_convergence_finite_support():
    out = sp.strong_convergence_profile(lambda m: 1.0 if m < 3 else 0.0, [5, 8])
    assert out.tolist() == [0.0, 0.0]


def test_strong_convergence_geometric():
    levels = list(range(2, 30))
    out = sp.strong_convergence_profile(lambda m: 2.0 ** -m, levels)
    assert np.all(np.diff(out) <= 0)
    ratio = out[1:] / out[:-1]
    assert np.allclose(ratio, 0.5, rtol=1e-10)
    assert np.allclose(out, math.sqrt(4 / 3) * 2.0 ** -np.array(levels), rtol=1e-12)
    assert out[-1] < 1e-8


def test_strong_convergence_harmonic_monotone():
    out = sp.strong_convergence_profile(lambda m: 1.0 / (m + 1), [2, 4, 8, 16, 32, 64])
    assert np.all(np.diff(out) < 0)
    assert out[-1] < out[0] / 20


def test_strong_convergence_matches_dense_window():
    f = lambda m: 1.0 / (m + 1) ** 2
    N, W = 10, 4000
    fv = np.array([f(m) for m in range(W)])
    G = ng.kinetic_reduced(1.0, W).to_dense()
    PiG = np.zeros_like(G)
    PiG[:N, :N] = G[:N, :N]
    ref = np.linalg.norm(((PiG - G) @ fv)[: W - 1])
    assert sp.strong_convergence_profile(f, [N])[0] == pytest.approx(ref, rel=1e-8)


def test_strong_convergence_rejects_non_summable():
    with pytest.raises(ValueError):
        sp.strong_convergence_profile(lambda m: 1.0, [4])
    with pytest.raises(ValueError):
        sp.strong_convergence_profile(lambda m: 1.0 / math.sqrt(m + 1), [4])
