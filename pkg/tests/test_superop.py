import numpy as np
import pytest

from kdsim import algebra, superop as so
from kdsim.errors import NotAChannel
from kdsim.kd import BasisPair, KDDist, build_kd, marginals

X = algebra.wh_x(np.array([1]), 2)
Z = np.diag([1.0, -1.0])
H = algebra.hadamard()


def element_oracle(kraus, bp):
    """Superoperator elements from the explicit bra-ket formula, one by one."""
    D = bp.dim
    a = np.eye(D)
    b = bp.v
    out = np.zeros((D * D, D * D), dtype=complex)
    for i in range(D):
        for j in range(D):
            for k in range(D):
                for l in range(D):
                    val = sum(
                        (a[:, i] @ K @ a[:, k]) * (b[:, l].conj() @ K.conj().T @ b[:, j]) for K in kraus
                    )
                    out[i * D + j, k * D + l] = np.vdot(b[:, j], a[:, i]) / np.vdot(b[:, l], a[:, k]) * val
    return out


def amplitude_damping(g):
    return [np.array([[1, 0], [0, np.sqrt(1 - g)]]), np.array([[0, np.sqrt(g)], [0, 0]])]


def test_vectorize_order():
    q = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.array_equal(so.vectorize(KDDist(q)), [1, 2, 3, 4])
    assert np.array_equal(so.devectorize([1, 2, 3, 4]).q, q)


def test_identity_channel():
    bp = BasisPair.random(3, 1)
    e = so.superop_from_unitary(np.eye(3), bp)
    assert np.allclose(e.m, np.eye(9))
    assert so.entanglement_fidelity(e) == pytest.approx(1)
    assert so.inverse_relation_residual(np.eye(3), bp) < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_kraus_matches_element_oracle(d):
    bp = BasisPair.random(d, 7)
    kraus = amplitude_damping(0.3) if d == 2 else [algebra.random_unitary(3, 2)]
    assert np.allclose(so.superop_from_kraus(kraus, bp).m, element_oracle(kraus, bp), atol=1e-12)


def test_not_a_channel():
    with pytest.raises(NotAChannel):
        so.superop_from_kraus([2 * np.eye(2)], BasisPair.hadamard())


def test_x_and_z_permutations():
    bp = BasisPair.hadamard()
    swap = np.array([[0, 1], [1, 0]])
    assert np.allclose(so.superop_from_unitary(X, bp).m, np.kron(swap, np.eye(2)))
    assert np.allclose(so.superop_from_unitary(Z, bp).m, np.kron(np.eye(2), swap))


def test_hadamard_maps_to_hermitian_conjugate():
    bp = BasisPair.hadamard()
    e = so.superop_from_unitary(H, bp)
    assert not so.is_stochastic(e)
    for seed in range(5):
        dist = build_kd(algebra.random_density_matrix(2, seed), bp)
        assert np.allclose(e.apply(dist).q, dist.q.conj().T, atol=1e-12)


def test_entanglement_fidelity():
    assert so.entanglement_fidelity(so.superop_from_unitary(Z, BasisPair.hadamard())) == pytest.approx(0)
    u = algebra.random_unitary(3, 4)
    e = so.superop_from_unitary(u, BasisPair.qft(3))
    assert so.entanglement_fidelity(e) == pytest.approx(abs(np.trace(u)) ** 2 / 9)


def test_inverse_relation_and_mub_unitarity():
    u = algebra.random_unitary(3, 5)
    bp = BasisPair.qft(3)
    assert so.inverse_relation_residual(u, bp) <= 1e-10
    m = so.superop_from_unitary(u, bp).m
    assert np.allclose(m @ m.conj().T, np.eye(9), atol=1e-10)
    bp2 = BasisPair.random(3, 6)
    assert so.inverse_relation_residual(u, bp2) <= 1e-10
    m2 = so.superop_from_unitary(u, bp2).m
    assert not np.allclose(m2 @ m2.conj().T, np.eye(9), atol=1e-6)


def test_dual_vectors():
    bp = BasisPair.qft(3)
    fd = so.dual_vector(algebra.projector(bp.a_state(1)), bp)
    expected = np.zeros((3, 3))
    expected[1] = 1
    assert np.allclose(fd.f.reshape(3, 3), expected)
    assert np.allclose(so.dual_vector(np.eye(3), bp).f, 1)


def test_born_rule():
    bp = BasisPair.random(3, 9)
    rho = algebra.random_density_matrix(3, 10)
    dist = build_kd(rho, bp)
    fd = so.dual_vector(algebra.projector(bp.a_state(2)), bp)
    assert so.born_exact(fd, [], dist) == pytest.approx(marginals(dist)[0][2])
    f = algebra.projector(algebra.random_pure_state(3, 11))
    u1, u2 = algebra.random_unitary(3, 12), algebra.random_unitary(3, 13)
    fd = so.dual_vector(f, bp)
    e1, e2 = so.superop_from_unitary(u1, bp), so.superop_from_unitary(u2, bp)
    assert so.born_exact(fd, [e1], dist) == pytest.approx(np.trace(f @ u1 @ rho @ u1.conj().T).real, abs=1e-10)
    u = u2 @ u1
    assert so.born_exact(fd, [e1, e2], dist) == pytest.approx(np.trace(f @ u @ rho @ u.conj().T).real, abs=1e-10)


def test_column_sums():
    bp = BasisPair.random(2, 3)
    e = so.superop_from_kraus(amplitude_damping(0.5), bp)
    assert e.column_sum_error() < 1e-12


def test_classification():
    bp = BasisPair.hadamard()
    assert so.is_stochastic(so.superop_from_unitary(X, bp))
    cert = so.generalized_permutation_certificate(X, bp)
    assert cert.sigma_a == (1, 0) and cert.sigma_b == (0, 1)
    assert cert.action_residual(X, bp) < 1e-12
    assert so.generalized_permutation_certificate(H, bp) is None
    q3 = BasisPair.qft(3)
    e = so.superop_from_unitary(algebra.qft_matrix(3), q3)
    assert not so.is_stochastic(e)
    fixture = [q3.a_state(i) for i in range(3)] + [q3.b_state(j) for j in range(3)]
    assert so.is_positivity_preserving_on(algebra.qft_matrix(3), q3, fixture)
    assert so.induced_l1(e) == pytest.approx(max(np.abs(e.m[:, c]).sum() for c in range(9)))
