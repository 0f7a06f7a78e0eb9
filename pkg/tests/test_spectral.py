import numpy as np
import pytest

from kdsim import algebra, spectral as sp
from kdsim.errors import EvenDimension, InvalidState, WrongBasisFamily
from kdsim.kd import BasisPair, KDDist, build_kd


def wh_trace_oracle(rho, d, n):
    """``d^-n Tr(rho Z^a X^b)`` from explicit Weyl-Heisenberg matrices."""
    digits = algebra.digit_table(d, n)
    D = d**n
    out = np.zeros((D, D), dtype=complex)
    for ia, a in enumerate(digits):
        for ib, b in enumerate(digits):
            out[ia, ib] = np.trace(rho @ algebra.wh_z(a, d) @ algebra.wh_x(b, d)) / D
    return out


def wigner_oracle(rho, d, n):
    digits = algebra.digit_table(d, n)
    D = d**n
    w = np.zeros((D, D))
    for ip, p in enumerate(digits):
        for iq, q in enumerate(digits):
            w[ip, iq] = np.trace(rho @ sp.phase_point_operator(p, q, d)).real / D
    return w


def test_qft_family():
    assert sp.qft_family(BasisPair.qft(3, 2)) == (3, 2)
    assert sp.qft_family(BasisPair(algebra.qft_matrix(5))) == (5, 1)
    with pytest.raises(WrongBasisFamily):
        sp.qft_family(BasisPair.random(3, 1))


def test_hermiticity_residual():
    bp = BasisPair.qft(3)
    rho = algebra.random_density_matrix(3, 2)
    assert sp.hermiticity_residual(build_kd(rho, bp), bp) <= 1e-10
    bad = rho.copy()
    bad[0, 1] += 0.2j
    bad[1, 0] += 0.2j  # anti-Hermitian perturbation, trace unchanged
    assert sp.hermiticity_residual(KDDist(bp.v.conj() * (bad @ bp.v)), bp) > 1e-3
    q = build_kd(rho, bp).q.copy()
    q[1, 2] += 0.01
    assert sp.hermiticity_residual(KDDist(q), bp) >= 0.005


def test_hat_dft_of_uniform_table():
    qhat = sp.hat_dft(KDDist(np.full((2, 2), 0.25)), BasisPair.qft(2))
    expected = np.zeros((2, 2))
    expected[0, 0] = 1
    assert np.allclose(qhat, expected)


def test_hat_dft_matches_direct_sum():
    d, n = 3, 2
    bp = BasisPair.qft(d, n)
    q = build_kd(algebra.random_density_matrix(9, 1), bp).q
    digits = algebra.digit_table(d, n)
    x, y = 4, 7
    direct = sum(
        np.exp(-2j * np.pi * (digits[a] @ digits[x] + digits[b] @ digits[y]) / d) * q[a, b]
        for a in range(9)
        for b in range(9)
    )
    assert np.isclose(sp.hat_dft(KDDist(q), bp)[x, y], direct)


@pytest.mark.parametrize("d,n", [(2, 1), (3, 1), (4, 1), (5, 1), (2, 2), (3, 2)])
def test_self_similarity(d, n):
    bp = BasisPair.qft(d, n)
    D = d**n
    q = build_kd(np.eye(D) / D, bp)
    assert sp.self_similarity_residual(sp.hat_dft(q, bp), d, n) < 1e-12
    for seed in range(3):
        q = build_kd(algebra.random_pure_state(D, seed), bp)
        qhat = sp.hat_dft(q, bp)
        assert sp.self_similarity_residual(qhat, d, n) <= 1e-10
        assert np.allclose(sp.complete_from_fundamental(qhat, d, n), qhat, atol=1e-12)
    bad = q.q.copy()
    bad[0, 1] += 0.05j
    assert sp.self_similarity_residual(sp.hat_dft_table(bad, d, n), d, n) > 1e-4


@pytest.mark.parametrize("d,n", [(2, 1), (3, 1), (3, 2)])
def test_tilde_is_wh_expectation(d, n):
    bp = BasisPair.qft(d, n)
    rho = algebra.random_density_matrix(d**n, 3)
    t = sp.tilde_dft(build_kd(rho, bp), bp)
    assert np.allclose(t.values.conj(), wh_trace_oracle(rho, d, n), atol=1e-12)
    assert np.isclose(t.values[0, 0], d**-n)


def test_tilde_ground_state_d3():
    bp = BasisPair.qft(3)
    t = sp.tilde_dft(build_kd(np.array([1, 0, 0]), bp), bp).values
    assert np.allclose(t[:, 0], 1 / 3) and np.allclose(t[:, 1:], 0)
    assert np.isclose(sp.phased_wh_table(sp.tilde_dft(build_kd(np.array([1, 0, 0]), bp), bp)).values[0, 0], 1 / 3)


def test_wigner_values():
    bp = BasisPair.qft(3)
    w = sp.kd_to_wigner(build_kd(np.eye(3) / 3, bp), bp)
    assert np.allclose(w.w, 1 / 9)
    w0 = sp.kd_to_wigner(build_kd(np.array([1, 0, 0]), bp), bp).w
    assert np.allclose(w0, wigner_oracle(np.diag([1, 0, 0]), 3, 1))
    assert np.allclose(w0[:, 0], 1 / 3) and np.allclose(w0[:, 1:], 0)


@pytest.mark.parametrize("d,n", [(3, 1), (5, 1), (3, 2)])
def test_wigner_random_and_round_trip(d, n):
    bp = BasisPair.qft(d, n)
    rho = algebra.random_density_matrix(d**n, d + n)
    dist = build_kd(rho, bp)
    wd = sp.kd_to_wigner(dist, bp)
    assert np.abs(wd.w - wigner_oracle(rho, d, n)).max() <= 1e-10
    assert wd.w.sum() == pytest.approx(1, abs=1e-10)
    assert np.allclose(wd.marginal_z(), np.diag(rho).real, atol=1e-12)
    assert np.abs(sp.wigner_to_kd(wd).q - dist.q).max() <= 1e-10
    again = sp.kd_to_wigner(sp.wigner_to_kd(wd), bp)
    assert np.abs(again.w - wd.w).max() <= 1e-10


def test_wigner_to_kd_ground_state():
    wd = sp.WignerDist(3, 1, wigner_oracle(np.diag([1.0, 0, 0]), 3, 1))
    assert np.allclose(sp.wigner_to_kd(wd).q, [[1 / 3] * 3, [0] * 3, [0] * 3])


def test_wigner_guards():
    with pytest.raises(EvenDimension):
        sp.kd_to_wigner(build_kd(np.array([1, 0]), BasisPair.qft(2)), BasisPair.qft(2))
    bp = BasisPair.qft(3)
    q = build_kd(np.eye(3) / 3, bp).q.copy()
    q[0, 1] += 0.1j
    q[0, 2] -= 0.1j
    with pytest.raises(InvalidState):
        sp.kd_to_wigner(KDDist(q), bp)


def test_phase_point_operators_hermitian_unit_trace():
    a = sp.phase_point_operator([1], [2], 3)
    assert np.allclose(a, a.conj().T)
    assert np.isclose(np.trace(a), 1)
