import numpy as np
import pytest

from kdsim import algebra, bounds, cycle, superop as so
from kdsim.errors import DenominatorTooSmall, DimensionCapExceeded, NotMUB
from kdsim.kd import BasisPair, build_kd


def test_upper_bound_saturation():
    rep = bounds.check_bounds(np.array([1, 0]), BasisPair.hadamard())
    assert rep.upper_bound == pytest.approx(0.5) and rep.max_abs_q == pytest.approx(0.5)
    assert rep.upper_ok and rep.lower_ok and rep.kd_positive


def test_upper_bound_random_qft4():
    bp = BasisPair.qft(4)
    for seed in range(20):
        psi = algebra.random_pure_state(4, seed)
        q = np.abs(build_kd(psi, bp).q)
        rep = bounds.check_bounds(psi, bp)
        assert rep.upper_ok and q.max() <= 0.5**3 * 4 + 1e-12


@pytest.mark.parametrize("d", [2, 3, 5])
def test_mub_uniformity_basis_states(d):
    bp = BasisPair.qft(d)
    for k in range(d):
        assert bounds.check_mub_uniformity(bp.a_state(k), bp)
        assert bounds.check_mub_uniformity(bp.b_state(k), bp)


def test_mub_uniformity_negative_cases():
    assert not bounds.check_mub_uniformity(np.array([1, 1j]) / np.sqrt(2), BasisPair.hadamard())
    bp = BasisPair.hadamard(2)
    assert bounds.check_mub_uniformity(np.array([1, 0, 0, 0]), bp)
    assert np.allclose(build_kd(np.array([1, 0, 0, 0]), bp).q[0], 0.25)
    with pytest.raises(NotMUB):
        bounds.check_mub_uniformity(np.array([1, 0]), BasisPair.random(2, 1))


def test_kd_inner_product():
    bp = BasisPair.hadamard()
    a0, a1, b0 = (build_kd(s, bp) for s in (bp.a_state(0), bp.a_state(1), bp.b_state(0)))
    psi = algebra.random_pure_state(2, 3)
    p = build_kd(psi, bp)
    assert bounds.kd_inner_product(p, p, bp) == pytest.approx(1)
    assert bounds.kd_inner_product(a0, a1, bp) == pytest.approx(0)
    assert bounds.kd_inner_product(a0, b0, bp) == pytest.approx(0.5)
    assert bounds.support_overlap(a0, b0) == 1
    bp3 = BasisPair.random(3, 4)
    x, y = algebra.random_pure_state(3, 5), algebra.random_pure_state(3, 6)
    val = bounds.kd_inner_product(build_kd(x, bp3), build_kd(y, bp3), bp3)
    assert val == pytest.approx(abs(np.vdot(x, y)) ** 2)


def test_positive_candidates_include_basis_states():
    bp = BasisPair.qft(3)
    found = bounds.mub_positive_candidates(bp)
    for k in range(3):
        assert any(abs(abs(np.vdot(bp.b_state(k), psi)) - 1) < 1e-9 for psi in found)
        assert any(abs(abs(np.vdot(bp.a_state(k), psi)) - 1) < 1e-9 for psi in found)


# -- cycle tests ---------------------------------------------------------------


def test_bargmann_identical_and_four_state_identity():
    psi = algebra.random_pure_state(3, 1)
    assert cycle.bargmann([psi, psi, psi]) == pytest.approx(1)
    assert cycle.cycle_p0([psi] * 3, 0) == pytest.approx(1)
    bp = BasisPair.random(3, 2)
    u = algebra.random_unitary(3, 3)
    e = so.superop_from_unitary(u, bp).m
    i, j, k, l = 0, 2, 1, 1
    proj = [algebra.projector(s) for s in cycle.superop_cycle_states(u, i, j, k, l, bp)]
    trace = np.trace(proj[0] @ proj[1] @ proj[2] @ proj[3])
    assert np.isclose(trace, abs(bp.v[k, l]) ** 2 * e[i * 3 + j, k * 3 + l])
    assert np.isclose(cycle.bargmann(cycle.superop_cycle_states(u, i, j, k, l, bp)), trace)


@pytest.mark.parametrize("k,D", [(2, 2), (3, 2), (3, 3), (4, 2), (2, 16)])
def test_analytic_matches_statevector(k, D):
    states = [algebra.random_pure_state(D, 10 * k + m) for m in range(k)]
    for s in (0, 1):
        assert abs(cycle.cycle_p0(states, s) - cycle.cycle_p0_statevector(states, s)) <= 1e-10


def test_statevector_cap():
    with pytest.raises(DimensionCapExceeded):
        cycle.cycle_p0_statevector([np.ones(4) / 2] * 5, 0)


def test_quasiprobability_estimates():
    bp = BasisPair.hadamard()
    est = cycle.estimate_quasiprobability(np.array([1, 0]), 0, 0, bp, 100_000, seed=1)
    assert est.within(0.5 + 0j, 3)
    est = cycle.estimate_quasiprobability(np.array([1, 0]), 0, 1, bp, 100_000, seed=2)
    assert abs(est.value.real - 0.5) <= 3 * est.stderr_re
    assert abs(est.value.imag) <= 3 * est.stderr_im + 1e-12
    mixed = cycle.estimate_quasiprobability(np.eye(2) / 2, 1, 0, bp, 100_000, seed=3)
    assert mixed.within(0.25 + 0j, 3)


def test_quasiprobability_random_d3():
    bp = BasisPair.qft(3)
    rho = algebra.random_density_matrix(3, 4)
    q = build_kd(rho, bp).q
    hits = sum(
        cycle.estimate_quasiprobability(rho, i, j, bp, 1_000_000, seed=10 * i + j).within(q[i, j], 4)
        for i in range(3)
        for j in range(3)
    )
    assert hits >= 8


def test_superop_element_estimates():
    bp = BasisPair.hadamard()
    for i in range(2):
        for j in range(2):
            est = cycle.estimate_superop_element(np.eye(2), i, j, i, j, bp, 100_000, seed=i * 2 + j)
            assert est.within(1 + 0j, 3)
    x = algebra.wh_x(np.array([1]), 2)
    e = so.superop_from_unitary(x, bp).m
    est = cycle.estimate_superop_element(x, 1, 0, 0, 0, bp, 100_000, seed=9, estimate_denominator=True)
    assert est.within(complex(e[2, 0]), 4)
    assert len(est.reports) == 3


def test_denominator_guard():
    with pytest.raises(DenominatorTooSmall):
        cycle.estimate_superop_element(np.eye(2), 0, 0, 0, 1, BasisPair(np.eye(2)), 1000, seed=0)


def test_experiment_validation_and_determinism():
    states = (np.array([1, 0]), np.array([1, 1]) / np.sqrt(2))
    a = cycle.run_cycle_test(cycle.CycleExperiment(states, 0, 5000, 3))
    b = cycle.run_cycle_test(cycle.CycleExperiment(states, 0, 5000, 3))
    assert a == b
    imag = cycle.run_cycle_test(cycle.CycleExperiment(states, 1, 100_000, 4))
    assert abs(imag.estimate) <= 3 * imag.stderr
    with pytest.raises(Exception):
        cycle.CycleExperiment(states, 2, 10, 0)
