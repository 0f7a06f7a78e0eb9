"""Simulated cycle tests for Bargmann invariants.

Circuit convention: ancilla prepared in ``|0>``, Hadamard, phase gate
``P = diag(1, i)`` when ``s = 1``, controlled cyclic shift of the registers,
Hadamard, measure. The controlled shift sends the content of register ``m``
to register ``m + 1`` (the last wraps to the first), which gives

    p(0) = (1 + Re[exp(-i s pi/2) B]) / 2

for the Bargmann invariant ``B = <phi_1|phi_2><phi_2|phi_3>...<phi_k|phi_1>``.
So ``s = 0`` estimates ``Re B`` and ``s = 1`` estimates ``Im B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import algebra, config
from .errors import DenominatorTooSmall, DimensionCapExceeded, DimensionMismatch, KDError
from .kd import BasisPair


def bargmann(states: Sequence) -> complex:
    """``<phi_1|phi_2><phi_2|phi_3> ... <phi_k|phi_1>``."""
    states = [np.asarray(s, dtype=complex) for s in states]
    if len(states) < 1:
        raise KDError("need at least one state")
    dim = states[0].size
    if any(s.size != dim for s in states):
        raise DimensionMismatch("all registers must share one dimension")
    out = 1.0 + 0j
    for a, b in zip(states, states[1:] + states[:1]):
        out *= np.vdot(a, b)
    return complex(out)


def cycle_p0(states: Sequence, s: int) -> float:
    """Analytic probability of ancilla outcome 0."""
    return 0.5 * (1.0 + ((-1j) ** s * bargmann(states)).real)


def cycle_p0_statevector(states: Sequence, s: int, cap: int = config.STATEVECTOR_CAP) -> float:
    """Ancilla outcome-0 probability from the full ancilla+register circuit,
    with the cyclic shift built as a cascade of controlled SWAPs."""
    states = [np.asarray(x, dtype=complex) for x in states]
    k, D = len(states), states[0].size
    if D**k > cap:
        raise DimensionCapExceeded(f"register space {D}^{k} exceeds statevector cap {cap}")
    reg = states[0]
    for st in states[1:]:
        reg = np.kron(reg, st)
    psi = np.zeros((2,) + (D,) * k, dtype=complex)
    psi[0] = reg.reshape((D,) * k)

    h = algebra.hadamard()
    psi = np.tensordot(h, psi, axes=(1, 0))
    if s:
        psi[1] *= 1j
    # SWAP(k-2,k-1), ..., SWAP(0,1) moves register m into register m+1
    branch = psi[1]
    for m in range(k - 2, -1, -1):
        branch = np.swapaxes(branch, m, m + 1)
    psi[1] = branch
    psi = np.tensordot(h, psi, axes=(1, 0))
    return float(np.sum(np.abs(psi[0]) ** 2))


@dataclass(frozen=True)
class ShotReport:
    zeros: int
    ones: int
    estimate: float
    stderr: float

    @property
    def shots(self) -> int:
        return self.zeros + self.ones

    @classmethod
    def from_counts(cls, zeros: int, shots: int) -> "ShotReport":
        p = zeros / shots
        return cls(int(zeros), int(shots - zeros), 2 * p - 1, 2 * math.sqrt(p * (1 - p) / shots))


@dataclass(frozen=True, eq=False)
class CycleExperiment:
    register_states: tuple
    s: int
    shots: int
    seed: int | tuple[int, ...]

    def __post_init__(self):
        if self.s not in (0, 1):
            raise KDError("s must be 0 or 1")
        if self.shots < 1:
            raise KDError("shots must be positive")


def run_cycle_test(exp: CycleExperiment) -> ShotReport:
    """Sample ancilla outcomes binomially from the analytic ``p(0)``."""
    rng = np.random.default_rng(list(np.atleast_1d(exp.seed)))
    p0 = cycle_p0(exp.register_states, exp.s)
    zeros = rng.binomial(exp.shots, min(max(p0, 0.0), 1.0))
    return ShotReport.from_counts(zeros, exp.shots)


def _mixture_zeros(rng, shots: int, probs: np.ndarray, weights: np.ndarray) -> int:
    """Draw a fresh mixture component per shot, then its ancilla outcome."""
    counts = rng.multinomial(shots, weights / weights.sum())
    return int(sum(rng.binomial(c, p) for c, p in zip(counts, probs) if c))


@dataclass(frozen=True)
class ComplexEstimate:
    value: complex
    stderr_re: float
    stderr_im: float
    reports: tuple[ShotReport, ...]

    def within(self, exact: complex, k: float) -> bool:
        return bool(
            abs(self.value.real - exact.real) <= k * self.stderr_re
            and abs(self.value.imag - exact.imag) <= k * self.stderr_im
        )


def _substream(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, tag]))


def estimate_quasiprobability(rho, i: int, j: int, bp: BasisPair, shots: int, seed: int) -> ComplexEstimate:
    """Estimate ``Q_ij(rho)`` from two simulated cycle tests on
    ``(|b_j>, |a_i>, |psi>)``. Mixed states are sampled from their
    eigendecomposition shot by shot."""
    rho = algebra.as_density(rho)
    evals, evecs = np.linalg.eigh(rho)
    keep = evals > 1e-14
    weights, vecs = evals[keep], evecs[:, keep].T
    a, b = bp.a_state(i), bp.b_state(j)
    reports = []
    for s in (0, 1):
        probs = np.array([cycle_p0([b, a, psi], s) for psi in vecs])
        zeros = _mixture_zeros(_substream(seed, s), shots, probs, weights)
        reports.append(ShotReport.from_counts(zeros, shots))
    re, im = reports
    return ComplexEstimate(complex(re.estimate, im.estimate), re.stderr, im.stderr, tuple(reports))


def superop_cycle_states(u, i: int, j: int, k: int, l: int, bp: BasisPair) -> list[np.ndarray]:
    """``(|a_i>, U|a_k>, U|b_l>, |b_j>)``, whose invariant is
    ``|<b_l|a_k>|^2 E_U[ij, kl]``."""
    u = np.asarray(u, dtype=complex)
    return [bp.a_state(i), u @ bp.a_state(k), u @ bp.b_state(l), bp.b_state(j)]


def estimate_bargmann(states: Sequence, shots: int, seed: int) -> ComplexEstimate:
    reports = [run_cycle_test(CycleExperiment(tuple(states), s, shots, (seed, s))) for s in (0, 1)]
    re, im = reports
    return ComplexEstimate(complex(re.estimate, im.estimate), re.stderr, im.stderr, tuple(reports))


def estimate_superop_element(
    u,
    i: int,
    j: int,
    k: int,
    l: int,
    bp: BasisPair,
    shots: int,
    seed: int,
    estimate_denominator: bool = False,
    zero_tol: float = config.ZERO_TOL,
) -> ComplexEstimate:
    """Estimate ``E_U[ij, kl]`` from a four-register cycle test.

    The denominator ``|<b_l|a_k>|^2`` is exact by default; with
    ``estimate_denominator`` it comes from a simulated SWAP test instead and
    its uncertainty is propagated to first order.
    """
    u = algebra.require_unitary(u)
    overlap = abs(bp.v[k, l]) ** 2
    if math.sqrt(overlap) <= zero_tol:
        raise DenominatorTooSmall(f"<b_{l}|a_{k}> vanishes")
    num = estimate_bargmann(superop_cycle_states(u, i, j, k, l, bp), shots, seed)
    if not estimate_denominator:
        return ComplexEstimate(num.value / overlap, num.stderr_re / overlap, num.stderr_im / overlap, num.reports)

    swap = run_cycle_test(CycleExperiment((bp.a_state(k), bp.b_state(l)), 0, shots, (seed, 2)))
    den, den_se = swap.estimate, swap.stderr
    if den < 10 * den_se or den <= 0:
        raise DenominatorTooSmall(f"estimated denominator {den:.3g} is below 10 standard errors ({den_se:.3g})")
    value = num.value / den
    se_re = math.hypot(num.stderr_re / den, abs(value.real) * den_se / den)
    se_im = math.hypot(num.stderr_im / den, abs(value.imag) * den_se / den)
    return ComplexEstimate(value, se_re, se_im, num.reports + (swap,))
