"""Magnitude bounds on KD quasiprobabilities of pure states."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import config
from .errors import NotMUB
from .kd import BasisPair, KDDist, build_kd, completeness_stats, is_kd_positive, support_uncertainties


@dataclass(frozen=True)
class BoundReport:
    max_abs_q: float
    upper_bound: float
    min_nonzero_q: float
    lower_bound: float
    n_a: int
    n_b: int
    kd_positive: bool
    upper_ok: bool
    lower_ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def check_bounds(psi, bp: BasisPair, zero_tol: float = config.ZERO_TOL) -> BoundReport:
    """Compare ``|Q_ij|`` with ``M^3 sqrt(n_A n_B)`` and, for KD positive
    states, the non-zero entries with ``m^3``."""
    dist = build_kd(psi, bp)
    m, M = completeness_stats(bp)
    sup = support_uncertainties(psi, bp, zero_tol)
    mag = np.abs(dist.q)
    upper = M**3 * math.sqrt(sup.n_a * sup.n_b)
    positive = is_kd_positive(dist)
    nonzero = mag[mag > zero_tol]
    min_nz = float(nonzero.min()) if nonzero.size else 0.0
    lower = m**3 if positive else 0.0
    return BoundReport(
        max_abs_q=float(mag.max()),
        upper_bound=upper,
        min_nonzero_q=min_nz,
        lower_bound=lower,
        n_a=sup.n_a,
        n_b=sup.n_b,
        kd_positive=positive,
        upper_ok=bool(mag.max() <= upper + 1e-10),
        lower_ok=bool(not positive or min_nz >= lower - 1e-10),
    )


def check_mub_uniformity(psi, bp: BasisPair, tol: float = 1e-9) -> bool:
    """True iff the state is KD positive with every entry ``0`` or ``1/D``,
    ``n_A n_B = D`` and flat amplitudes on both supports."""
    if not bp.is_mub():
        raise NotMUB("basis pair is not mutually unbiased")
    D = bp.dim
    dist = build_kd(psi, bp)
    if not is_kd_positive(dist, tol):
        return False
    q = dist.q.real
    if not np.all((np.abs(q) <= tol) | (np.abs(q - 1 / D) <= tol)):
        return False
    sup = support_uncertainties(psi, bp)
    if sup.n_a * sup.n_b != D:
        return False
    amp_a = np.abs(np.asarray(psi))[list(sup.support_a)]
    amp_b = np.abs(bp.v.conj().T @ psi)[list(sup.support_b)]
    return bool(
        np.all(np.abs(amp_a - sup.n_a**-0.5) <= tol) and np.all(np.abs(amp_b - sup.n_b**-0.5) <= tol)
    )


def kd_overlap(q1: KDDist, q2: KDDist, bp: BasisPair) -> complex:
    """``sum_ij conj(Q1_ij) Q2_ij / |<a_i|b_j>|^2`` before taking the real part."""
    bp.require_complete()
    return complex(np.sum(q1.q.conj() * q2.q / np.abs(bp.v) ** 2))


def kd_inner_product(q1: KDDist, q2: KDDist, bp: BasisPair) -> float:
    """``|<psi|phi>|^2`` recovered from the two distributions alone."""
    return kd_overlap(q1, q2, bp).real


def support_overlap(q1: KDDist, q2: KDDist, tol: float = config.ZERO_TOL) -> int:
    return int(np.sum((np.abs(q1.q) > tol) & (np.abs(q2.q) > tol)))


def mub_positive_candidates(bp: BasisPair, tol: float = 1e-9) -> list[np.ndarray]:
    """Pure KD positive states found among flat-amplitude candidates.

    Candidates are uniform superpositions over every subset of the
    computational basis whose size divides D, with relative phases drawn from
    the roots of unity of order ``d`` (order 4 for qubits). Only states whose
    distribution is KD positive are kept. This is a search over a fixed
    family, not a classification of all positive states.
    """
    D = bp.dim
    local = bp.d if bp.is_product else D
    order = 4 if local == 2 else local
    roots = np.exp(2j * np.pi * np.arange(order) / order)
    found = []
    for size in (k for k in range(1, D + 1) if D % k == 0):
        for subset in itertools.combinations(range(D), size):
            for phases in itertools.product(roots, repeat=size - 1):
                psi = np.zeros(D, dtype=complex)
                psi[list(subset)] = np.concatenate(([1.0], phases)) / math.sqrt(size)
                if is_kd_positive(build_kd(psi, bp), tol):
                    found.append(psi)
    return found
