"""KD superoperators acting on row-major vectorised distributions.

Flat index convention everywhere: pair ``(i, j)`` sits at ``i*D + j``, so a
superoperator entry ``E[(i,j), (k,l)]`` lives at ``m[i*D + j, k*D + l]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import algebra, config
from .errors import DimensionMismatch, KDError, NotAChannel
from .kd import BasisPair, KDDist, build_kd, is_kd_positive


@dataclass(frozen=True, eq=False)
class KDSuperop:
    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex)
        D = int(round(np.sqrt(m.shape[0])))
        if m.ndim != 2 or m.shape[0] != m.shape[1] or D * D != m.shape[0]:
            raise DimensionMismatch(f"superoperator must be D^2 x D^2, got {m.shape}")
        object.__setattr__(self, "m", m)

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.m.shape[0])))

    def column_sum_error(self) -> float:
        return float(np.abs(self.m.sum(axis=0) - 1).max())

    def apply(self, dist: KDDist) -> KDDist:
        return devectorize(self.m @ vectorize(dist))


@dataclass(frozen=True, eq=False)
class DualVector:
    f: np.ndarray

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.f.size)))


def vectorize(dist: KDDist) -> np.ndarray:
    return dist.vector()


def devectorize(vec) -> KDDist:
    vec = np.asarray(vec, dtype=complex)
    D = int(round(np.sqrt(vec.size)))
    if vec.ndim != 1 or D * D != vec.size:
        raise DimensionMismatch(f"vector of length {vec.size} is not a square number")
    return KDDist(vec.reshape(D, D))


def ones_dual(dim: int) -> DualVector:
    return DualVector(np.ones(dim * dim, dtype=complex))


def _check_kraus(kraus, dim: int, tol: float) -> list[np.ndarray]:
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    if not kraus:
        raise NotAChannel("empty Kraus list")
    for k in kraus:
        algebra.check_square(k, dim, "Kraus operator")
    completeness = sum(k.conj().T @ k for k in kraus)
    err = np.abs(completeness - np.eye(dim)).max()
    if err > tol:
        raise NotAChannel(f"sum K^dag K deviates from identity by {err:.3g}")
    return kraus


def superop_from_kraus(kraus: Sequence, bp: BasisPair, tol: float = config.CHANNEL_TOL) -> KDSuperop:
    """``E[ij,kl] = sum_mu <b_j|a_i>/<b_l|a_k> <a_i|K|a_k> <b_l|K^dag|b_j>``."""
    D = bp.dim
    kraus = _check_kraus(kraus, D, tol)
    bp.require_complete()
    v = bp.v
    t = np.zeros((D, D, D, D), dtype=complex)
    for k in kraus:
        kb = v.conj().T @ k.conj().T @ v  # <b_l|K^dag|b_j> at [l, j]
        t += np.einsum("ik,lj->ijkl", k, kb)
    ratio = np.einsum("ij,kl->ijkl", v.conj(), 1.0 / v.conj())
    return KDSuperop((t * ratio).reshape(D * D, D * D))


def superop_from_unitary(u, bp: BasisPair) -> KDSuperop:
    u = algebra.require_unitary(u)
    return superop_from_kraus([u], bp)


def channel_apply(kraus: Sequence, rho) -> np.ndarray:
    return sum(k @ rho @ np.conj(k).T for k in kraus)


def entanglement_fidelity(e: KDSuperop) -> float:
    return float(np.trace(e.m).real / e.dim**2)


def inverse_relation_residual(u, bp: BasisPair) -> float:
    """Largest deviation between ``E_{U^dag}`` and the element-wise prediction
    ``|<b_j|a_i>/<b_l|a_k>|^2 * conj(E_U[kl, ij])``."""
    e = superop_from_unitary(u, bp).m
    e_inv = superop_from_unitary(np.conj(u).T, bp).m
    mag2 = np.abs(bp.v.reshape(-1)) ** 2
    predicted = np.outer(mag2, 1.0 / mag2) * e.T.conj()
    return float(np.abs(e_inv - predicted).max())


def dual_vector(f, bp: BasisPair) -> DualVector:
    """``F_ij = <b_j|F|a_i> / <b_j|a_i>``."""
    f = np.asarray(f, dtype=complex)
    algebra.check_square(f, bp.dim, "POVM element")
    bp.require_complete()
    return DualVector(((bp.v.conj().T @ f).T / bp.v.conj()).reshape(-1))


def born_amplitude(fd: DualVector, ops: Sequence[KDSuperop], dist: KDDist) -> complex:
    """``<<F| E_N ... E_1 |Q>>`` without discarding the imaginary part."""
    vec = vectorize(dist)
    for e in ops:
        if e.dim != dist.dim:
            raise DimensionMismatch("superoperator and distribution differ in dimension")
        vec = e.m @ vec
    if fd.f.size != vec.size:
        raise DimensionMismatch("dual vector and distribution differ in dimension")
    return complex(fd.f @ vec)


def born_exact(fd: DualVector, ops: Sequence[KDSuperop], dist: KDDist) -> float:
    return born_amplitude(fd, ops, dist).real


def is_stochastic(e: KDSuperop, tol: float = config.POSITIVITY_TOL) -> bool:
    m = e.m
    if np.abs(m.imag).max() > tol or m.real.min() < -tol:
        return False
    return e.column_sum_error() <= tol


def induced_l1(e: KDSuperop) -> float:
    return float(np.abs(e.m).sum(axis=0).max())


@dataclass(frozen=True)
class GenPermCertificate:
    """``U|a_i> = exp(i theta_i)|a_{sigma_a(i)}>`` and likewise for basis B."""

    sigma_a: tuple[int, ...]
    theta: tuple[float, ...]
    sigma_b: tuple[int, ...]
    phi: tuple[float, ...]

    def superop_matrix(self) -> np.ndarray:
        return np.kron(algebra.permutation_matrix(self.sigma_a), algebra.permutation_matrix(self.sigma_b))

    def action_residual(self, u, bp: BasisPair) -> float:
        """How far ``u`` is from acting as this certificate claims."""
        u = np.asarray(u, dtype=complex)
        pa = algebra.permutation_matrix(self.sigma_a) * np.exp(1j * np.asarray(self.theta))
        pb = bp.v @ (algebra.permutation_matrix(self.sigma_b) * np.exp(1j * np.asarray(self.phi)))
        return float(max(np.abs(u - pa).max(), np.abs(u @ bp.v - pb).max()))


def _phased_permutation(w: np.ndarray, tol: float):
    sigma, phases = [], []
    for k in range(w.shape[1]):
        col = w[:, k]
        hits = np.flatnonzero(np.abs(col) >= 1 - tol)
        if hits.size != 1:
            return None
        sigma.append(int(hits[0]))
        phases.append(float(np.angle(col[hits[0]])))
    if len(set(sigma)) != len(sigma):
        return None
    return tuple(sigma), tuple(phases)


def generalized_permutation_certificate(u, bp: BasisPair, tol: float = config.PERM_TOL):
    """Return a :class:`GenPermCertificate` if ``u`` permutes both bases up to
    phases, else ``None``."""
    u = algebra.require_unitary(u)
    if u.shape[0] != bp.dim:
        raise DimensionMismatch("unitary and basis pair differ in dimension")
    in_a = _phased_permutation(u, tol)
    if in_a is None:
        return None
    in_b = _phased_permutation(bp.v.conj().T @ u @ bp.v, tol)
    if in_b is None:
        return None
    return GenPermCertificate(in_a[0], in_a[1], in_b[0], in_b[1])


def is_positivity_preserving_on(u, bp: BasisPair, states: Sequence, tol: float = config.POSITIVITY_TOL) -> bool:
    """Whether ``u`` keeps every KD positive state in ``states`` KD positive."""
    e = superop_from_unitary(u, bp)
    for psi in states:
        dist = build_kd(psi, bp)
        if not is_kd_positive(dist, tol):
            raise KDError("fixture state is not KD positive")
        if not is_kd_positive(e.apply(dist), tol):
            return False
    return True
