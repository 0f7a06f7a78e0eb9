"""Kirkwood-Dirac distributions: construction, reconstruction and diagnostics.

Basis A is always the computational basis and basis B is given by the columns
of a unitary transition matrix ``V``, so ``<a_i|b_j> = V[i, j]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import algebra, config
from .errors import DimensionMismatch, KDError, NotInformationallyComplete


@dataclass(frozen=True, eq=False)
class BasisPair:
    """Reference bases A (computational) and B (columns of ``v``).

    ``factors`` is set when ``v`` is a Kronecker product of equal-size
    single-qudit transition matrices; ``d`` and ``n`` then describe that
    structure. Without factors the pair is a single qudit of dimension D.
    """

    v: np.ndarray
    factors: tuple[np.ndarray, ...] | None = None
    d: int = field(default=0)
    n: int = field(default=1)

    def __post_init__(self):
        v = algebra.require_unitary(self.v, tol=1e-12)
        object.__setattr__(self, "v", v)
        if self.factors is None:
            object.__setattr__(self, "d", v.shape[0])
            object.__setattr__(self, "n", 1)
            return
        factors = tuple(np.asarray(f, dtype=complex) for f in self.factors)
        dims = {f.shape[0] for f in factors}
        if len(dims) != 1:
            raise DimensionMismatch("basis factors must share one local dimension")
        if np.abs(algebra.kron_all(factors) - v).max() > 1e-12:
            raise KDError("Kronecker product of factors does not reproduce V")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "d", dims.pop())
        object.__setattr__(self, "n", len(factors))

    @classmethod
    def from_factors(cls, factors: Sequence) -> "BasisPair":
        factors = [algebra.require_unitary(f) for f in factors]
        return cls(algebra.kron_all(factors), tuple(factors))

    @classmethod
    def qft(cls, d: int, n: int = 1) -> "BasisPair":
        return cls.from_factors([algebra.qft_matrix(d)] * n)

    @classmethod
    def hadamard(cls, n: int = 1) -> "BasisPair":
        return cls.qft(2, n)

    @classmethod
    def random(cls, dim: int, seed=None) -> "BasisPair":
        return cls(algebra.random_unitary(dim, seed))

    @property
    def dim(self) -> int:
        return self.v.shape[0]

    @property
    def is_product(self) -> bool:
        return self.factors is not None

    def a_state(self, i: int) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[i] = 1.0
        return e

    def b_state(self, j: int) -> np.ndarray:
        return self.v[:, j].copy()

    def require_complete(self, zero_tol: float = config.ZERO_TOL) -> None:
        m = np.abs(self.v).min()
        if m <= zero_tol:
            raise NotInformationallyComplete(
                f"min |<a_i|b_j>| = {m:.3g} <= {zero_tol:g}; frames are undefined"
            )

    def is_mub(self, tol: float = config.MUB_TOL) -> bool:
        return bool(np.abs(np.abs(self.v) - self.dim**-0.5).max() <= tol)


@dataclass(frozen=True, eq=False)
class KDDist:
    """A ``D x D`` table of complex quasiprobabilities ``Q[i, j]``.

    No state-validity constraint is imposed here: arbitrary tables are
    representable. ``normalized`` records whether the entries sum to one.
    """

    q: np.ndarray
    normalized: bool = field(init=False)

    def __post_init__(self):
        q = np.asarray(self.q, dtype=complex)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise DimensionMismatch(f"KD table must be square, got {q.shape}")
        if not np.all(np.isfinite(q)):
            raise KDError("KD table has non-finite entries")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "normalized", bool(abs(q.sum() - 1) <= 1e-10))

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    def vector(self) -> np.ndarray:
        """Row-major flattening, ``flat[i*D + j] = Q[i, j]``."""
        return self.q.reshape(-1).copy()

    def warn_if_unnormalized(self) -> None:
        if not self.normalized:
            warnings.warn(f"KD table sums to {self.q.sum():.6g}, not 1", stacklevel=2)


def build_kd(rho, bp: BasisPair) -> KDDist:
    """``Q_ij = <b_j|a_i><a_i|rho|b_j>`` for a density matrix or pure state."""
    rho = algebra.as_density(rho)
    algebra.check_square(rho, bp.dim, "state")
    q = bp.v.conj() * (rho @ bp.v)
    if abs(q.sum() - 1) > 1e-10:
        raise KDError(f"KD distribution sums to {q.sum():.6g}")
    return KDDist(q)


def frame(i: int, j: int, bp: BasisPair, zero_tol: float = config.ZERO_TOL) -> np.ndarray:
    """Rank-one frame ``|a_i><b_j| / <b_j|a_i>``."""
    overlap = np.conj(bp.v[i, j])
    if abs(overlap) <= zero_tol:
        raise NotInformationallyComplete(f"<b_{j}|a_{i}> vanishes")
    return np.outer(bp.a_state(i), bp.b_state(j).conj()) / overlap


def reconstruct_rho(dist: KDDist, bp: BasisPair, zero_tol: float = config.ZERO_TOL) -> np.ndarray:
    """``rho = sum_ij Q_ij Lambda_ij``.

    Row i of the result is ``sum_j (Q_ij / conj(V_ij)) <b_j|``, which is a
    single matrix product instead of D**2 outer products.
    """
    bp.require_complete(zero_tol)
    if dist.dim != bp.dim:
        raise DimensionMismatch("distribution and basis pair differ in dimension")
    return (dist.q / bp.v.conj()) @ bp.v.conj().T


def marginals(dist: KDDist) -> tuple[np.ndarray, np.ndarray]:
    """Born probabilities in bases A (row sums) and B (column sums)."""
    return dist.q.sum(axis=1).real, dist.q.sum(axis=0).real


def marginal_residue(dist: KDDist) -> float:
    """Largest imaginary part left over after marginalising."""
    return float(max(np.abs(dist.q.sum(axis=1).imag).max(), np.abs(dist.q.sum(axis=0).imag).max()))


def total_nonpositivity(dist: KDDist) -> float:
    return float(np.abs(dist.q).sum())


def is_kd_positive(dist: KDDist, tol: float = config.POSITIVITY_TOL) -> bool:
    q = dist.q
    return bool(np.all(np.abs(q.imag) <= tol) and np.all(q.real >= -tol))


@dataclass(frozen=True)
class SupportReport:
    n_a: int
    n_b: int
    support_a: tuple[int, ...]
    support_b: tuple[int, ...]
    zero_tol: float


def support_uncertainties(psi, bp: BasisPair, zero_tol: float = config.ZERO_TOL) -> SupportReport:
    psi = algebra.require_pure_state(psi)
    sa = np.flatnonzero(np.abs(psi) > zero_tol)
    sb = np.flatnonzero(np.abs(bp.v.conj().T @ psi) > zero_tol)
    return SupportReport(len(sa), len(sb), tuple(int(x) for x in sa), tuple(int(x) for x in sb), zero_tol)


def completeness_stats(bp: BasisPair) -> tuple[float, float]:
    """Smallest and largest ``|<a_i|b_j>|``."""
    mag = np.abs(bp.v)
    return float(mag.min()), float(mag.max())
