"""Fourier structure of KD distributions on QFT bases and the Wigner bridge.

Two transform conventions live here and must not be mixed up:

* ``hat_dft``: ``sum_{a,b} w^{-(a.x + b.y)} Q(a,b)``, no prefactor.
* ``tilde_dft``: ``d^-n sum_{i,j} w^{-i.a + j.b} Q(i,j)``; its complex
  conjugate is the table of Weyl-Heisenberg expectations
  ``d^-n Tr(rho Z^a X^b)``.

Tables are indexed by multi-qudit vectors flattened big-endian, so a
``D x D`` array with ``D = d**n`` holds ``(a, b)`` at ``[idx(a), idx(b)]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebra
from .errors import EvenDimension, InvalidState, NotInformationallyComplete, WrongBasisFamily
from .kd import BasisPair, KDDist


def qft_family(bp: BasisPair, tol: float = 1e-12) -> tuple[int, int]:
    """Return ``(d, n)`` if ``bp`` is ``QFT_d`` tensored ``n`` times."""
    if bp.is_product:
        d, n = bp.d, bp.n
        ref = algebra.qft_matrix(d)
        if all(np.abs(f - ref).max() <= tol for f in bp.factors):
            return d, n
    elif bp.dim >= 2 and np.abs(bp.v - algebra.qft_matrix(bp.dim)).max() <= tol:
        return bp.dim, 1
    raise WrongBasisFamily("transition matrix is not a tensor power of QFT_d")


def _kernel(d: int, n: int) -> np.ndarray:
    """``K[x, a] = w^{-(x.a)}`` over multi-qudit indices."""
    return np.exp(-2j * np.pi * algebra.dot_table(d, n) / d)


def _require_odd(d: int) -> int:
    if d % 2 == 0:
        raise EvenDimension(f"Wigner construction needs odd d, got {d}")
    return (d + 1) // 2


# -- Hermiticity constraints ------------------------------------------------------------


def hermiticity_residual(dist: KDDist, bp: BasisPair) -> float:
    """Max violation of ``Q_uv = sum_ij <a_i|b_v><b_v|a_u><a_u|b_j> / <a_i|b_j> Q*_ij``.

    Valid (Hermitian) states satisfy it exactly; the double sum collapses to
    ``conj(V) * (V @ (conj(Q) / V).T @ V)``.
    """
    v = bp.v
    if np.abs(v).min() <= 1e-10:
        raise NotInformationallyComplete("Hermiticity constraints need all overlaps non-zero")
    rhs = v.conj() * (v @ (dist.q.conj() / v).T @ v)
    return float(np.abs(dist.q - rhs).max())


# -- hat transform and self-similarity -----------------------------------------------


def hat_dft_table(table: np.ndarray, d: int, n: int) -> np.ndarray:
    k = _kernel(d, n)
    return k @ np.asarray(table, dtype=complex) @ k


def hat_dft(dist: KDDist, bp: BasisPair) -> np.ndarray:
    d, n = qft_family(bp)
    return hat_dft_table(dist.q, d, n)


def omega_kernel(d: int, n: int) -> np.ndarray:
    """``Omega(a, b) = d^-n w^{a.b}``."""
    return np.exp(2j * np.pi * algebra.dot_table(d, n) / d) / d**n


def _negated_index(d: int, n: int) -> np.ndarray:
    """Flat index of ``-x mod d`` for every flat index ``x``."""
    digits = (-algebra.digit_table(d, n)) % d
    return digits @ (d ** np.arange(n - 1, -1, -1))


def self_similarity_residual(qhat: np.ndarray, d: int, n: int) -> float:
    """Max over ``(x, y)`` of ``|Qhat(-x, -y) - w^{x.y} conj(Qhat(x, y))|``."""
    neg = _negated_index(d, n)
    phase = np.exp(2j * np.pi * algebra.dot_table(d, n) / d)
    mirrored = qhat[np.ix_(neg, neg)]
    return float(np.abs(mirrored - phase * qhat.conj()).max())


def fundamental_mask(d: int, n: int) -> np.ndarray:
    """Boolean mask picking one representative from each ``{(x,y), (-x,-y)}`` pair."""
    D = d**n
    neg = _negated_index(d, n)
    flat = np.arange(D)[:, None] * D + np.arange(D)[None, :]
    partner = neg[:, None] * D + neg[None, :]
    return flat <= partner


def complete_from_fundamental(qhat: np.ndarray, d: int, n: int) -> np.ndarray:
    """Rebuild the whole transformed table from its fundamental entries."""
    mask = fundamental_mask(d, n)
    neg = _negated_index(d, n)
    dots = algebra.dot_table(d, n)
    out = np.where(mask, qhat, 0)
    # entry (x, y) outside the mask is the mirror of (-x, -y), which is inside
    mirror = np.exp(2j * np.pi * dots[np.ix_(neg, neg)] / d) * np.conj(qhat[np.ix_(neg, neg)])
    return np.where(mask, out, mirror)


# -- Weyl-Heisenberg table and the Wigner function -----------------------------------


@dataclass(frozen=True, eq=False)
class WHTable:
    d: int
    n: int
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class WignerDist:
    d: int
    n: int
    w: np.ndarray

    def __post_init__(self):
        _require_odd(self.d)
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))

    def marginal_z(self) -> np.ndarray:
        """Sum over ``p``: computational-basis probabilities indexed by ``q``."""
        return self.w.sum(axis=0)

    def marginal_x(self) -> np.ndarray:
        """Sum over ``q``: indexed by ``p``, the weight of the ``X^s`` Fourier mode."""
        return self.w.sum(axis=1)


def tilde_dft(dist: KDDist, bp: BasisPair) -> WHTable:
    d, n = qft_family(bp)
    k = _kernel(d, n)
    return WHTable(d, n, k @ dist.q @ k.conj() / d**n)


def _wh_phase(d: int, n: int) -> np.ndarray:
    inv2 = _require_odd(d)
    return np.exp(-2j * np.pi * ((algebra.dot_table(d, n) * inv2) % d) / d)


def phased_wh_table(t: WHTable) -> WHTable:
    """``T(a, b) = w^{-(a.b) 2^-1} conj(Qtilde(a, b))``."""
    return WHTable(t.d, t.n, _wh_phase(t.d, t.n) * t.values.conj())


def unphase_wh_table(t: WHTable) -> WHTable:
    return WHTable(t.d, t.n, (t.values * _wh_phase(t.d, t.n).conj()).conj())


def symplectic_ft(t: WHTable) -> np.ndarray:
    """``W(p, q) = d^-n sum_{r,s} w^{p.s - q.r} T(r, s)``."""
    k = _kernel(t.d, t.n)
    return (k @ t.values @ k.conj()).T / t.d**t.n


def inverse_symplectic_ft(w: np.ndarray, d: int, n: int) -> WHTable:
    k = _kernel(d, n)
    return WHTable(d, n, (k @ np.asarray(w, dtype=complex) @ k.conj()).T / d**n)


def kd_to_wigner(dist: KDDist, bp: BasisPair, imag_tol: float = 1e-9) -> WignerDist:
    d, n = qft_family(bp)
    _require_odd(d)
    w = symplectic_ft(phased_wh_table(tilde_dft(dist, bp)))
    if np.abs(w.imag).max() > imag_tol:
        raise InvalidState(f"Wigner table has imaginary part {np.abs(w.imag).max():.3g}; input is not a state")
    return WignerDist(d, n, w.real)


def wigner_to_kd(wd: WignerDist) -> KDDist:
    """Invert :func:`kd_to_wigner` without passing through a density matrix."""
    d, n = wd.d, wd.n
    _require_odd(d)
    qt = unphase_wh_table(inverse_symplectic_ft(wd.w, d, n))
    k = _kernel(d, n)
    return KDDist(k.conj() @ qt.values @ k / d**n)


def phase_point_operator(p, q, d: int) -> np.ndarray:
    """``A^{p,q} = d^-n sum_{r,s} w^{p.s - q.r} w^{-(r.s) 2^-1} Z^r X^s``."""
    inv2 = _require_odd(d)
    p = np.atleast_1d(np.asarray(p, dtype=np.int64))
    q = np.atleast_1d(np.asarray(q, dtype=np.int64))
    n = p.size
    digits = algebra.digit_table(d, n)
    out = np.zeros((d**n, d**n), dtype=complex)
    for r in digits:
        zr = algebra.wh_z(r, d)
        for s in digits:
            expo = (p @ s - q @ r - (r @ s) * inv2) % d
            out += np.exp(2j * np.pi * expo / d) * (zr @ algebra.wh_x(s, d))
    return out / d**n
