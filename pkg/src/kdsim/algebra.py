"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays. Multi-qudit indices are
big-endian: qudit 0 is the most significant digit, matching ``np.kron``
ordering of tensor factors.
"""

from __future__ import annotations

import functools
from typing import Sequence

import numpy as np

from . import config
from .errors import DimensionCapExceeded, DimensionMismatch, InvalidState, NotUnitary


def omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


def check_dim(dim: int) -> None:
    cap = config.max_dim()
    if dim > cap:
        raise DimensionCapExceeded(f"dimension {dim} exceeds cap {cap} (set {config.MAX_DIM_ENV})")


def kron(a, b) -> np.ndarray:
    """Kronecker product with the global dimension cap enforced on the result."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    check_dim(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]))
    return np.kron(a, b)


def kron_all(factors: Sequence) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = kron(out, f)
    return out


def qft_matrix(d: int) -> np.ndarray:
    """Unitary DFT matrix with entries ``d**-0.5 * omega**(j*k)``."""
    if d < 2:
        raise ValueError("qft_matrix needs d >= 2")
    j = np.arange(d)
    # reduce the exponent mod d before exponentiating to keep phases exact
    return np.exp(2j * np.pi * (np.outer(j, j) % d) / d) / np.sqrt(d)


def hadamard() -> np.ndarray:
    return qft_matrix(2)


# -- multi-qudit index helpers ------------------------------------------------


@functools.lru_cache(maxsize=64)
def _digit_table(d: int, n: int) -> np.ndarray:
    idx = np.arange(d**n)
    table = np.empty((d**n, n), dtype=np.int64)
    for q in range(n):
        table[:, q] = (idx // d ** (n - 1 - q)) % d
    table.setflags(write=False)
    return table


def digit_table(d: int, n: int) -> np.ndarray:
    """Row ``m`` holds the base-``d`` digits of ``m`` (big-endian), shape (d**n, n)."""
    return _digit_table(d, n)


def to_digits(index: int, d: int, n: int) -> tuple[int, ...]:
    return tuple(int(x) for x in _digit_table(d, n)[index])


def from_digits(digits: Sequence[int], d: int) -> int:
    out = 0
    for x in digits:
        if not 0 <= x < d:
            raise ValueError(f"digit {x} outside Z_{d}")
        out = out * d + int(x)
    return out


def dot_table(d: int, n: int) -> np.ndarray:
    """Matrix of ``a . b mod d`` over all pairs of index vectors."""
    t = _digit_table(d, n)
    return (t @ t.T) % d


def _as_digits(v, d: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=np.int64))
    if np.any(v < 0) or np.any(v >= d):
        raise ValueError(f"index vector {v.tolist()} has digits outside Z_{d}")
    return v


def wh_z(a, d: int) -> np.ndarray:
    """Clock operator ``Z^a`` on ``len(a)`` qudits."""
    a = _as_digits(a, d)
    n = a.size
    check_dim(d**n)
    phases = (_digit_table(d, n) @ a) % d
    return np.diag(np.exp(2j * np.pi * phases / d))


def wh_x(b, d: int) -> np.ndarray:
    """Shift operator ``X^b``: maps ``|m>`` to ``|m + b mod d>`` digit-wise."""
    b = _as_digits(b, d)
    n = b.size
    D = d**n
    check_dim(D)
    shifted = (_digit_table(d, n) + b) % d
    weights = d ** np.arange(n - 1, -1, -1)
    targets = shifted @ weights
    out = np.zeros((D, D), dtype=complex)
    out[targets, np.arange(D)] = 1.0
    return out


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """Matrix with ``P[perm[k], k] = 1``."""
    D = len(perm)
    out = np.zeros((D, D))
    out[np.asarray(perm), np.arange(D)] = 1.0
    return out


# -- random inputs --------------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_pure_state(dim: int, seed=None) -> np.ndarray:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = _rng(seed)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Unitary from the QR decomposition of a complex Gaussian matrix."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = _rng(seed)
    g = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density_matrix(dim: int, seed=None, rank: int | None = None) -> np.ndarray:
    rng = _rng(seed)
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


# -- validation ------------------------------------------------------------------


def is_unitary(u, tol: float = config.UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() <= tol)


def require_unitary(u, tol: float = config.UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if not np.all(np.isfinite(u)):
        raise NotUnitary("matrix has non-finite entries")
    if not is_unitary(u, tol):
        raise NotUnitary(f"matrix of shape {u.shape} is not unitary within {tol:g}")
    return u


def require_pure_state(psi, tol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise InvalidState("pure state must be a vector")
    if abs(np.linalg.norm(psi) - 1) > tol:
        raise InvalidState(f"state norm {np.linalg.norm(psi):.3g} is not 1")
    return psi


def require_density_matrix(rho, tol: float = 1e-12, eig_tol: float = 1e-10) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; returns a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidState(f"density matrix must be square, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidState("density matrix has non-finite entries")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise InvalidState("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise InvalidState(f"trace {np.trace(rho).real:.6g} is not 1")
    if np.linalg.eigvalsh(rho).min() < -eig_tol:
        raise InvalidState("density matrix has negative eigenvalues")
    return rho


def as_density(state) -> np.ndarray:
    """Accept either a pure-state vector or a density matrix."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return projector(require_pure_state(state))
    return require_density_matrix(state)


def check_square(m, dim: int, what: str = "matrix") -> None:
    if m.shape != (dim, dim):
        raise DimensionMismatch(f"{what} has shape {m.shape}, expected ({dim}, {dim})")
