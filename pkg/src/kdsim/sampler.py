"""Monte Carlo estimation of Born probabilities from KD quasiprobabilities.

A path is a chain of index pairs ``I_0, ..., I_N``, one per gate boundary.
Every qudit carries its own pair ``(i_q, j_q)``; a gate only resamples the
pairs of its target qudits. ``I_0`` is drawn from ``|Q| / N[Q]`` and each
subsequent pair from the normalised absolute column of the gate's local
superoperator. The estimator of a path is

    z = N[Q] Ph(Q_I0) * prod_k ||E_k[:, I_{k-1}]||_1 Ph(E_k[I_k, I_{k-1}]) * F_IN

whose mean is ``Tr(F U rho U^dag)`` and whose modulus never exceeds the
total non-positivity ``N_T``.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import algebra, config
from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    KDError,
    NonProductBasis,
    PathSpaceTooLarge,
    ZeroDistribution,
)
from .kd import BasisPair, KDDist, build_kd
from .superop import KDSuperop, dual_vector, superop_from_unitary


@dataclass(frozen=True, eq=False)
class Gate:
    u: np.ndarray
    targets: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Circuit:
    d: int
    n: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        gates = []
        for g in self.gates:
            targets = tuple(int(t) for t in g.targets)
            if not 1 <= len(targets) <= 2:
                raise KDError("gates must act on one or two qudits")
            if len(set(targets)) != len(targets) or not all(0 <= t < self.n for t in targets):
                raise KDError(f"invalid targets {targets} for {self.n} qudits")
            u = algebra.require_unitary(g.u)
            algebra.check_square(u, self.d ** len(targets), "gate")
            gates.append(Gate(u, targets))
        object.__setattr__(self, "gates", tuple(gates))

    @property
    def dim(self) -> int:
        return self.d**self.n

    def unitary(self) -> np.ndarray:
        """Dense circuit unitary ``U_N ... U_1``."""
        total = np.eye(self.dim, dtype=complex)
        for g in self.gates:
            total = embed_unitary(g.u, g.targets, self.d, self.n) @ total
        return total


def embed_unitary(u, targets: Sequence[int], d: int, n: int) -> np.ndarray:
    """Lift a gate on ``targets`` to the full ``d**n`` space."""
    k = len(targets)
    D = d**n
    algebra.check_dim(D)
    op = np.asarray(u, dtype=complex).reshape((d,) * (2 * k))
    eye = np.eye(D, dtype=complex).reshape((d,) * n + (D,))
    out = np.tensordot(op, eye, axes=(list(range(k, 2 * k)), list(targets)))
    out = np.moveaxis(out, list(range(k)), list(targets))
    return out.reshape(D, D)


# -- local superoperators --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LocalOp:
    """A gate superoperator on its target qudits plus sampling tables."""

    targets: tuple[int, ...]
    superop: KDSuperop
    col_norms: np.ndarray = field(init=False)
    cdf: np.ndarray = field(init=False)
    phases: np.ndarray = field(init=False)

    def __post_init__(self):
        m = self.superop.m
        mag = np.abs(m)
        norms = mag.sum(axis=0)
        # columns sum to 1, so every l1 column norm is at least 1
        cdf = np.cumsum(mag / norms, axis=0).T.copy()
        cdf[:, -1] = 1.0
        phase = np.ones_like(m)
        nz = mag > 0
        phase[nz] = m[nz] / mag[nz]
        object.__setattr__(self, "col_norms", norms)
        object.__setattr__(self, "cdf", cdf)
        object.__setattr__(self, "phases", phase)

    @property
    def induced_l1(self) -> float:
        return float(self.col_norms.max())


def local_superop(gate: Gate, bp: BasisPair) -> LocalOp:
    """Superoperator of ``gate`` in the product basis of its target qudits."""
    if not bp.is_product:
        raise NonProductBasis("local superoperators need a per-qudit basis factorisation")
    v_loc = algebra.kron_all([bp.factors[t] for t in gate.targets])
    return LocalOp(tuple(gate.targets), superop_from_unitary(gate.u, BasisPair(v_loc)))


def norm_l1(x) -> float:
    """l1 norm of a KD vector (or table)."""
    if isinstance(x, KDDist):
        x = x.q
    return float(np.abs(np.asarray(x)).sum())


def norm_inf(x) -> float:
    """l-infinity norm of a dual vector."""
    f = getattr(x, "f", x)
    return float(np.abs(np.asarray(f)).max())


def column_l1(e: KDSuperop, column: int) -> float:
    return float(np.abs(e.m[:, column]).sum())


def induced_l1(e: KDSuperop) -> float:
    return float(np.abs(e.m).sum(axis=0).max())


# -- the sampling model ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SamplingModel:
    """Everything a path sampler needs.

    ``initial`` is either a list of per-qudit ``d x d`` KD tables (product
    input) or one dense ``D x D`` table. ``final`` is likewise a list of
    per-qudit ``d x d`` dual tables or one dense ``D x D`` dual table.
    """

    d: int
    n: int
    initial: tuple[np.ndarray, ...] | np.ndarray
    ops: tuple[LocalOp, ...]
    final: tuple[np.ndarray, ...] | np.ndarray

    @property
    def product_initial(self) -> bool:
        return isinstance(self.initial, tuple)

    @property
    def product_final(self) -> bool:
        return isinstance(self.final, tuple)

    def initial_table(self) -> np.ndarray:
        if not self.product_initial:
            return self.initial
        return algebra.kron_all(self.initial) if self.n > 1 else self.initial[0]

    def final_table(self) -> np.ndarray:
        if not self.product_final:
            return self.final
        return _product_table(self.final, self.d, self.n)


def _product_table(tables, d: int, n: int) -> np.ndarray:
    """Dense ``D x D`` table with entry ``prod_q t_q[i_q, j_q]``."""
    digits = algebra.digit_table(d, n)
    out = np.ones((d**n, d**n), dtype=complex)
    for q, t in enumerate(tables):
        out *= t[np.ix_(digits[:, q], digits[:, q])]
    return out


def _split_states(states, d: int, n: int):
    """Normalise a state argument to a per-qudit list or one dense state."""
    if isinstance(states, (list, tuple)):
        if len(states) != n:
            raise DimensionMismatch(f"expected {n} per-qudit factors, got {len(states)}")
        return [np.asarray(s, dtype=complex) for s in states]
    return np.asarray(states, dtype=complex)


def build_model(circuit: Circuit, rho, povm, bp: BasisPair) -> SamplingModel:
    """Prepare the sampler for ``Tr(F U rho U^dag)``.

    ``rho`` and ``povm`` may each be a list of per-qudit factors or a single
    dense operator. A basis pair without per-qudit factors forces the whole
    register to be treated as one qudit of dimension D.
    """
    if bp.dim != circuit.dim:
        raise DimensionMismatch("basis pair and circuit differ in dimension")
    rho = _split_states(rho, circuit.d, circuit.n)
    povm = _split_states(povm, circuit.d, circuit.n)
    if not bp.is_product or bp.d != circuit.d:
        return _global_model(circuit, rho, povm, bp)

    if isinstance(rho, list):
        initial = tuple(build_kd(r, BasisPair(f)).q for r, f in zip(rho, bp.factors))
    else:
        initial = build_kd(rho, bp).q
    if isinstance(povm, list):
        final = tuple(dual_vector(f, BasisPair(v)).f.reshape(circuit.d, circuit.d) for f, v in zip(povm, bp.factors))
    else:
        final = dual_vector(povm, bp).f.reshape(bp.dim, bp.dim)
    ops = tuple(local_superop(g, bp) for g in circuit.gates)
    return SamplingModel(circuit.d, circuit.n, initial, ops, final)


def _global_model(circuit: Circuit, rho, povm, bp: BasisPair) -> SamplingModel:
    if isinstance(rho, list):
        rho = algebra.kron_all([algebra.as_density(s) for s in rho])
    if isinstance(povm, list):
        povm = algebra.kron_all(povm)
    full_bp = BasisPair(bp.v)
    ops = tuple(
        LocalOp((0,), superop_from_unitary(embed_unitary(g.u, g.targets, circuit.d, circuit.n), full_bp))
        for g in circuit.gates
    )
    initial = build_kd(rho, full_bp).q
    final = dual_vector(povm, full_bp).f.reshape(bp.dim, bp.dim)
    return SamplingModel(bp.dim, 1, initial, ops, final)


# -- path sampling -----------------------------------------------------------------


@dataclass(frozen=True)
class PathSample:
    indices: tuple[tuple[tuple[int, int], ...], ...]
    z: complex

    @property
    def x(self) -> float:
        return self.z.real


def _phase(x: np.ndarray) -> np.ndarray:
    mag = np.abs(x)
    out = np.ones_like(x, dtype=complex)
    nz = mag > 0
    out[nz] = x[nz] / mag[nz]
    return out


def _encode(ii: np.ndarray, jj: np.ndarray, targets, d: int) -> np.ndarray:
    """Local flat index ``i_loc * L + j_loc`` for the target qudits."""
    k = len(targets)
    i_loc = np.zeros(ii.shape[0], dtype=np.int64)
    j_loc = np.zeros(ii.shape[0], dtype=np.int64)
    for t in targets:
        i_loc = i_loc * d + ii[:, t]
        j_loc = j_loc * d + jj[:, t]
    return i_loc * d**k + j_loc


def _decode(flat: np.ndarray, ii: np.ndarray, jj: np.ndarray, targets, d: int) -> None:
    k = len(targets)
    L = d**k
    i_loc, j_loc = flat // L, flat % L
    for pos, t in enumerate(targets):
        w = d ** (k - 1 - pos)
        ii[:, t] = (i_loc // w) % d
        jj[:, t] = (j_loc // w) % d


def _sample_initial(model: SamplingModel, count: int, rng: np.random.Generator):
    d, n = model.d, model.n
    ii = np.empty((count, n), dtype=np.int64)
    jj = np.empty((count, n), dtype=np.int64)
    z = np.ones(count, dtype=complex)
    if model.product_initial:
        for q, table in enumerate(model.initial):
            flat = table.reshape(-1)
            mass = np.abs(flat)
            total = mass.sum()
            if total == 0:
                raise ZeroDistribution("initial KD table is identically zero")
            pick = rng.choice(flat.size, size=count, p=mass / total)
            ii[:, q], jj[:, q] = pick // d, pick % d
            z *= total * _phase(flat[pick])
    else:
        flat = model.initial.reshape(-1)
        mass = np.abs(flat)
        total = mass.sum()
        if total == 0:
            raise ZeroDistribution("initial KD table is identically zero")
        pick = rng.choice(flat.size, size=count, p=mass / total)
        D = d**n
        digits = algebra.digit_table(d, n)
        ii[:] = digits[pick // D]
        jj[:] = digits[pick % D]
        z *= total * _phase(flat[pick])
    return ii, jj, z


def _final_weight(model: SamplingModel, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    d, n = model.d, model.n
    if model.product_final:
        w = np.ones(ii.shape[0], dtype=complex)
        for q, table in enumerate(model.final):
            w *= table[ii[:, q], jj[:, q]]
        return w
    weights = d ** np.arange(n - 1, -1, -1)
    return model.final[ii @ weights, jj @ weights]


def _step(op: LocalOp, ii, jj, z, rng, d: int) -> None:
    col = _encode(ii, jj, op.targets, d)
    u = rng.random(col.size)
    rows = np.empty_like(col)
    for c in np.unique(col):
        sel = col == c
        # side="right" never lands on a zero-probability row
        rows[sel] = np.searchsorted(op.cdf[c], u[sel], side="right")
    z *= op.col_norms[col] * op.phases[rows, col]
    _decode(rows, ii, jj, op.targets, d)


def sample_paths(model: SamplingModel, count: int, rng: np.random.Generator, record: bool = False):
    """Draw ``count`` independent paths; returns the array of ``z`` values
    (and the per-step index history when ``record`` is set)."""
    ii, jj, z = _sample_initial(model, count, rng)
    history = [(ii.copy(), jj.copy())] if record else None
    for op in model.ops:
        _step(op, ii, jj, z, rng, model.d)
        if record:
            history.append((ii.copy(), jj.copy()))
    z *= _final_weight(model, ii, jj)
    return (z, history) if record else z


def sample_path(model: SamplingModel, rng: np.random.Generator) -> PathSample:
    z, history = sample_paths(model, 1, rng, record=True)
    indices = tuple(tuple((int(a), int(b)) for a, b in zip(ii[0], jj[0])) for ii, jj in history)
    return PathSample(indices, complex(z[0]))


def exhaustive_path_sum(model: SamplingModel, max_paths: int = config.MAX_PATHS) -> complex:
    """Exact mean of ``z`` by enumerating every path of non-zero probability.

    Each live path carries its probability and its estimator value, built with
    the same tables the sampler uses, so the sum checks the sampler's weights
    rather than re-deriving the Born probability.
    """
    d, n = model.d, model.n
    table = model.initial_table()
    flat = table.reshape(-1)
    mass = np.abs(flat)
    total = mass.sum()
    if total == 0:
        raise ZeroDistribution("initial KD table is identically zero")
    live = np.flatnonzero(mass > 0)
    if live.size > max_paths:
        raise PathSpaceTooLarge(f"{live.size} initial index pairs exceed cap {max_paths}")
    D = d**n
    digits = algebra.digit_table(d, n)
    ii, jj = digits[live // D].copy(), digits[live % D].copy()
    prob = mass[live] / total
    z = total * _phase(flat[live])

    for op in model.ops:
        col = _encode(ii, jj, op.targets, d)
        colmag = np.abs(op.superop.m)
        branch = colmag[:, col] > 0  # rows reachable from each path
        parent, rows = np.nonzero(branch.T)
        if parent.size > max_paths:
            raise PathSpaceTooLarge(f"path count {parent.size} exceeds cap {max_paths}")
        c = col[parent]
        prob = prob[parent] * colmag[rows, c] / op.col_norms[c]
        z = z[parent] * op.col_norms[c] * op.phases[rows, c]
        ii, jj = ii[parent].copy(), jj[parent].copy()
        _decode(rows, ii, jj, op.targets, d)

    z = z * _final_weight(model, ii, jj)
    return complex(np.sum(prob * z))


def path_count(model: SamplingModel) -> int:
    """Upper bound on the number of index chains, ``D^2 * prod_k L_k^2``."""
    count = (model.d**model.n) ** 2
    for op in model.ops:
        count *= op.superop.m.shape[0]
    return count


# -- budgets and estimation ----------------------------------------------------------


@dataclass(frozen=True)
class NegativityBudget:
    n_q: float
    gate_norms: tuple[float, ...]
    f_inf: float
    n_t: float


def negativity_budget(model: SamplingModel) -> NegativityBudget:
    if model.product_initial:
        n_q = math.prod(norm_l1(t) for t in model.initial)
    else:
        n_q = norm_l1(model.initial)
    if model.product_final:
        f_inf = math.prod(norm_inf(t) for t in model.final)
    else:
        f_inf = norm_inf(model.final)
    norms = tuple(op.induced_l1 for op in model.ops)
    return NegativityBudget(n_q, norms, f_inf, n_q * math.prod(norms) * f_inf)


def hoeffding_samples(epsilon: float, delta: float, n_t: float) -> int:
    """``ceil(2 N_T^2 ln(2/delta) / epsilon^2)``."""
    if not (epsilon > 0 and 0 < delta < 1):
        raise KDError("need epsilon > 0 and 0 < delta < 1")
    return math.ceil(2.0 / epsilon**2 * n_t**2 * math.log(2.0 / delta))


@dataclass(frozen=True)
class EstimateReport:
    estimate: float
    imag_mean: float
    samples_used: int
    epsilon: float
    delta: float
    n_t: float
    gate_norms: tuple[float, ...]
    seed: int
    workers: int
    elapsed: float
    exact: float | None = None

    def payload(self) -> dict:
        """Report fields minus wall-clock time, for reproducibility checks."""
        out = dict(self.__dict__)
        out.pop("elapsed")
        out["gate_norms"] = list(self.gate_norms)
        return out


def _lane_sum(model, count, seed, lane, chunk):
    rng = np.random.default_rng(np.random.SeedSequence([seed, lane]))
    re = im = 0.0
    done = 0
    while done < count:
        m = min(chunk, count - done)
        z = sample_paths(model, m, rng)
        re += float(z.real.sum())
        im += float(z.imag.sum())
        done += m
    return re, im


def estimate_from_model(
    model: SamplingModel,
    epsilon: float,
    delta: float,
    seed: int,
    samples: int | None = None,
    workers: int = 1,
    max_samples: int = config.MAX_SAMPLES,
    chunk: int = 50_000,
    exact: float | None = None,
) -> EstimateReport:
    budget = negativity_budget(model)
    s = hoeffding_samples(epsilon, delta, budget.n_t) if samples is None else int(samples)
    if s > max_samples:
        raise BudgetExceeded(f"{s} samples requested, cap is {max_samples}")
    start = time.perf_counter()
    counts = [s // workers + (1 if lane < s % workers else 0) for lane in range(workers)]
    if workers == 1:
        sums = [_lane_sum(model, counts[0], seed, 0, chunk)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(lambda lane: _lane_sum(model, counts[lane], seed, lane, chunk), range(workers)))
    re = sum(r for r, _ in sums) / s
    im = sum(i for _, i in sums) / s
    return EstimateReport(
        estimate=re,
        imag_mean=im,
        samples_used=s,
        epsilon=epsilon,
        delta=delta,
        n_t=budget.n_t,
        gate_norms=budget.gate_norms,
        seed=seed,
        workers=workers,
        elapsed=time.perf_counter() - start,
        exact=exact,
    )


def direct_probability(circuit: Circuit, rho, povm) -> float:
    """``Tr(F U rho U^dag)`` by dense evolution; the reference value."""
    rho = _split_states(rho, circuit.d, circuit.n)
    povm = _split_states(povm, circuit.d, circuit.n)
    if isinstance(rho, list):
        rho = algebra.kron_all([algebra.as_density(r) for r in rho])
    else:
        rho = algebra.as_density(rho)
    if isinstance(povm, list):
        povm = algebra.kron_all(povm)
    u = circuit.unitary()
    return float(np.trace(povm @ u @ rho @ u.conj().T).real)


def estimate_born(
    circuit: Circuit,
    rho,
    povm,
    bp: BasisPair,
    epsilon: float,
    delta: float,
    seed: int,
    workers: int = 1,
    max_samples: int = config.MAX_SAMPLES,
    with_exact: bool = True,
) -> EstimateReport:
    """Estimate ``Tr(F U rho U^dag)`` to precision ``epsilon`` with
    confidence ``1 - delta`` using the Hoeffding sample budget."""
    model = build_model(circuit, rho, povm, bp)
    exact = direct_probability(circuit, rho, povm) if with_exact else None
    return estimate_from_model(model, epsilon, delta, seed, workers=workers, max_samples=max_samples, exact=exact)
