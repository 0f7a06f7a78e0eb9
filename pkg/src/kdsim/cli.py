"""Command-line interface.

Every verb resolves its flags into a config dict, runs one library call and
writes a JSON document holding the result plus the echoed config. Errors are
reported as JSON on stderr with exit code 2 (validation) or 3 (budget or
dimension cap exceeded).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import algebra, bounds, config, cycle, io, kd, sampler, spectral, superop
from .errors import KDError
from .kd import BasisPair

BASIS_HELP = "qft (per-qudit QFT_d), hadamard (d=2), random:<seed>, file:<path>"
STATE_HELP = "a<i>, b<j>, mixed, random:<seed>, file:<path>"
UNITARY_HELP = "qft, hadamard, x, z, identity, random:<seed>, file:<path>"


# -- spec parsing ---------------------------------------------------------------


def parse_basis(spec: str, d: int, n: int) -> BasisPair:
    if spec == "qft":
        return BasisPair.qft(d, n)
    if spec == "hadamard":
        if d != 2:
            raise KDError("hadamard basis needs d=2")
        return BasisPair.hadamard(n)
    if spec.startswith("random:"):
        return BasisPair.random(d**n, int(spec.split(":", 1)[1]))
    if spec.startswith("file:"):
        obj = io.load(spec.split(":", 1)[1])
        return io.basis_from_json(obj.get("basis", obj))
    raise KDError(f"unknown basis spec {spec!r}")


def parse_state(spec: str, bp: BasisPair) -> np.ndarray:
    """Returns a pure-state vector or a density matrix."""
    D = bp.dim
    if spec == "mixed":
        return np.eye(D, dtype=complex) / D
    if spec.startswith("random:"):
        return algebra.random_pure_state(D, int(spec.split(":", 1)[1]))
    if spec.startswith("file:"):
        obj = io.load(spec.split(":", 1)[1])
        m = io.matrix_from_json(obj)
        return m.reshape(-1) if 1 in m.shape else m
    if spec[:1] in ("a", "b") and spec[1:].isdigit():
        idx = int(spec[1:])
        if not 0 <= idx < D:
            raise KDError(f"basis index {idx} out of range for D={D}")
        return bp.a_state(idx) if spec[0] == "a" else bp.b_state(idx)
    raise KDError(f"unknown state spec {spec!r}")


def parse_unitary(spec: str, d: int, n: int) -> np.ndarray:
    D = d**n
    if spec == "qft":
        return algebra.kron_all([algebra.qft_matrix(d)] * n)
    if spec == "hadamard":
        if d != 2:
            raise KDError("hadamard gate needs d=2")
        return algebra.kron_all([algebra.hadamard()] * n)
    if spec in ("x", "z"):
        ones = np.ones(n, dtype=int)
        return algebra.wh_x(ones, d) if spec == "x" else algebra.wh_z(ones, d)
    if spec == "identity":
        return np.eye(D, dtype=complex)
    if spec.startswith("random:"):
        return algebra.random_unitary(D, int(spec.split(":", 1)[1]))
    if spec.startswith("file:"):
        return io.matrix_from_json(io.load(spec.split(":", 1)[1]))
    raise KDError(f"unknown unitary spec {spec!r}")


def _density(state) -> np.ndarray:
    return algebra.as_density(state)


# -- verbs --------------------------------------------------------------------------


def _basis(args) -> BasisPair:
    return parse_basis(args.v, args.d, args.n)


def _load_or_build_kd(args, bp):
    if getattr(args, "kd", None):
        return io.kd_from_json(io.load(args.kd))
    return kd.build_kd(parse_state(args.state, bp), bp)


def cmd_kd_build(args):
    bp = _basis(args)
    dist = kd.build_kd(parse_state(args.state, bp), bp)
    out = io.kd_to_json(dist)
    out["total_nonpositivity"] = kd.total_nonpositivity(dist)
    out["kd_positive"] = kd.is_kd_positive(dist, args.tol)
    rows = [(i, j, z.real, z.imag) for (i, j), z in np.ndenumerate(dist.q)]
    return out, (["i", "j", "re", "im"], rows)


def cmd_kd_evolve(args):
    bp = _basis(args)
    dist = _load_or_build_kd(args, bp)
    e = superop.superop_from_unitary(parse_unitary(args.u, args.d, args.n), bp)
    new = e.apply(dist)
    out = io.kd_to_json(new)
    out["total_nonpositivity"] = kd.total_nonpositivity(new)
    out["kd_positive"] = kd.is_kd_positive(new, args.tol)
    rows = [(i, j, z.real, z.imag) for (i, j), z in np.ndenumerate(new.q)]
    return out, (["i", "j", "re", "im"], rows)


def cmd_kd_marginals(args):
    bp = _basis(args)
    dist = _load_or_build_kd(args, bp)
    pa, pb = kd.marginals(dist)
    out = {"probs_a": pa.tolist(), "probs_b": pb.tolist(), "imag_residue": kd.marginal_residue(dist)}
    rows = [(k, pa[k], pb[k]) for k in range(dist.dim)]
    return out, (["index", "prob_a", "prob_b"], rows)


def _superop_from_args(args, bp):
    if args.kraus:
        obj = io.load(args.kraus)
        ops = [io.matrix_from_json(m) for m in obj["kraus"]]
        return superop.superop_from_kraus(ops, bp, tol=args.channel_tol)
    return superop.superop_from_unitary(parse_unitary(args.u, args.d, args.n), bp)


def cmd_superop_build(args):
    bp = _basis(args)
    e = _superop_from_args(args, bp)
    out = io.superop_to_json(e)
    out["column_sum_error"] = e.column_sum_error()
    out["entanglement_fidelity"] = superop.entanglement_fidelity(e)
    out["induced_l1"] = superop.induced_l1(e)
    rows = [(r, c, z.real, z.imag) for (r, c), z in np.ndenumerate(e.m)]
    return out, (["row", "col", "re", "im"], rows)


def cmd_superop_classify(args):
    bp = _basis(args)
    u = parse_unitary(args.u, args.d, args.n)
    e = superop.superop_from_unitary(u, bp)
    cert = superop.generalized_permutation_certificate(u, bp, args.perm_tol)
    fixture = [bp.a_state(i) for i in range(bp.dim)] + [bp.b_state(j) for j in range(bp.dim)]
    out = {
        "stochastic": superop.is_stochastic(e, args.tol),
        "gen_perm": cert is not None,
        "positivity_preserving_on_fixture": superop.is_positivity_preserving_on(u, bp, fixture, args.tol),
        "induced_l1": superop.induced_l1(e),
        "inverse_relation_residual": superop.inverse_relation_residual(u, bp),
        "certificate": None if cert is None else cert.__dict__,
    }
    return out, None


def _circuit_inputs(args):
    circ = io.circuit_from_json(io.load(args.circuit))
    bp = parse_basis(args.v, circ.d, circ.n)
    local = BasisPair(bp.factors[0]) if bp.is_product and len({f.tobytes() for f in bp.factors}) == 1 else None

    def per_qudit(spec):
        # a<i>/b<j> act on every qudit when the basis factorises
        if local is not None and spec[:1] in ("a", "b") and spec[1:].isdigit():
            psi = parse_state(spec, local)
            return [algebra.projector(psi)] * circ.n
        st = parse_state(spec, bp)
        return algebra.projector(st) if st.ndim == 1 else st

    rho = per_qudit(args.state)
    povm = per_qudit(args.povm)
    return circ, bp, rho, povm


def cmd_simulate_estimate(args):
    circ, bp, rho, povm = _circuit_inputs(args)
    report = sampler.estimate_born(
        circ, rho, povm, bp, args.epsilon, args.delta, args.seed, workers=args.workers, max_samples=args.max_samples
    )
    return io.report_to_json(report), (io.ESTIMATE_CSV_HEADER, [io.report_csv_row(report)])


def cmd_simulate_budget(args):
    circ, bp, rho, povm = _circuit_inputs(args)
    model = sampler.build_model(circ, rho, povm, bp)
    b = sampler.negativity_budget(model)
    out = io.budget_to_json(b)
    out["samples"] = sampler.hoeffding_samples(args.epsilon, args.delta, b.n_t)
    rows = [(k + 1, g) for k, g in enumerate(b.gate_norms)]
    return out, (["gate", "induced_l1"], rows)


def cmd_spectral_selfsim(args):
    bp = _basis(args)
    d, n = spectral.qft_family(bp)
    dist = _load_or_build_kd(args, bp)
    qhat = spectral.hat_dft(dist, bp)
    out = {
        "self_similarity_residual": spectral.self_similarity_residual(qhat, d, n),
        "hermiticity_residual": spectral.hermiticity_residual(dist, bp),
        "qhat": io._pairs(qhat),
    }
    rows = [(x, y, z.real, z.imag) for (x, y), z in np.ndenumerate(qhat)]
    return out, (["x", "y", "re", "im"], rows)


def cmd_spectral_wigner(args):
    bp = _basis(args)
    if args.inverse:
        wd = io.wigner_from_json(io.load(args.inverse))
        dist = spectral.wigner_to_kd(wd)
        rows = [(i, j, z.real, z.imag) for (i, j), z in np.ndenumerate(dist.q)]
        return io.kd_to_json(dist), (["i", "j", "re", "im"], rows)
    dist = _load_or_build_kd(args, bp)
    wd = spectral.kd_to_wigner(dist, bp)
    rows = [(p, q, x) for (p, q), x in np.ndenumerate(wd.w)]
    return io.wigner_to_json(wd), (["p", "q", "w"], rows)


def cmd_verify_bounds(args):
    bp = _basis(args)
    psi = parse_state(args.state, bp)
    if psi.ndim != 1:
        raise KDError("bounds need a pure state")
    out = bounds.check_bounds(psi, bp).to_dict()
    if bp.is_mub():
        out["mub_uniform"] = bounds.check_mub_uniformity(psi, bp)
    return out, None


def cmd_verify_hermiticity(args):
    bp = _basis(args)
    dist = _load_or_build_kd(args, bp)
    return {"hermiticity_residual": spectral.hermiticity_residual(dist, bp)}, None


def cmd_cycle_run(args):
    bp = _basis(args)
    if args.k is not None or args.l is not None:
        if args.k is None or args.l is None:
            raise KDError("superoperator elements need both --k and --l")
        u = parse_unitary(args.u, args.d, args.n)
        est = cycle.estimate_superop_element(
            u, args.i, args.j, args.k, args.l, bp, args.shots, args.seed, args.estimate_denominator
        )
        exact = complex(superop.superop_from_unitary(u, bp).m[args.i * bp.dim + args.j, args.k * bp.dim + args.l])
    else:
        rho = _density(parse_state(args.state, bp))
        est = cycle.estimate_quasiprobability(rho, args.i, args.j, bp, args.shots, args.seed)
        exact = complex(kd.build_kd(rho, bp).q[args.i, args.j])
    reports = [r.__dict__ | {"shots": r.shots} for r in est.reports]
    out = {
        "estimate": [est.value.real, est.value.imag],
        "stderr": [est.stderr_re, est.stderr_im],
        "exact": [exact.real, exact.imag],
        "reports": reports,
    }
    if args.s is not None:
        out["report"] = reports[args.s]
    return out, None


# -- parser -----------------------------------------------------------------------------


def _common(p, state=True, kd_file=False):
    p.add_argument("--d", type=int, default=2, help="local dimension")
    p.add_argument("--n", type=int, default=1, help="number of qudits")
    p.add_argument("--v", default="qft", help=f"basis spec: {BASIS_HELP}")
    if state:
        p.add_argument("--state", default="a0", help=f"state spec: {STATE_HELP}")
    if kd_file:
        p.add_argument("--kd", help="KD distribution JSON file (overrides --state)")
    p.add_argument("--tol", type=float, default=config.POSITIVITY_TOL, help="positivity tolerance (default %(default)g)")


def _outputs(p):
    p.add_argument("--out", help="write the JSON result here instead of stdout")
    p.add_argument("--csv", help="also write a CSV table here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kdsim", description="Kirkwood-Dirac quasiprobability toolkit")
    groups = parser.add_subparsers(dest="group", required=True)

    g = groups.add_parser("kd").add_subparsers(dest="verb", required=True)
    p = g.add_parser("build", help="build a KD distribution")
    _common(p)
    _outputs(p)
    p.set_defaults(func=cmd_kd_build)
    p = g.add_parser("evolve", help="evolve a distribution with a unitary's superoperator")
    _common(p, kd_file=True)
    p.add_argument("--u", default="qft", help=f"unitary spec: {UNITARY_HELP}")
    _outputs(p)
    p.set_defaults(func=cmd_kd_evolve)
    p = g.add_parser("marginals", help="Born marginals of a distribution")
    _common(p, kd_file=True)
    _outputs(p)
    p.set_defaults(func=cmd_kd_marginals)

    g = groups.add_parser("superop").add_subparsers(dest="verb", required=True)
    for name, func in (("build", cmd_superop_build), ("classify", cmd_superop_classify)):
        p = g.add_parser(name)
        _common(p, state=False)
        p.add_argument("--u", default="qft", help=f"unitary spec: {UNITARY_HELP}")
        p.add_argument("--perm-tol", type=float, default=config.PERM_TOL, help="permutation detection tolerance (default %(default)g)")
        p.add_argument("--channel-tol", type=float, default=config.CHANNEL_TOL, help="Kraus completeness tolerance (default %(default)g)")
        if name == "build":
            p.add_argument("--kraus", help='JSON file {"kraus": [matrix, ...]} (overrides --u)')
        _outputs(p)
        p.set_defaults(func=func)

    g = groups.add_parser("simulate").add_subparsers(dest="verb", required=True)
    for name, func in (("estimate", cmd_simulate_estimate), ("budget", cmd_simulate_budget)):
        p = g.add_parser(name)
        p.add_argument("--circuit", required=True, help="circuit JSON file")
        p.add_argument("--v", default="qft", help=f"basis spec: {BASIS_HELP}")
        p.add_argument("--state", default="a0", help=f"input state spec, per qudit for a<i>/b<j>: {STATE_HELP}")
        p.add_argument("--povm", default="a0", help="projector spec for the measured outcome, same syntax as --state")
        p.add_argument("--epsilon", type=float, default=0.05)
        p.add_argument("--delta", type=float, default=0.05)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--max-samples", type=int, default=config.MAX_SAMPLES, help="sample cap (default %(default)d)")
        _outputs(p)
        p.set_defaults(func=func)

    g = groups.add_parser("spectral").add_subparsers(dest="verb", required=True)
    p = g.add_parser("selfsim", help="self-similarity of the DFT of a QFT-basis distribution")
    _common(p, kd_file=True)
    _outputs(p)
    p.set_defaults(func=cmd_spectral_selfsim)
    p = g.add_parser("wigner", help="KD to Wigner (or back with --inverse)")
    _common(p, kd_file=True)
    p.add_argument("--inverse", help="Wigner JSON file to convert back to a KD distribution")
    _outputs(p)
    p.set_defaults(func=cmd_spectral_wigner)

    g = groups.add_parser("verify").add_subparsers(dest="verb", required=True)
    p = g.add_parser("bounds", help="magnitude bounds for a pure state")
    _common(p)
    _outputs(p)
    p.set_defaults(func=cmd_verify_bounds)
    p = g.add_parser("hermiticity", help="Hermiticity constraint residual")
    _common(p, kd_file=True)
    _outputs(p)
    p.set_defaults(func=cmd_verify_hermiticity)

    g = groups.add_parser("cycle").add_subparsers(dest="verb", required=True)
    p = g.add_parser("run", help="simulated cycle test for Q_ij or E_U[ij,kl]")
    _common(p)
    for idx in ("i", "j"):
        p.add_argument(f"--{idx}", type=int, default=0)
    for idx in ("k", "l"):
        p.add_argument(f"--{idx}", type=int, default=None)
    p.add_argument("--u", default="qft", help=f"unitary spec for superoperator elements: {UNITARY_HELP}")
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--s", type=int, choices=(0, 1), default=None, help="also report the single s-mode experiment")
    p.add_argument("--estimate-denominator", action="store_true", help="estimate |<b_l|a_k>|^2 with a SWAP test")
    _outputs(p)
    p.set_defaults(func=cmd_cycle_run)
    return parser


def _resolved_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out", "csv")}
    cfg["max_dim"] = config.max_dim()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result, table = args.func(args)
    except KDError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        print(json.dumps(err), file=sys.stderr)
        return exc.exit_code
    result = dict(result)
    result["config"] = _resolved_config(args)
    text = io.dump(result, args.out)
    if args.out is None:
        print(text)
    if args.csv and table is not None:
        io.write_csv(args.csv, *table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
