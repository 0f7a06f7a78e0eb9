"""JSON and CSV serialisation of package objects.

Complex arrays are written as lists of ``[re, im]`` pairs in row-major order;
Python's float repr round-trips exactly, so reloading is bit-identical.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import KDError
from .kd import BasisPair, KDDist
from .sampler import Circuit, EstimateReport, Gate, NegativityBudget
from .spectral import WHTable, WignerDist
from .superop import DualVector, KDSuperop


def _pairs(a) -> list:
    a = np.asarray(a, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in a]


def _from_pairs(entries) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise KDError("complex entries must be [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def matrix_to_json(m) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return {"rows": m.shape[0], "cols": m.shape[1], "entries": _pairs(m)}


def matrix_from_json(obj: dict) -> np.ndarray:
    flat = _from_pairs(obj["entries"])
    rows, cols = int(obj["rows"]), int(obj["cols"])
    if flat.size != rows * cols:
        raise KDError(f"matrix has {flat.size} entries, expected {rows * cols}")
    if not np.all(np.isfinite(flat)):
        raise KDError("matrix entries must be finite")
    return flat.reshape(rows, cols)


def kd_to_json(dist: KDDist) -> dict:
    return {"dim": dist.dim, "q": _pairs(dist.q)}


def kd_from_json(obj: dict) -> KDDist:
    D = int(obj["dim"])
    q = _from_pairs(obj["q"])
    if q.size != D * D:
        raise KDError(f"KD table has {q.size} entries, expected {D * D}")
    dist = KDDist(q.reshape(D, D))
    dist.warn_if_unnormalized()
    return dist


def basis_to_json(bp: BasisPair) -> dict:
    factors = [matrix_to_json(f) for f in bp.factors] if bp.is_product else None
    return {"dim": bp.dim, "v": matrix_to_json(bp.v), "factors": factors}


def basis_from_json(obj: dict) -> BasisPair:
    v = matrix_from_json(obj["v"])
    factors = obj.get("factors")
    if factors:
        return BasisPair(v, tuple(matrix_from_json(f) for f in factors))
    return BasisPair(v)


def superop_to_json(e: KDSuperop) -> dict:
    return {"dim": e.dim, **matrix_to_json(e.m)}


def superop_from_json(obj: dict) -> KDSuperop:
    return KDSuperop(matrix_from_json(obj))


def dual_to_json(fd: DualVector) -> dict:
    return {"dim": fd.dim, "f": _pairs(fd.f)}


def dual_from_json(obj: dict) -> DualVector:
    return DualVector(_from_pairs(obj["f"]))


def circuit_to_json(c: Circuit) -> dict:
    return {
        "d": c.d,
        "n": c.n,
        "gates": [{"targets": list(g.targets), "u": matrix_to_json(g.u)} for g in c.gates],
    }


def circuit_from_json(obj: dict) -> Circuit:
    gates = tuple(Gate(matrix_from_json(g["u"]), tuple(g["targets"])) for g in obj["gates"])
    return Circuit(int(obj["d"]), int(obj["n"]), gates)


def wh_to_json(t: WHTable) -> dict:
    return {"d": t.d, "n": t.n, "values": _pairs(t.values)}


def wh_from_json(obj: dict) -> WHTable:
    d, n = int(obj["d"]), int(obj["n"])
    return WHTable(d, n, _from_pairs(obj["values"]).reshape(d**n, d**n))


def wigner_to_json(w: WignerDist) -> dict:
    return {"d": w.d, "n": w.n, "values": [float(x) for x in w.w.reshape(-1)]}


def wigner_from_json(obj: dict) -> WignerDist:
    d, n = int(obj["d"]), int(obj["n"])
    return WignerDist(d, n, np.asarray(obj["values"], dtype=float).reshape(d**n, d**n))


def budget_to_json(b: NegativityBudget) -> dict:
    return {"n_q": b.n_q, "gate_norms": list(b.gate_norms), "f_inf": b.f_inf, "n_t": b.n_t}


def report_to_json(r: EstimateReport, include_elapsed: bool = True) -> dict:
    out = r.payload()
    if include_elapsed:
        out["elapsed"] = r.elapsed
    return out


ESTIMATE_CSV_HEADER = ["estimate", "exact", "n_t", "samples", "seconds"]


def report_csv_row(r: EstimateReport) -> list:
    return [r.estimate, "" if r.exact is None else r.exact, r.n_t, r.samples_used, r.elapsed]


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def dump(obj: dict, path=None) -> str:
    text = json.dumps(obj, indent=1, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load(path) -> dict:
    return json.loads(Path(path).read_text())
