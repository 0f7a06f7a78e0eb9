"""Kirkwood-Dirac quasiprobability toolkit."""

from .errors import KDError
from .kd import BasisPair, KDDist, build_kd, marginals, reconstruct_rho, total_nonpositivity
from .superop import KDSuperop, born_exact, superop_from_kraus, superop_from_unitary
from .sampler import Circuit, Gate, build_model, estimate_born

__all__ = [
    "KDError",
    "BasisPair",
    "KDDist",
    "build_kd",
    "marginals",
    "reconstruct_rho",
    "total_nonpositivity",
    "KDSuperop",
    "born_exact",
    "superop_from_kraus",
    "superop_from_unitary",
    "Circuit",
    "Gate",
    "build_model",
    "estimate_born",
]
__version__ = "0.1.0"
