"""Global limits and default tolerances."""

import os

#: Environment variable overriding the Hilbert-space dimension cap.
MAX_DIM_ENV = "KDSIM_MAX_DIM"
DEFAULT_MAX_DIM = 128

ZERO_TOL = 1e-10
POSITIVITY_TOL = 1e-10
UNITARY_TOL = 1e-10
CHANNEL_TOL = 1e-10
PERM_TOL = 1e-8
MUB_TOL = 1e-10

MAX_PATHS = 10**7
MAX_SAMPLES = 10**8
STATEVECTOR_CAP = 256


def max_dim() -> int:
    """Current cap on the Hilbert-space dimension D."""
    raw = os.environ.get(MAX_DIM_ENV)
    if raw is None:
        return DEFAULT_MAX_DIM
    return int(raw)
