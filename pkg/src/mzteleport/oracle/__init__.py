"""Independent truncated-Fock validation of the symbolic engine."""
from ._kernels import get_backend, set_backend
from .decompose import Circuit, ElementaryOp, NonCanonicalError, decompose, heisenberg
from .dense import DEFAULT_NMAX, LEAKAGE_FLAG, DenseState, oracle_visibility, simulate

__all__ = [
    "Circuit",
    "DEFAULT_NMAX",
    "DenseState",
    "ElementaryOp",
    "LEAKAGE_FLAG",
    "NonCanonicalError",
    "decompose",
    "get_backend",
    "heisenberg",
    "oracle_visibility",
    "set_backend",
    "simulate",
]
