"""Gate application kernels for dense Fock tensors.

Two interchangeable paths:

* ``numba``: the gate is stored as a sparse (row, col, value) list and
  applied by a jitted loop. Fock-space gates here are very sparse (a
  beamsplitter conserves total photon number, a squeezer conserves parity).
* ``numpy``: dense matmul of the reshaped state against the full gate.

The numba path is used when numba imports and ``MZTELEPORT_DISABLE_NUMBA`` is
unset or ``0``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_BACKEND = "numba" if HAVE_NUMBA and os.environ.get("MZTELEPORT_DISABLE_NUMBA", "0") in ("", "0") else "numpy"


def get_backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _BACKEND = name


def _sparse_matmul_py(rows, cols, vals, x, out):
    for k in range(rows.shape[0]):
        r, c, v = rows[k], cols[k], vals[k]
        for j in range(x.shape[1]):
            out[r, j] += v * x[c, j]
    return out


if HAVE_NUMBA:
    _sparse_matmul = numba.njit(cache=True, nogil=True)(_sparse_matmul_py)
else:  # pragma: no cover
    _sparse_matmul = _sparse_matmul_py


def to_sparse(gate: np.ndarray, tol: float = 0.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols = np.nonzero(np.abs(gate) > tol)
    return rows.astype(np.int64), cols.astype(np.int64), gate[rows, cols].astype(np.complex128)


def apply_gate(psi: np.ndarray, axes: tuple[int, ...], gate: np.ndarray, sparse=None) -> np.ndarray:
    """Apply ``gate`` (shape ``(D, D)`` with ``D = prod(dim of axes)``) to ``psi`` along ``axes``.

    ``sparse`` may carry the precomputed ``to_sparse(gate)`` triple.
    """
    axes = tuple(axes)
    moved = np.moveaxis(psi, axes, tuple(range(len(axes))))
    front = moved.shape[: len(axes)]
    x = np.ascontiguousarray(moved.reshape(int(np.prod(front)), -1))
    if _BACKEND == "numba":
        rows, cols, vals = sparse if sparse is not None else to_sparse(gate)
        y = _sparse_matmul(rows, cols, vals, x, np.zeros_like(x))
    else:
        y = gate @ x
    return np.moveaxis(y.reshape(moved.shape), tuple(range(len(axes))), axes)
