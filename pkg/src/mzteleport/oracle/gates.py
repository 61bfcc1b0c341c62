"""Truncated Fock matrices of the elementary Gaussian unitaries.

Each matrix is the exact block ``<m|U|n>`` for ``m, n <= n_max``: the
disentangled (normal-ordered) forms used below never pass through
intermediate occupations above ``max(m, n)``, so no truncation error enters
the retained block. Column norms fall short of 1 only by the weight that
``U`` sends above ``n_max`` (the leakage).

Heisenberg conventions (``U^dag a U``):

* beamsplitter(t) on (0, 1): ``a0 -> sqrt(t) a0 + sqrt(1-t) a1``, ``a1 -> sqrt(1-t) a0 - sqrt(t) a1``
* phase(phi): ``a -> exp(i phi) a``
* squeezer(r): ``a -> cosh r a + sinh r a^dag``
* two_mode_squeezer(r): ``a0 -> cosh r a0 + sinh r a1^dag`` and symmetrically
* displacement(d): ``a -> a + d``
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln


def lowering(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)


def _expm_nilpotent(x: np.ndarray) -> np.ndarray:
    """``exp(x)`` for a strictly triangular ``x`` (the series terminates)."""
    out = np.eye(x.shape[0], dtype=complex)
    term = np.eye(x.shape[0], dtype=complex)
    for k in range(1, x.shape[0]):
        term = term @ x / k
        if not term.any():
            break
        out = out + term
    return out


def phase(phi: float, n_max: int) -> np.ndarray:
    return np.diag(np.exp(1j * phi * np.arange(n_max + 1)))


def displacement(delta: complex, n_max: int) -> np.ndarray:
    a = lowering(n_max + 1)
    return math.exp(-abs(delta) ** 2 / 2) * _expm_nilpotent(delta * a.T) @ _expm_nilpotent(-np.conj(delta) * a)


def squeezer(r: float, n_max: int) -> np.ndarray:
    a = lowering(n_max + 1)
    tau = math.tanh(r)
    scale = np.diag(math.cosh(r) ** -(np.arange(n_max + 1) + 0.5))
    return _expm_nilpotent(0.5 * tau * (a.T @ a.T)) @ scale @ _expm_nilpotent(-0.5 * tau * (a @ a))


def two_mode_squeezer(r: float, n_max: int) -> np.ndarray:
    """Matrix on the flattened pair index ``n0 * (n_max + 1) + n1``."""
    d = n_max + 1
    a = lowering(d)
    eye = np.eye(d)
    a0, a1 = np.kron(a, eye), np.kron(eye, a)
    tau = math.tanh(r)
    n_tot = np.add.outer(np.arange(d), np.arange(d)).ravel()
    scale = np.diag(math.cosh(r) ** -(n_tot + 1.0))
    return _expm_nilpotent(tau * a0.T @ a1.T) @ scale @ _expm_nilpotent(-tau * a0 @ a1)


@lru_cache(maxsize=256)
def _beamsplitter_cached(t: float, n_max: int) -> np.ndarray:
    d = n_max + 1
    st, ct = math.sqrt(t), math.sqrt(1.0 - t)
    # U a_k^dag U^dag = sum_j W[j, k] a_j^dag with W = [[st, ct], [ct, -st]]
    w = np.array([[st, ct], [ct, -st]])
    out = np.zeros((d * d, d * d))
    logf = gammaln(np.arange(2 * d) + 1.0)
    for n0 in range(d):
        # (W00 x + W10 y)^n0 as coefficients of x^i y^(n0-i)
        p0 = np.array([math.comb(n0, i) * w[0, 0] ** i * w[1, 0] ** (n0 - i) for i in range(n0 + 1)])
        for n1 in range(d):
            p1 = np.array([math.comb(n1, i) * w[0, 1] ** i * w[1, 1] ** (n1 - i) for i in range(n1 + 1)])
            poly = np.convolve(p0, p1)  # index = power of x
            n = n0 + n1
            for p in range(max(0, n - n_max), min(n, n_max) + 1):
                q = n - p
                amp = poly[p] * math.exp(0.5 * (logf[p] + logf[q] - logf[n0] - logf[n1]))
                out[p * d + q, n0 * d + n1] = amp
    return out


def beamsplitter(t: float, n_max: int) -> np.ndarray:
    if not 0.0 <= t <= 1.0:
        raise ValueError("transmission must lie in [0, 1]")
    return _beamsplitter_cached(float(t), int(n_max)).astype(complex)


def gate_matrix(kind: str, params: tuple, n_max: int) -> np.ndarray:
    if kind == "beamsplitter":
        return beamsplitter(params[0], n_max)
    if kind == "phase":
        return phase(params[0], n_max)
    if kind == "squeezer":
        return squeezer(params[0], n_max)
    if kind == "two_mode_squeezer":
        return two_mode_squeezer(params[0], n_max)
    if kind == "displacement":
        return displacement(params[0], n_max)
    raise ValueError(f"unknown gate kind {kind!r}")
