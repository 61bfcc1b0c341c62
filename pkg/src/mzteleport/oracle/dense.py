"""Truncated state-vector simulation of decomposed interferometer networks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..experiments import reduced_density
from ..interferometer import MzConfig, Teleport, VisibilityReport, build_mz, report_from_counts
from . import _kernels
from .decompose import Circuit, ElementaryOp, decompose
from .gates import gate_matrix

LEAKAGE_FLAG = 1e-4
DEFAULT_NMAX = 10


@dataclass
class DenseState:
    n_max: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.amplitudes, dtype=complex)
        if any(d != self.n_max + 1 for d in a.shape):
            raise ValueError(f"every axis must have length n_max + 1 = {self.n_max + 1}")
        self.amplitudes = a

    @classmethod
    def vacuum(cls, n_modes: int, n_max: int = DEFAULT_NMAX) -> DenseState:
        a = np.zeros((n_max + 1,) * n_modes, dtype=complex)
        a[(0,) * n_modes] = 1.0
        return cls(n_max, a)

    @classmethod
    def fock(cls, occupations: Sequence[int], n_max: int = DEFAULT_NMAX) -> DenseState:
        a = np.zeros((n_max + 1,) * len(occupations), dtype=complex)
        a[tuple(occupations)] = 1.0
        return cls(n_max, a)

    @property
    def n_modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def leakage(self) -> float:
        return max(0.0, 1.0 - self.norm_sq)

    @property
    def reliable(self) -> bool:
        return self.leakage <= LEAKAGE_FLAG

    def mean_number(self, mode: int) -> float:
        p = np.abs(self.amplitudes) ** 2
        marginal = p.sum(axis=tuple(i for i in range(self.n_modes) if i != mode))
        return float(marginal @ np.arange(self.n_max + 1))


def _apply_op(psi: np.ndarray, op: ElementaryOp, n_max: int, cache: dict) -> np.ndarray:
    key = (op.kind, op.params)
    if key not in cache:
        g = gate_matrix(op.kind, op.params, n_max)
        cache[key] = (g, _kernels.to_sparse(g, tol=1e-300))
    g, sp = cache[key]
    return _kernels.apply_gate(psi, op.modes, g, sp)


def simulate(ops: Sequence[ElementaryOp], state: DenseState) -> DenseState:
    """Apply the gate list in order; lost norm is the truncation leakage."""
    psi = state.amplitudes
    cache: dict = {}
    for op in ops:
        if max(op.modes) >= state.n_modes:
            raise ValueError(f"op {op} addresses a wire beyond {state.n_modes}")
        psi = _apply_op(psi, op, state.n_max, cache)
    return DenseState(state.n_max, psi)


def _embed(vec: np.ndarray, basis, n_occ: int, circ: Circuit, n_max: int) -> DenseState:
    psi = np.zeros((n_max + 1,) * circ.n_modes, dtype=complex)
    rest = (0,) * (circ.n_modes - n_occ)
    for amp, occ in zip(vec, basis):
        if amp != 0:
            psi[tuple(occ) + rest] = amp
    return DenseState(n_max, psi)


def oracle_visibility(cfg: MzConfig, n_max: int = DEFAULT_NMAX, teleport: Teleport | None = None) -> VisibilityReport:
    """Visibility from a truncated dense simulation of each polarization block.

    Each block's output pair is decomposed into elementary gates; the block's
    input (possibly mixed, when polarizations are entangled) is expanded in
    eigenvectors of its reduced density matrix. ``teleport`` overrides the
    arm-``c`` channel as in :func:`build_mz`.
    """
    net = build_mz(cfg, teleport=teleport)
    occupied_all = {m for ket in net.state.amplitudes for m, _ in ket}
    count_a = count_b = 0.0
    leak = 0.0
    for p, (a_out, b_out) in net.outputs.items():
        occ = [m for m in net.registry.modes if m.index in occupied_all and m in set(a_out.modes) | set(b_out.modes)]
        circ = decompose([a_out, b_out], occ)
        if occ:
            rho = reduced_density(net.state, occ, n_cut=n_max)
            w, v = np.linalg.eigh(rho.matrix)
            comps = [(float(wi), v[:, i]) for i, wi in enumerate(w) if wi > 1e-14]
            basis = rho.basis
        else:
            comps, basis = [(1.0, np.array([1.0]))], [()]
        for weight, vec in comps:
            out = simulate(circ.ops, _embed(vec, basis, len(occ), circ, n_max))
            count_a += weight * out.mean_number(0)
            count_b += weight * out.mean_number(1)
            leak += weight * out.leakage
    return report_from_counts(count_a, count_b, "oracle", leakage=leak)
