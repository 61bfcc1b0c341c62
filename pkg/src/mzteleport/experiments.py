"""Scenario layer: down-converted photon pairs, fidelity versus visibility, cloning of the classical beam."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .fock import FockState, expect_total_coincidence, expect_total_number, make_ket, tensor
from .interferometer import (
    MzConfig,
    MzNetwork,
    VisibilityReport,
    build_mz,
    engine_counts,
    mz_visibility,
    report_from_counts,
)
from .modes import FieldExpression, ModeId, ModeRegistry, beamsplitter, dagger, identity_expr, linear_combine
from .teleporter import TeleporterParams, finite_teleport

POL = ("h", "v")


# ------------------------------------------------------------------ photon pairs


@dataclass(frozen=True)
class PairSourceSpec:
    """Weak down-converter emitting polarization-correlated pairs into beams a and a'.

    ``order`` is the highest number of pairs kept: 1 reproduces the usual
    first-order state, 2 adds the double-pair terms (``chi^2``) of the
    underlying two-mode squeezed vacuum.
    """

    chi: float
    order: int = 1
    chi_max: float = 0.2

    def __post_init__(self) -> None:
        if not 0.0 <= self.chi <= self.chi_max:
            raise ValueError(f"chi must lie in [0, {self.chi_max}], got {self.chi}")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if self.chi > 0.1:
            warnings.warn(f"chi={self.chi} > 0.1: truncation in chi becomes coarse", stacklevel=2)


@dataclass
class PairSource:
    registry: ModeRegistry
    a: dict[str, ModeId]
    a_prime: dict[str, ModeId]
    state: FockState

    @property
    def nbar(self) -> float:
        """Mean photon number launched into beam a."""
        return sum(self.state.mean_occupation(m) for m in self.a.values())


def pair_state(spec: PairSourceSpec, reg: ModeRegistry | None = None) -> PairSource:
    reg = reg if reg is not None else ModeRegistry()
    a = {p: reg.new(f"a_{p}") for p in POL}
    ap = {p: reg.new(f"a'_{p}") for p in POL}
    terms = []
    for nh, nv in itertools.product(range(spec.order + 1), repeat=2):
        if nh + nv <= spec.order:
            occ = {a["h"]: nh, ap["h"]: nh, a["v"]: nv, ap["v"]: nv}
            terms.append((spec.chi ** (nh + nv), occ))
    return PairSource(reg, a, ap, FockState.from_terms(terms).normalized())


def _pair_network(spec: PairSourceSpec, cfg: MzConfig) -> tuple[PairSource, MzNetwork]:
    src = pair_state(spec)
    inputs = {p: identity_expr(src.registry, m) for p, m in src.a.items()}
    return src, build_mz(cfg, src.registry, inputs=inputs, state=src.state)


def raw_visibility(spec: PairSourceSpec, tele: TeleporterParams, balance_eta: float = 1.0) -> VisibilityReport:
    """Singles-count visibility with beam a' ignored.

    Flagged degenerate when the source launches no photons (``chi = 0``).
    """
    src, net = _pair_network(spec, MzConfig(tele, balance_eta))
    return _flag_empty(report_from_counts(*engine_counts(net), "engine"), src)


def conditional_visibility(spec: PairSourceSpec, tele: TeleporterParams, balance_eta: float = 1.0) -> VisibilityReport:
    """Visibility of coincidences between beam a' and each interferometer output."""
    src, net = _pair_network(spec, MzConfig(tele, balance_eta))
    herald = [identity_expr(src.registry, m) for m in src.a_prime.values()]
    ca = expect_total_coincidence(herald, net.port_a, src.state)
    cb = expect_total_coincidence(herald, net.port_b, src.state)
    return _flag_empty(report_from_counts(ca, cb, "engine"), src)


def _flag_empty(r: VisibilityReport, src: PairSource) -> VisibilityReport:
    if src.nbar == 0.0:
        return replace(r, visibility=0.0, degenerate=True)
    return r


# ---------------------------------------------------------------- density matrices


@dataclass(frozen=True)
class DensityMatrix:
    basis: tuple[tuple[int, ...], ...]
    matrix: np.ndarray
    truncated_weight: float = 0.0

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (len(self.basis), len(self.basis)):
            raise ValueError("matrix shape does not match basis")
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def check(self, tol: float = 1e-12, psd_tol: float = 1e-10) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(self.trace - 1.0) > tol:
            raise ValueError(f"density matrix trace is {self.trace}")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -psd_tol:
            raise ValueError("density matrix is not positive semidefinite")

    @classmethod
    def mixture(cls, parts: Sequence[tuple[float, DensityMatrix]]) -> DensityMatrix:
        basis = parts[0][1].basis
        if any(p.basis != basis for _, p in parts):
            raise ValueError("mixture components use different bases")
        return cls(basis, sum(w * p.matrix for w, p in parts),
                   sum(w * p.truncated_weight for w, p in parts))


def reduced_density(s: FockState, keep: Sequence[ModeId], n_cut: int = 2) -> DensityMatrix:
    """Partial trace of a pure state onto ``keep``, each kept occupation capped at ``n_cut``."""
    keep_idx = [m.index for m in keep]
    basis = tuple(itertools.product(range(n_cut + 1), repeat=len(keep_idx)))
    pos = {b: i for i, b in enumerate(basis)}
    rows: dict[tuple, dict[int, complex]] = {}
    dropped = 0.0
    for ket, c in s.amplitudes.items():
        occ = dict(ket)
        kept = tuple(occ.pop(i, 0) for i in keep_idx)
        rest = tuple(sorted(occ.items()))
        if kept not in pos:
            dropped += abs(c) ** 2
            continue
        rows.setdefault(rest, {})[pos[kept]] = c
    rho = np.zeros((len(basis), len(basis)), dtype=complex)
    for amps in rows.values():
        vec = np.zeros(len(basis), dtype=complex)
        for i, c in amps.items():
            vec[i] = c
        rho += np.outer(vec, vec.conj())
    if dropped > 1e-10:
        warnings.warn(f"reduced_density: n_cut={n_cut} discards weight {dropped:.3g}", stacklevel=2)
    return DensityMatrix(basis, rho, dropped)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def mixed_fidelity(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """Uhlmann fidelity ``Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))`` (not squared)."""
    if rho1.basis != rho2.basis:
        raise ValueError("density matrices are expressed in different bases")
    s1 = _psd_sqrt(rho1.matrix)
    w = np.linalg.eigvalsh(s1 @ rho2.matrix @ s1)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


# ------------------------------------------------------------------------- cheat


@dataclass(frozen=True)
class CheatResult:
    fidelity: float
    visibility: float
    honest_visibility: float
    rho_a: DensityMatrix
    rho_out: DensityMatrix


def unpolarized_mixture(nbar: float) -> list[tuple[float, dict[str, int]]]:
    """Vacuum/single-photon mixture with mean ``nbar`` split evenly over h and v."""
    if not 0.0 <= nbar <= 1.0:
        raise ValueError("nbar must lie in [0, 1] for a vacuum/single-photon mixture")
    return [(1.0 - nbar, {}), (nbar / 2, {"h": 1}), (nbar / 2, {"v": 1})]


def fidelity_cheat(spec: PairSourceSpec, honest: TeleporterParams | None = None) -> CheatResult:
    """Entanglement-free strategy: Bob ignores Alice and emits an unpolarized mixture of equal nbar.

    Its output state matches the input's reduced state exactly, yet it carries
    no phase relation to the unteleported arm, so the interferometer sees no
    fringes.
    """
    if spec.order != 1:
        raise ValueError("the cheat reproduces the first-order pair state only")
    src = pair_state(spec)
    reg = src.registry
    rho_a = reduced_density(src.state, [src.a[p] for p in POL], n_cut=1)
    bob = {p: reg.new(f"bob_{p}") for p in POL}

    def discard_and_emit(c: FieldExpression, r: ModeRegistry, tag: str) -> FieldExpression:
        return identity_expr(r, bob[tag.lstrip("_")])

    inputs = {p: identity_expr(reg, m) for p, m in src.a.items()}
    ca = cb = 0.0
    parts = []
    for w, occ in unpolarized_mixture(src.nbar):
        bob_state = FockState({make_ket({bob[p]: n for p, n in occ.items()}): 1.0})
        glob = tensor(src.state, bob_state)
        net = build_mz(MzConfig(), reg, teleport=discard_and_emit, inputs=inputs, state=glob)
        ca += w * expect_total_number(net.port_a, glob)
        cb += w * expect_total_number(net.port_b, glob)
        parts.append((w, reduced_density(glob, [bob[p] for p in POL], n_cut=1)))
    rho_out = DensityMatrix.mixture(parts)
    vis = report_from_counts(ca, cb, "engine").visibility
    honest = honest if honest is not None else TeleporterParams(H=1e6, lam=1.0)
    honest_vis = raw_visibility(spec, honest).visibility
    return CheatResult(mixed_fidelity(rho_a, rho_out), vis, honest_vis, rho_a, rho_out)


# ----------------------------------------------------------------------- cloning


def clone_classical_channel(a_c: FieldExpression, reg: ModeRegistry | None = None, tag: str = "") -> tuple[FieldExpression, FieldExpression]:
    """Optimal Gaussian cloner: phase-insensitive gain-2 amplifier followed by a 50:50 split."""
    reg = reg if reg is not None else a_c.registry
    vc1 = identity_expr(reg, reg.new(f"v_c1{tag}"))
    vc2 = identity_expr(reg, reg.new(f"v_c2{tag}"))
    amplified = linear_combine([(math.sqrt(2.0), a_c), (1.0, dagger(vc1))])
    return beamsplitter(amplified, vc2, 0.5)


def cloned_visibility(
    tele: TeleporterParams, eps: float, clone: int | None = 0, balance_eta: float = 1.0
) -> VisibilityReport:
    """Visibility when Bob reconstructs from one clone of the classical beam.

    ``clone`` picks the first (0) or second (1) clone; ``None`` runs the
    finite-gain teleporter without cloning.
    """

    def teleport(c, reg, tag):
        channel = None
        if clone is not None:
            def channel(a_c):
                return clone_classical_channel(a_c, reg, tag)[clone]
        return finite_teleport(c, tele.lam, tele.H, eps, reg, tele.eta_a, tele.eta_b1, tele.eta_b2,
                               channel=channel, tag=tag)

    net = build_mz(MzConfig(tele, balance_eta), teleport=teleport)
    return report_from_counts(*engine_counts(net), "engine")


@dataclass(frozen=True)
class CloningPoint:
    eps: float
    visibility_first: float
    visibility_second: float
    limit_visibility: float

    @property
    def gap(self) -> float:
        return max(abs(self.visibility_first - self.limit_visibility),
                   abs(self.visibility_second - self.limit_visibility))


def cloning_study(tele: TeleporterParams, eps_values: Sequence[float] = (1e-2, 1e-3, 1e-4),
                  balance_eta: float = 1.0) -> list[CloningPoint]:
    limit = mz_visibility(MzConfig(tele, balance_eta)).visibility
    return [
        CloningPoint(eps, cloned_visibility(tele, eps, 0, balance_eta).visibility,
                     cloned_visibility(tele, eps, 1, balance_eta).visibility, limit)
        for eps in eps_values
    ]
