"""Turn a set of output field expressions into a circuit of elementary Gaussian gates.

Pipeline:

1. Vacuum compression. Modes known to start in vacuum enter the outputs only
   through the row space of their coefficients, so an orthonormal basis of
   that space replaces them (at most ``2k`` modes for ``k`` outputs).
2. Symplectic completion. The ``k`` output rows are extended to a full
   Bogoliubov map ``a -> U a + V a^dag`` by Gram-Schmidt under the indefinite
   metric ``<x, y> = x_a . conj(y_a) - x_b . conj(y_b)``.
3. Bloch-Messiah. ``U = W_L C W_R``, ``V = W_L S conj(W_R)`` with diagonal
   ``C = cosh r``, ``S = sinh r``; the squeeze parameters come from a Takagi
   factorization of the symmetric ``U^-1 V``.
4. Each passive unitary is reduced by Givens rotations to beamsplitters and
   phase shifters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from ..modes import (
    FieldExpression,
    ModeId,
    ModeRegistry,
    beamsplitter,
    commutator,
    commutator_norm,
    dagger,
    identity_expr,
    linear_combine,
    phase_shift,
)

KINDS = ("beamsplitter", "two_mode_squeezer", "squeezer", "phase", "displacement")
CANON_TOL = 1e-9


class NonCanonicalError(ValueError):
    """Outputs do not form a set of independent canonical modes."""


@dataclass(frozen=True)
class ElementaryOp:
    kind: str
    modes: tuple[int, ...]
    params: tuple = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown op kind {self.kind!r}")
        want = 2 if self.kind in ("beamsplitter", "two_mode_squeezer") else 1
        if len(self.modes) != want or len(set(self.modes)) != want:
            raise ValueError(f"{self.kind} acts on {want} distinct mode(s)")


@dataclass
class Circuit:
    """Gate list on ``n_modes`` wires. Output ``j`` of the request ends up on wire ``j``.

    ``wire_modes`` names the original mode carried by each wire at the input
    (``None`` for a compressed vacuum wire).
    """

    ops: list[ElementaryOp]
    n_modes: int
    wire_modes: list[ModeId | None]
    n_outputs: int
    residual: float = 0.0
    squeeze: np.ndarray = field(default_factory=lambda: np.zeros(0))


# ------------------------------------------------------------------ linear algebra


def _metric(x: np.ndarray, y: np.ndarray, n: int) -> complex:
    return x[:n] @ y[:n].conj() - x[n:] @ y[n:].conj()


def _partner(x: np.ndarray, n: int) -> np.ndarray:
    """Row of ``e^dag`` viewed as an annihilation-creation pair: (conj beta, conj alpha)."""
    return np.concatenate([x[n:].conj(), x[:n].conj()])


def complete_symplectic(alpha: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Extend ``k`` canonical commuting rows to a full ``n x n`` Bogoliubov pair (U, V)."""
    k, n = alpha.shape
    rows = [np.concatenate([alpha[i], beta[i]]) for i in range(k)]
    basis = rows + [_partner(r, n) for r in rows]
    signs = [1.0] * k + [-1.0] * k
    while len(rows) < n:
        if basis:
            a = np.array([np.concatenate([b[:n].conj(), -b[n:].conj()]) for b in basis])
            comp = null_space(a, rcond=1e-12)
        else:
            comp = np.eye(2 * n, dtype=complex)
        gram = np.array([[_metric(comp[:, i], comp[:, j], n) for j in range(comp.shape[1])]
                         for i in range(comp.shape[1])])
        w, v = np.linalg.eigh(0.5 * (gram + gram.conj().T))
        if w[-1] <= 1e-9:
            raise NonCanonicalError("no positive-norm direction left to complete the map")
        # g(comp c, comp c) = c^T G conj(c), so the top eigenvector enters conjugated
        x = comp @ v[:, -1].conj()
        # re-orthogonalize against the accumulated basis for numerical hygiene
        for b, s in zip(basis, signs):
            x = x - s * _metric(x, b, n) * b
        x = x / math.sqrt(_metric(x, x, n).real)
        rows.append(x)
        basis += [x, _partner(x, n)]
        signs += [1.0, -1.0]
    m = np.array(rows)
    return m[:, :n], m[:, n:]


def takagi(z: np.ndarray, tol: float = 1e-13) -> tuple[np.ndarray, np.ndarray]:
    """``z = Q diag(s) Q^T`` for complex symmetric ``z`` with unitary ``Q``."""
    n = z.shape[0]
    x, y = z.real, z.imag
    big = np.block([[x, y], [y, -x]])
    w, v = np.linalg.eigh(0.5 * (big + big.T))
    # eigenvalues come in +-s pairs; the vector (u, v) of +s gives column u + i v
    order = np.argsort(w)[::-1][:n]
    s = np.clip(w[order], 0.0, None)
    q = v[:n, order] + 1j * v[n:, order]
    pos = s > tol
    qp = q[:, pos]
    # a zero singular value leaves q and i*q both in the kernel: rebuild that block
    if pos.sum() < n:
        rest = null_space(qp.conj().T) if qp.shape[1] else np.eye(n, dtype=complex)
        q = np.concatenate([qp, rest], axis=1)
        s = np.concatenate([s[pos], np.zeros(n - pos.sum())])
    else:
        q = qp
        s = s[pos]
    # fix phases so that z = Q diag(s) Q^T holds for the positive part
    d = np.einsum("ij,jk,ki->i", q.conj().T, z, q.conj())
    ph = np.where(s > tol, np.exp(0.5j * np.angle(d)), 1.0)
    q = q * ph
    return q, s


def bloch_messiah(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(W_L, r, W_R)`` with ``U = W_L cosh(r) W_R`` and ``V = W_L sinh(r) conj(W_R)``."""
    z = np.linalg.solve(u, v)
    z = 0.5 * (z + z.T)
    q, s = takagi(z)
    if np.any(s >= 1.0):
        raise NonCanonicalError("Bogoliubov map has an infinite squeeze parameter")
    c = 1.0 / np.sqrt(1.0 - s**2)
    w_r = q.conj().T
    w_l = (u @ q) / c
    return w_l, np.arctanh(s), w_r


# ------------------------------------------------------------------ passive networks


def _block_ops(g: np.ndarray, i: int, j: int, tol: float = 1e-14) -> list[ElementaryOp]:
    """Ops realizing the 2x2 unitary ``g`` on wires (i, j).

    ``g = diag(e^{i f1}, e^{i f2}) B(t) diag(e^{i psi}, 1)`` with ``B(t)`` the
    real beamsplitter matrix.
    """
    t = min(max(abs(g[0, 0]) ** 2, 0.0), 1.0)
    if abs(g[0, 1]) > tol and abs(g[0, 0]) > tol:
        f1 = np.angle(g[0, 1])
        f2 = np.angle(-g[1, 1])
        psi = np.angle(g[0, 0]) - f1
    elif abs(g[0, 0]) <= tol:  # pure swap-like block
        t = 0.0
        f1 = np.angle(g[0, 1])
        f2 = 0.0
        psi = np.angle(g[1, 0])
    else:  # diagonal block
        t = 1.0
        f1, f2, psi = np.angle(g[0, 0]), np.angle(-g[1, 1]), 0.0
    ops = []
    if abs(psi) > tol:
        ops.append(ElementaryOp("phase", (i,), (float(psi),)))
    ops.append(ElementaryOp("beamsplitter", (i, j), (float(t),)))
    for w, f in ((i, f1), (j, f2)):
        if abs(f) > tol:
            ops.append(ElementaryOp("phase", (w,), (float(f),)))
    return ops


def passive_ops(w: np.ndarray, tol: float = 1e-14) -> list[ElementaryOp]:
    """Beamsplitters and phases realizing ``a -> W a`` (first op applied first)."""
    w = np.array(w, dtype=complex)
    n = w.shape[0]
    givens = []
    for c in range(n):
        for r in range(n - 1, c, -1):
            x, y = w[r - 1, c], w[r, c]
            if abs(y) <= tol:
                continue
            h = math.hypot(abs(x), abs(y))
            g = np.array([[x.conjugate(), y.conjugate()], [-y, x]]) / h
            w[[r - 1, r], :] = g @ w[[r - 1, r], :]
            givens.append((r - 1, r, g))
    ops = [ElementaryOp("phase", (m,), (float(np.angle(w[m, m])),))
           for m in range(n) if abs(np.angle(w[m, m])) > tol]
    for i, j, g in reversed(givens):
        ops += _block_ops(g.conj().T, i, j, tol)
    return ops


def pair_squeezers(r: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, list[ElementaryOp]]:
    """Rewrite the squeezer layer with two-mode squeezers wherever two wires share ``r``.

    A pair of equal single-mode squeezers equals ``P^dag TMS(r) P`` with
    ``P = [[1, i], [1, -i]] / sqrt2`` (``P P^T`` is the swap). On vacuum a
    two-mode squeezer's photon distribution decays by ``tanh^2 r`` per photon
    instead of per photon pair, which keeps truncation leakage far lower.
    Returns the passive pre-rotation ``P`` and the gate list.
    """
    n = len(r)
    p = np.eye(n, dtype=complex)
    ops: list[ElementaryOp] = []
    left = [m for m in np.argsort(-r) if r[m] > 1e-14]
    while left:
        i = left.pop(0)
        j = next((m for m in left if abs(r[m] - r[i]) <= tol), None)
        if j is None:
            ops.append(ElementaryOp("squeezer", (int(i),), (float(r[i]),)))
            continue
        left.remove(j)
        i, j = sorted((int(i), int(j)))
        p[np.ix_([i, j], [i, j])] = np.array([[1.0, 1j], [1.0, -1j]]) / math.sqrt(2)
        ops.append(ElementaryOp("two_mode_squeezer", (i, j), (float(0.5 * (r[i] + r[j])),)))
    return p, ops


# ---------------------------------------------------------------------- Heisenberg


def heisenberg(ops: Sequence[ElementaryOp], exprs: list[FieldExpression]) -> list[FieldExpression]:
    """Push expressions (one per wire) through the gate list."""
    x = list(exprs)
    for op in ops:
        if op.kind == "beamsplitter":
            i, j = op.modes
            x[i], x[j] = beamsplitter(x[i], x[j], op.params[0])
        elif op.kind == "phase":
            x[op.modes[0]] = phase_shift(x[op.modes[0]], op.params[0])
        elif op.kind == "squeezer":
            i, r = op.modes[0], op.params[0]
            x[i] = linear_combine([(math.cosh(r), x[i]), (math.sinh(r), dagger(x[i]))])
        elif op.kind == "two_mode_squeezer":
            (i, j), r = op.modes, op.params[0]
            xi, xj = x[i], x[j]
            x[i] = linear_combine([(math.cosh(r), xi), (math.sinh(r), dagger(xj))])
            x[j] = linear_combine([(math.cosh(r), xj), (math.sinh(r), dagger(xi))])
        else:
            e = x[op.modes[0]]
            x[op.modes[0]] = FieldExpression(e.registry, e.displacement + op.params[0], e.ann, e.cre)
    return x


def _matrix_rows(exprs: Sequence[FieldExpression], modes: Sequence[ModeId]):
    alpha = np.array([[e.ann.get(m, 0j) for m in modes] for e in exprs], dtype=complex)
    beta = np.array([[e.cre.get(m, 0j) for m in modes] for e in exprs], dtype=complex)
    disp = np.array([e.displacement for e in exprs], dtype=complex)
    return alpha, beta, disp


def check_canonical(exprs: Sequence[FieldExpression], tol: float = CANON_TOL) -> None:
    for i, e in enumerate(exprs):
        if abs(commutator_norm(e) - 1.0) > tol:
            raise NonCanonicalError(f"output {i} has commutator norm {commutator_norm(e)}")
        for j in range(i):
            f = exprs[j]
            if abs(commutator(e, f)) > tol or abs(commutator(e, dagger(f))) > tol:
                raise NonCanonicalError(f"outputs {j} and {i} do not commute")


def decompose(
    outputs: Sequence[FieldExpression],
    occupied: Sequence[ModeId] = (),
    check_tol: float = 1e-10,
) -> Circuit:
    """Elementary-gate circuit whose wires ``0..k-1`` carry ``outputs``.

    ``occupied`` lists input modes that may hold photons; they keep their own
    wires (in that order, starting at wire 0). Every other mode is assumed to
    start in vacuum and is compressed.
    """
    outputs = list(outputs)
    if not outputs:
        raise ValueError("nothing to decompose")
    check_canonical(outputs)
    reg: ModeRegistry = outputs[0].registry
    occupied = list(occupied)
    support = sorted({m for e in outputs for m in e.modes} - set(occupied))
    a_occ, b_occ, disp = _matrix_rows(outputs, occupied)
    a_vac, b_vac, _ = _matrix_rows(outputs, support)
    k = len(outputs)
    if support:
        _, sv, vh = np.linalg.svd(np.vstack([a_vac, b_vac.conj()]))
        rank = int(np.sum(sv > 1e-12 * max(sv.max(), 1.0)))
        basis = vh[:rank]  # orthonormal rows spanning the vacuum coefficient space
    else:
        basis = np.zeros((0, 0), dtype=complex)
    alpha = np.hstack([a_occ, a_vac @ basis.conj().T]) if support else a_occ
    beta = np.hstack([b_occ, b_vac @ basis.T]) if support else b_occ
    n = alpha.shape[1]
    while n < k:  # degenerate: pad with fresh vacuum wires
        alpha = np.hstack([alpha, np.zeros((k, 1))])
        beta = np.hstack([beta, np.zeros((k, 1))])
        n += 1
    u, v = complete_symplectic(alpha, beta)
    w_l, r, w_r = bloch_messiah(u, v)
    p_in, squeezers = pair_squeezers(r)
    ops = passive_ops(p_in @ w_r)
    ops += squeezers
    ops += passive_ops(w_l @ p_in.conj().T)
    ops += [ElementaryOp("displacement", (j,), (complex(disp[j]),)) for j in range(k) if disp[j] != 0]

    # verify on wire expressions built from a scratch registry
    scratch = ModeRegistry()
    wires = [scratch.new(f"w{j}") for j in range(n)]
    pushed = heisenberg(ops, [identity_expr(scratch, m) for m in wires])
    got_a, got_b, got_d = _matrix_rows(pushed[:k], wires)
    residual = max(np.abs(got_a - alpha).max(), np.abs(got_b - beta).max(), np.abs(got_d - disp).max())
    if residual > check_tol:
        raise RuntimeError(f"decomposition residual {residual:.3g} exceeds {check_tol}")
    wire_modes: list[ModeId | None] = list(occupied) + [None] * (n - len(occupied))
    return Circuit(ops, n, wire_modes, k, float(residual), r)
