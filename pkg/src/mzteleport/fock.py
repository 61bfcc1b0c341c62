"""Exact moments of field expressions on sparse multimode Fock superpositions.

Kets are keyed by a sorted tuple of ``(mode_index, n)`` pairs listing only the
occupied modes, so a state touching three modes of a forty-mode registry
stays three entries wide.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .modes import FieldExpression, ModeId, dagger

NORM_TOL = 1e-12
Ket = tuple[tuple[int, int], ...]

VACUUM: Ket = ()


def make_ket(occupations: Mapping[ModeId, int]) -> Ket:
    for n in occupations.values():
        if n < 0 or int(n) != n:
            raise ValueError(f"occupation numbers must be non-negative integers, got {n}")
    return tuple(sorted((m.index, int(n)) for m, n in occupations.items() if n))


def _shift(ket: Ket, mode: int, delta: int) -> tuple[Ket, int] | None:
    """Raise/lower ``mode`` by ``delta`` (+1 or -1). Returns (new ket, old occupation)."""
    occ = dict(ket)
    n = occ.get(mode, 0)
    if n + delta < 0:
        return None
    if n + delta:
        occ[mode] = n + delta
    else:
        occ.pop(mode, None)
    return tuple(sorted(occ.items())), n


@dataclass(frozen=True)
class FockState:
    """Sparse complex superposition of occupation-number kets."""

    amplitudes: Mapping[Ket, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "amplitudes", {k: complex(v) for k, v in self.amplitudes.items() if v != 0}
        )

    @classmethod
    def vacuum(cls) -> FockState:
        return cls({VACUUM: 1.0})

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, Mapping[ModeId, int]]]) -> FockState:
        amps: dict[Ket, complex] = {}
        for c, occ in terms:
            k = make_ket(occ)
            amps[k] = amps.get(k, 0j) + c
        return cls(amps)

    @property
    def norm_sq(self) -> float:
        return sum(abs(c) ** 2 for c in self.amplitudes.values())

    def normalized(self) -> FockState:
        n = math.sqrt(self.norm_sq)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return FockState({k: c / n for k, c in self.amplitudes.items()})

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm_sq - 1.0) <= tol

    def scaled(self, factor: complex) -> FockState:
        return FockState({k: factor * c for k, c in self.amplitudes.items()})

    def mean_occupation(self, mode: ModeId) -> float:
        return sum(abs(c) ** 2 * dict(k).get(mode.index, 0) for k, c in self.amplitudes.items())

    def inner(self, other: FockState) -> complex:
        """``<self|other>``."""
        other_amps = other.amplitudes
        return sum(
            (c.conjugate() * other_amps[k] for k, c in self.amplitudes.items() if k in other_amps),
            0j,
        )

    def __len__(self) -> int:
        return len(self.amplitudes)


def apply(e: FieldExpression, s: FockState) -> FockState:
    """Act with the (linear) operator ``e`` on ``s``; the result is unnormalized."""
    out: dict[Ket, complex] = {}
    if e.displacement:
        for k, c in s.amplitudes.items():
            out[k] = out.get(k, 0j) + e.displacement * c
    for k, c in s.amplitudes.items():
        for m, alpha in e.ann.items():
            r = _shift(k, m.index, -1)
            if r is not None:
                nk, n = r
                out[nk] = out.get(nk, 0j) + alpha * math.sqrt(n) * c
        for m, beta in e.cre.items():
            nk, n = _shift(k, m.index, +1)
            out[nk] = out.get(nk, 0j) + beta * math.sqrt(n + 1) * c
    return FockState(out)


def _require_normalized(s: FockState) -> None:
    if not s.is_normalized():
        raise ValueError(f"state is not normalized (norm^2 = {s.norm_sq!r})")


def expect_number(e: FieldExpression, s: FockState) -> float:
    """``<s| e^dag e |s>``, i.e. the squared norm of ``e|s>``."""
    _require_normalized(s)
    return apply(e, s).norm_sq


def expect_total_number(exprs: Iterable[FieldExpression], s: FockState) -> float:
    """Summed photon number over several modes (e.g. both polarizations of a port)."""
    _require_normalized(s)
    return sum(apply(e, s).norm_sq for e in exprs)


def expect_coincidence(e1: FieldExpression, e2: FieldExpression, s: FockState) -> float:
    """``<s| e1^dag e1 e2^dag e2 |s>`` with the operator order kept exact."""
    _require_normalized(s)
    n2 = apply(dagger(e2), apply(e2, s))
    return apply(e1, s).inner(apply(e1, n2)).real


def expect_total_coincidence(
    group1: Iterable[FieldExpression], group2: Iterable[FieldExpression], s: FockState
) -> float:
    """``<N1 N2>`` where each ``N`` is a summed number operator over a group of modes."""
    group2 = list(group2)
    return sum(expect_coincidence(e1, e2, s) for e1 in group1 for e2 in group2)


def expect_product(e1: FieldExpression, e2: FieldExpression, s: FockState) -> complex:
    """``<s| e1 e2 |s>`` for general (not necessarily normally ordered) pairs."""
    _require_normalized(s)
    return apply(dagger(e1), s).inner(apply(e2, s))


def tensor(*states: FockState) -> FockState:
    """Product of states living on disjoint sets of modes."""
    out: dict[Ket, complex] = {VACUUM: 1.0}
    for s in states:
        nxt: dict[Ket, complex] = {}
        for k1, c1 in out.items():
            modes1 = {m for m, _ in k1}
            for k2, c2 in s.amplitudes.items():
                if modes1 & {m for m, _ in k2}:
                    raise ValueError("tensor factors share a mode")
                k = tuple(sorted(k1 + k2))
                nxt[k] = nxt.get(k, 0j) + c1 * c2
        out = nxt
    return FockState(out)
