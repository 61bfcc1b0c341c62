"""Linear (Bogoliubov) field expressions over a registry of bosonic modes.

A field operator is kept as ``displacement + sum_i alpha_i a_i + sum_i beta_i a_i^dag``.
Every optical element used here (beamsplitters, attenuators, parametric
amplifiers) maps expressions of this form to expressions of this form, so a
whole network reduces to a handful of complex coefficients per output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

PRUNE_TOL = 1e-15


@dataclass(frozen=True, order=True)
class ModeId:
    index: int
    label: str = field(compare=False)

    def __repr__(self) -> str:
        return f"ModeId({self.index}, {self.label!r})"


class ModeRegistry:
    """Append-only list of modes; hands out fresh vacuum modes on request."""

    def __init__(self) -> None:
        self._modes: list[ModeId] = []

    def new(self, label: str) -> ModeId:
        if not label:
            raise ValueError("mode label must be non-empty")
        mode = ModeId(len(self._modes), label)
        self._modes.append(mode)
        return mode

    def new_many(self, *labels: str) -> tuple[ModeId, ...]:
        return tuple(self.new(label) for label in labels)

    @property
    def modes(self) -> tuple[ModeId, ...]:
        return tuple(self._modes)

    def __contains__(self, mode: object) -> bool:
        return (
            isinstance(mode, ModeId)
            and mode.index < len(self._modes)
            and self._modes[mode.index] is mode
        )

    def __len__(self) -> int:
        return len(self._modes)

    def __iter__(self):
        return iter(self._modes)

    def __repr__(self) -> str:
        return f"ModeRegistry({[m.label for m in self._modes]})"


def _canonical(coeffs: Mapping[ModeId, complex]) -> dict[ModeId, complex]:
    return {m: complex(c) for m, c in sorted(coeffs.items()) if abs(c) > PRUNE_TOL}


@dataclass(frozen=True, eq=False)
class FieldExpression:
    """``displacement + sum(ann[m] * a_m) + sum(cre[m] * a_m^dag)``.

    Instances are immutable; arithmetic operators return new expressions.
    """

    registry: ModeRegistry
    displacement: complex = 0j
    ann: Mapping[ModeId, complex] = field(default_factory=dict)
    cre: Mapping[ModeId, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "displacement", complex(self.displacement))
        if abs(self.displacement) <= PRUNE_TOL:
            object.__setattr__(self, "displacement", 0j)
        ann = _canonical(self.ann)
        cre = _canonical(self.cre)
        for m in (*ann, *cre):
            if m not in self.registry:
                raise KeyError(f"{m!r} is not registered")
        object.__setattr__(self, "ann", ann)
        object.__setattr__(self, "cre", cre)

    @property
    def modes(self) -> frozenset[ModeId]:
        return frozenset(self.ann) | frozenset(self.cre)

    def coeff(self, mode: ModeId) -> tuple[complex, complex]:
        """(annihilation, creation) coefficients on ``mode``."""
        return self.ann.get(mode, 0j), self.cre.get(mode, 0j)

    def is_zero(self) -> bool:
        return not self.ann and not self.cre and self.displacement == 0

    def __add__(self, other: FieldExpression) -> FieldExpression:
        return linear_combine([(1.0, self), (1.0, other)])

    def __sub__(self, other: FieldExpression) -> FieldExpression:
        return linear_combine([(1.0, self), (-1.0, other)])

    def __neg__(self) -> FieldExpression:
        return linear_combine([(-1.0, self)])

    def __mul__(self, scalar: complex) -> FieldExpression:
        return linear_combine([(scalar, self)])

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> FieldExpression:
        return linear_combine([(1.0 / scalar, self)])

    def __repr__(self) -> str:
        parts = []
        if self.displacement:
            parts.append(f"{self.displacement:.6g}")
        parts += [f"({c:.6g}){m.label}" for m, c in self.ann.items()]
        parts += [f"({c:.6g}){m.label}^+" for m, c in self.cre.items()]
        return " + ".join(parts) if parts else "0"


def identity_expr(registry: ModeRegistry, mode: ModeId, displacement: complex = 0j) -> FieldExpression:
    if mode not in registry:
        raise KeyError(f"{mode!r} is not registered")
    return FieldExpression(registry, displacement, {mode: 1.0})


def zero_expr(registry: ModeRegistry) -> FieldExpression:
    return FieldExpression(registry)


def dagger(e: FieldExpression) -> FieldExpression:
    return FieldExpression(
        e.registry,
        e.displacement.conjugate(),
        {m: c.conjugate() for m, c in e.cre.items()},
        {m: c.conjugate() for m, c in e.ann.items()},
    )


def linear_combine(terms: Iterable[tuple[complex, FieldExpression]]) -> FieldExpression:
    terms = list(terms)
    if not terms:
        raise ValueError("linear_combine needs at least one term")
    registry = terms[0][1].registry
    disp = 0j
    ann: dict[ModeId, complex] = {}
    cre: dict[ModeId, complex] = {}
    for w, e in terms:
        if e.registry is not registry:
            raise ValueError("expressions belong to different registries")
        disp += w * e.displacement
        for m, c in e.ann.items():
            ann[m] = ann.get(m, 0j) + w * c
        for m, c in e.cre.items():
            cre[m] = cre.get(m, 0j) + w * c
    return FieldExpression(registry, disp, ann, cre)


def commutator_norm(e: FieldExpression) -> float:
    """``[e, e^dag] = sum|alpha|^2 - sum|beta|^2``; equals 1 for a proper boson mode."""
    return sum(abs(c) ** 2 for c in e.ann.values()) - sum(abs(c) ** 2 for c in e.cre.values())


def commutator(e1: FieldExpression, e2: FieldExpression) -> complex:
    """c-number ``[e1, e2]``."""
    out = 0j
    for m, a in e1.ann.items():
        out += a * e2.cre.get(m, 0j)
    for m, b in e1.cre.items():
        out -= b * e2.ann.get(m, 0j)
    return out


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def beamsplitter(e1: FieldExpression, e2: FieldExpression, transmission: float) -> tuple[FieldExpression, FieldExpression]:
    """Lossless beamsplitter with the (sum, difference) sign convention.

    Returns ``(sqrt(t) e1 + sqrt(1-t) e2, sqrt(1-t) e1 - sqrt(t) e2)``; a
    50:50 splitter gives ``(e1 + e2)/sqrt2`` and ``(e1 - e2)/sqrt2``.
    """
    _check_unit("transmission", transmission)
    t, r = math.sqrt(transmission), math.sqrt(1.0 - transmission)
    return linear_combine([(t, e1), (r, e2)]), linear_combine([(r, e1), (-t, e2)])


def phase_shift(e: FieldExpression, phi: float) -> FieldExpression:
    """Propagation phase ``a -> exp(i phi) a`` (creation part picks up the conjugate)."""
    return FieldExpression(
        e.registry,
        e.displacement * complex(math.cos(phi), math.sin(phi)),
        {m: c * complex(math.cos(phi), math.sin(phi)) for m, c in e.ann.items()},
        {m: c * complex(math.cos(phi), math.sin(phi)) for m, c in e.cre.items()},
    )


def loss_channel(e: FieldExpression, eta: float, registry: ModeRegistry | None = None, label: str = "loss") -> FieldExpression:
    """Attenuate ``e`` to intensity transmission ``eta``, mixing in a fresh vacuum mode."""
    _check_unit("eta", eta)
    reg = registry if registry is not None else e.registry
    if reg is not e.registry:
        raise ValueError("registry mismatch")
    vac = identity_expr(reg, reg.new(label))
    return linear_combine([(math.sqrt(eta), e), (math.sqrt(1.0 - eta), vac)])


def two_mode_squeeze(registry: ModeRegistry, m1: ModeId, m2: ModeId, H: float) -> tuple[FieldExpression, FieldExpression]:
    """Non-degenerate parametric amplifier of gain ``H`` acting on two modes."""
    if H < 1.0:
        raise ValueError(f"parametric gain must be >= 1, got {H}")
    a1, a2 = identity_expr(registry, m1), identity_expr(registry, m2)
    g, s = math.sqrt(H), math.sqrt(H - 1.0)
    return (
        linear_combine([(g, a1), (s, dagger(a2))]),
        linear_combine([(g, a2), (s, dagger(a1))]),
    )


def degenerate_pa(e: FieldExpression, G: float, pump_sign: int = 1) -> FieldExpression:
    """Phase-sensitive amplifier: ``sqrt(G) e + pump_sign sqrt(G-1) e^dag``."""
    if G < 1.0:
        raise ValueError(f"gain must be >= 1, got {G}")
    if pump_sign not in (1, -1):
        raise ValueError("pump_sign must be +1 or -1")
    return linear_combine([(math.sqrt(G), e), (pump_sign * math.sqrt(G - 1.0), dagger(e))])


def max_coeff_diff(e1: FieldExpression, e2: FieldExpression) -> float:
    """Largest absolute coefficient difference, displacement included."""
    diff = linear_combine([(1.0, e1), (-1.0, e2)])
    vals = [abs(diff.displacement), *map(abs, diff.ann.values()), *map(abs, diff.cre.values())]
    return max(vals)
