"""Optical teleporter: classical (measure/amplify/attenuate) and EPR-assisted channels.

The channel emits its classical-limit form directly (amplifier gain to
infinity, Bob's attenuation to zero, their product fixed by the channel gain
``lam``). A finite-gain compositional route, built out of the split/amplify/
recombine amplifier and an explicit beamsplitter at Bob, is kept for
cloning studies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

from .modes import (
    FieldExpression,
    ModeRegistry,
    beamsplitter,
    dagger,
    degenerate_pa,
    identity_expr,
    linear_combine,
    loss_channel,
    two_mode_squeeze,
)


def entanglement_variance(H: float) -> float:
    """Squeezing variance of the EPR pair, 1 (none) down to 0 (perfect)."""
    return (math.sqrt(H) - math.sqrt(H - 1.0)) ** 2


def squeezing_fraction(H: float) -> float:
    return 1.0 - entanglement_variance(H)


def gain_from_squeezing(fraction: float) -> float:
    """Parametric gain giving squeezing ``fraction`` (0.5 means 50 %)."""
    if not 0.0 <= fraction < 1.0:
        raise ValueError(f"squeezing fraction must be in [0, 1), got {fraction}")
    v = 1.0 - fraction
    return (1.0 + v) ** 2 / (4.0 * v)


@dataclass(frozen=True)
class EntanglementSpec:
    """Entanglement given either as a parametric gain or as a squeezing fraction."""

    H: float | None = None
    fraction: float | None = None

    def __post_init__(self) -> None:
        if (self.H is None) == (self.fraction is None):
            raise ValueError("give exactly one of H or fraction")
        if self.H is not None and self.H < 1.0:
            raise ValueError(f"H must be >= 1, got {self.H}")
        if self.fraction is not None:
            gain_from_squeezing(self.fraction)

    @property
    def gain(self) -> float:
        return self.H if self.H is not None else gain_from_squeezing(self.fraction)

    @property
    def variance(self) -> float:
        return entanglement_variance(self.gain)


@dataclass(frozen=True)
class TeleporterParams:
    H: float = 1.0
    lam: float = 1.0
    eta_a: float = 1.0
    eta_b1: float = 1.0
    eta_b2: float = 1.0
    entangled: bool = True

    def __post_init__(self) -> None:
        if self.H < 1.0:
            raise ValueError(f"H must be >= 1, got {self.H}")
        if self.lam < 0.0:
            raise ValueError(f"channel gain must be >= 0, got {self.lam}")
        for name in ("eta_a", "eta_b1", "eta_b2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.eta_a == 0.0:
            raise ValueError("eta_a = 0 leaves nothing to measure")
        if not self.entangled and self.H != 1.0:
            object.__setattr__(self, "H", 1.0)

    @classmethod
    def from_squeezing(cls, fraction: float, **kw) -> TeleporterParams:
        return cls(H=gain_from_squeezing(fraction), **kw)

    @property
    def squeezing(self) -> float:
        return squeezing_fraction(self.H)

    def with_(self, **kw) -> TeleporterParams:
        return replace(self, **kw)


def lambda_opt(H: float) -> float:
    """Channel gain at which the lossless teleporter is a pure attenuator."""
    if H < 1.0:
        raise ValueError(f"H must be >= 1, got {H}")
    return math.sqrt(H - 1.0) / math.sqrt(H)


def lambda_opt_bob_loss(H: float, eta_b2: float) -> float:
    """Pure-attenuator gain when only Bob's EPR arm is lossy."""
    if H < 1.0:
        raise ValueError(f"H must be >= 1, got {H}")
    if not 0.0 <= eta_b2 <= 1.0:
        raise ValueError(f"eta_b2 must lie in [0, 1], got {eta_b2}")
    return math.sqrt(eta_b2 * (H - 1.0)) / math.sqrt(H)


def build_epr(
    H: float, eta_b1: float, eta_b2: float, reg: ModeRegistry, tag: str = ""
) -> tuple[FieldExpression, FieldExpression]:
    """Lossy EPR pair: two-mode squeezed vacua, each arm through its own attenuator."""
    v3, v4 = reg.new(f"v3{tag}"), reg.new(f"v4{tag}")
    b1, b2 = two_mode_squeeze(reg, v3, v4, H)
    return (
        loss_channel(b1, eta_b1, label=f"vb1{tag}"),
        loss_channel(b2, eta_b2, label=f"vb2{tag}"),
    )


def _limit_channel(
    a_in: FieldExpression, b1: FieldExpression, b2: FieldExpression, lam: float, eta_a: float, reg: ModeRegistry, tag: str
) -> FieldExpression:
    if eta_a <= 0.0:
        raise ValueError("eta_a must be > 0")
    if lam < 0.0:
        raise ValueError(f"channel gain must be >= 0, got {lam}")
    va = identity_expr(reg, reg.new(f"va{tag}"))
    return linear_combine([
        (lam, a_in),
        (lam / math.sqrt(eta_a), dagger(b1)),
        (-1.0, b2),
        (lam * math.sqrt(1.0 - eta_a) / math.sqrt(eta_a), va),
    ])


def classical_teleport(
    a_in: FieldExpression, lam: float, eta_a: float, reg: ModeRegistry, tag: str = ""
) -> FieldExpression:
    """No shared entanglement: two independent vacuum penalties."""
    v1 = identity_expr(reg, reg.new(f"v1{tag}"))
    v2 = identity_expr(reg, reg.new(f"v2{tag}"))
    return _limit_channel(a_in, v1, v2, lam, eta_a, reg, tag)


def quantum_teleport(
    a_in: FieldExpression, p: TeleporterParams, reg: ModeRegistry, tag: str = ""
) -> FieldExpression:
    if not p.entangled:
        return classical_teleport(a_in, p.lam, p.eta_a, reg, tag)
    b1, b2 = build_epr(p.H, p.eta_b1, p.eta_b2, reg, tag)
    return _limit_channel(a_in, b1, b2, p.lam, p.eta_a, reg, tag)


def amplifier_fig2(
    a_in: FieldExpression, b1: FieldExpression, G: float, reg: ModeRegistry | None = None
) -> FieldExpression:
    """Linear amplifier whose noise port is fed by ``b1``.

    Split on a 50:50 beamsplitter, amplify the two halves with degenerate
    parametric amplifiers pumped in antiphase, recombine. The result is
    ``sqrt(G) a_in + sqrt(G-1) b1^dag``.
    """
    if G < 1.0:
        raise ValueError(f"gain must be >= 1, got {G}")
    c, d = beamsplitter(a_in, b1, 0.5)
    out, _ = beamsplitter(degenerate_pa(c, G, +1), degenerate_pa(d, G, -1), 0.5)
    return out


def finite_teleport(
    a_in: FieldExpression,
    lam: float,
    H: float,
    eps: float,
    reg: ModeRegistry,
    eta_a: float = 1.0,
    eta_b1: float = 1.0,
    eta_b2: float = 1.0,
    channel: Callable[[FieldExpression], FieldExpression] | None = None,
    tag: str = "",
) -> FieldExpression:
    """Teleporter with a finite amplifier gain and Bob's attenuator transmission ``eps``.

    The amplifier gain is fixed by ``lam**2 = G * eps * eta_a``. ``channel``
    may transform the classical beam before Bob uses it (e.g. to hand him a
    clone instead of the original).
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    G = lam**2 / (eps * eta_a)
    if G < 1.0:
        raise ValueError(f"lam={lam}, eps={eps} imply an amplifier gain {G} < 1")
    b1, b2 = build_epr(H, eta_b1, eta_b2, reg, tag)
    a_meas = loss_channel(a_in, eta_a, label=f"va{tag}")
    a_c = amplifier_fig2(a_meas, b1, G)
    if channel is not None:
        a_c = channel(a_c)
    out, _ = beamsplitter(a_c, -b2, eps)
    return out


def polarization_teleport(
    inputs: tuple[FieldExpression, FieldExpression],
    p: TeleporterParams,
    reg: ModeRegistry,
    teleport_v: bool = True,
) -> tuple[FieldExpression, FieldExpression]:
    """Teleport the h and v components through independent teleporters.

    With ``teleport_v=False`` the v component is blocked and replaced by vacuum.
    """
    h, v = inputs
    out_h = quantum_teleport(h, p, reg, tag="_h")
    if teleport_v:
        out_v = quantum_teleport(v, p, reg, tag="_v")
    else:
        out_v = identity_expr(reg, reg.new("blocked_v"))
    return out_h, out_v
