"""Homodyne readout of the interferometer outputs at a single RF sideband frequency.

Quadratures are normalized to unit vacuum variance. Each output beam is split
in two (admitting one vacuum mode) and orthogonal quadratures are detected;
adding the two photocurrents with a quarter-period delay gives
``A = sqrt2 (a_out + v^dag)``, whose power spectrum is ``2 <a^dag a> + 2``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .fock import FockState, expect_number
from .interferometer import Coherent, MzConfig, NbarInput, build_mz, mz_visibility
from .modes import FieldExpression, ModeRegistry, dagger, degenerate_pa, identity_expr, linear_combine, phase_shift

@dataclass(frozen=True)
class QuadratureSpectrumPair:
    """Spectral powers of two orthogonal quadratures (vacuum gives (1, 1))."""

    v_plus: float
    v_minus: float

    def __post_init__(self) -> None:
        if self.v_plus < 0 or self.v_minus < 0:
            raise ValueError("quadrature spectra must be non-negative")


def homodyne_photocurrent(e_out: FieldExpression, reg: ModeRegistry, theta: float = 0.0, tag: str = "d") -> FieldExpression:
    """Combined photocurrent of the dual-quadrature homodyne stage on ``e_out``."""
    v = identity_expr(reg, reg.new(f"v_{tag}"))
    rot = cmath.exp(1j * theta)
    return linear_combine([(math.sqrt(2) * rot, e_out), (math.sqrt(2) * rot.conjugate(), dagger(v))])


def photon_number_spectrum(A: FieldExpression, s: FockState) -> float:
    """``<|X+ + i X-|^2>`` of the combined photocurrent."""
    return expect_number(A, s)


def spectral_visibility(v_a: float, v_b: float) -> tuple[float, bool]:
    """Visibility from the two output spectra, vacuum penalty removed.

    Returns ``(0.0, True)`` when both outputs sit at the vacuum floor.
    """
    den = v_a + v_b - 4.0
    if den <= 1e-15:
        return 0.0, True
    return (v_a - v_b) / den, False


def quadrature(e: FieldExpression, theta: float) -> FieldExpression:
    """Hermitian quadrature ``exp(i theta) e + exp(-i theta) e^dag``."""
    r = phase_shift(e, theta)
    return linear_combine([(1.0, r), (1.0, dagger(r))])


def quadrature_spectra(e: FieldExpression, s: FockState, theta: float = 0.0) -> QuadratureSpectrumPair:
    x_plus = quadrature(e, theta)
    x_minus = quadrature(e, theta + math.pi / 2)
    return QuadratureSpectrumPair(expect_number(x_plus, s), expect_number(x_minus, s))


def principal_spectra(e: FieldExpression, s: FockState) -> QuadratureSpectrumPair:
    """Maximum and minimum quadrature power over all angles.

    The power at angle ``theta`` is ``c + R cos(2 theta - phi)``; three angles fix it.
    """
    v0 = quadrature_spectra(e, s, 0.0)
    v45 = quadrature_spectra(e, s, math.pi / 4).v_plus
    c = 0.5 * (v0.v_plus + v0.v_minus)
    r = math.hypot(v0.v_plus - c, v45 - c)
    return QuadratureSpectrumPair(c + r, max(c - r, 0.0))


def sideband_nbar(q: QuadratureSpectrumPair, tol: float = 1e-12) -> float:
    """Mean photon number summed over the upper and lower sidebands."""
    n = 0.5 * (q.v_plus + q.v_minus) - 1.0
    if n < -tol:
        raise ValueError(f"non-physical spectrum pair {q} (nbar = {n})")
    return max(n, 0.0)


# ------------------------------------------------------------------ sideband inputs


def coherent_sideband(signal_power: float) -> Coherent:
    """Vacuum-noise-limited beam carrying a classical signal of power ``V_s``."""
    if signal_power < 0:
        raise ValueError("signal power must be >= 0")
    return Coherent({"s": math.sqrt(signal_power) / 2.0})


@dataclass(frozen=True)
class SqueezedSideband:
    """Minimum-uncertainty squeezed vacuum with anti-squeezed power ``v_max``."""

    v_max: float
    angle: float = 0.0

    def __post_init__(self) -> None:
        if self.v_max < 1.0:
            raise ValueError("v_max must be >= 1")

    @property
    def gain(self) -> float:
        return 0.5 * (1.0 + 0.5 * (self.v_max + 1.0 / self.v_max))

    @property
    def nbar(self) -> float:
        return self.gain - 1.0

    def prepare(self, reg, modes):
        (p, m), = modes.items()
        sq = degenerate_pa(identity_expr(reg, m), self.gain, +1)
        return {p: phase_shift(sq, self.angle)}, FockState.vacuum()


# ------------------------------------------------------------------------ pipeline


@dataclass(frozen=True)
class SpectralResult:
    v_a: float
    v_b: float
    visibility: float
    degenerate: bool
    input_spectra: QuadratureSpectrumPair
    nbar: float


def spectral_mz(cfg: MzConfig, theta: float = 0.0) -> SpectralResult:
    """Run one sideband mode through the interferometer and read it out by homodyne.

    ``cfg.source`` must prepare the single mode ``"s"``.
    """
    reg = ModeRegistry()
    inputs, state = cfg.source.prepare(reg, {"s": reg.new("a_s")})
    input_pair = principal_spectra(inputs["s"], state)
    net = build_mz(cfg, reg, inputs=inputs, state=state)
    (a_out, b_out), = net.outputs.values()
    v_a = photon_number_spectrum(homodyne_photocurrent(a_out, reg, theta, "d1"), state)
    v_b = photon_number_spectrum(homodyne_photocurrent(b_out, reg, theta, "d2"), state)
    vis, degenerate = spectral_visibility(v_a, v_b)
    return SpectralResult(v_a, v_b, vis, degenerate, input_pair, sideband_nbar(input_pair))


def counting_visibility(cfg: MzConfig, nbar: float, method: str = "engine") -> float:
    """Photon-counting visibility of a two-polarization input of mean photon number ``nbar``."""
    return mz_visibility(MzConfig(cfg.teleporter, cfg.balance_eta, NbarInput(nbar)), method).visibility

