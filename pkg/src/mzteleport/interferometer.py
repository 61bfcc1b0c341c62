"""Mach-Zehnder test bench with a teleporter in one arm.

The input port carries the probe (single photon, coherent state, ...), the
second port vacuum. Arm ``c`` goes through the teleporter, arm ``d`` through an
optional balancing attenuator, and the two are recombined in phase. The
visibility of the two output ports is the figure of merit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Protocol, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .fock import FockState, expect_total_number
from .modes import FieldExpression, ModeId, ModeRegistry, beamsplitter, identity_expr, loss_channel
from .teleporter import TeleporterParams, quantum_teleport

POLARIZATIONS = ("h", "v")


class InfeasibleBalance(ValueError):
    """Requested balancing would need an attenuator transmission above 1."""


# --------------------------------------------------------------------------- inputs


class InputSource(Protocol):
    nbar: float

    def prepare(self, reg: ModeRegistry, modes: Mapping[str, ModeId]) -> tuple[dict[str, FieldExpression], FockState]:
        ...


@dataclass(frozen=True)
class SinglePhoton:
    """One photon in the polarization superposition ``x|1,0> + y|0,1>``."""

    x: complex = 1.0
    y: complex = 0.0

    def __post_init__(self) -> None:
        if abs(abs(self.x) ** 2 + abs(self.y) ** 2 - 1.0) > 1e-12:
            raise ValueError("|x|^2 + |y|^2 must equal 1")

    @property
    def nbar(self) -> float:
        return 1.0

    def prepare(self, reg, modes):
        exprs = {p: identity_expr(reg, m) for p, m in modes.items()}
        mh, mv = modes["h"], modes["v"]
        state = FockState.from_terms([(self.x, {mh: 1}), (self.y, {mv: 1})])
        return exprs, state


@dataclass(frozen=True)
class Coherent:
    """Coherent amplitudes per polarization (or per sideband mode)."""

    amplitudes: Mapping[str, complex] = field(default_factory=lambda: {"h": 1.0})

    @property
    def nbar(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes.values())

    def prepare(self, reg, modes):
        exprs = {p: identity_expr(reg, m, self.amplitudes.get(p, 0j)) for p, m in modes.items()}
        return exprs, FockState.vacuum()


def coherent_hv(alpha_h: complex, alpha_v: complex) -> Coherent:
    return Coherent({"h": alpha_h, "v": alpha_v})


@dataclass(frozen=True)
class NbarInput:
    """Abstract input fixed only by its mean photon number.

    Photon counts depend on the input only through its mean photon number,
    so the engine stands it in with a coherent state of that strength.
    """

    nbar: float = 1.0

    def __post_init__(self) -> None:
        if self.nbar < 0:
            raise ValueError("nbar must be >= 0")

    def prepare(self, reg, modes):
        first = next(iter(modes))
        return Coherent({first: math.sqrt(self.nbar)}).prepare(reg, modes)


@dataclass(frozen=True)
class MzConfig:
    teleporter: TeleporterParams = field(default_factory=TeleporterParams)
    balance_eta: float = 1.0
    source: InputSource = field(default_factory=SinglePhoton)

    def __post_init__(self) -> None:
        if not 0.0 <= self.balance_eta <= 1.0:
            raise ValueError(f"balance_eta must lie in [0, 1], got {self.balance_eta}")

    @property
    def nbar(self) -> float:
        return self.source.nbar

    def with_(self, **kw) -> MzConfig:
        tele_keys = {"H", "lam", "eta_a", "eta_b1", "eta_b2", "entangled"}
        tele_kw = {k: kw.pop(k) for k in list(kw) if k in tele_keys}
        tele = self.teleporter.with_(**tele_kw) if tele_kw else self.teleporter
        return MzConfig(
            teleporter=tele,
            balance_eta=kw.pop("balance_eta", self.balance_eta),
            source=kw.pop("source", self.source),
        )


@dataclass(frozen=True)
class VisibilityReport:
    count_a: float
    count_b: float
    visibility: float
    method: str
    degenerate: bool = False
    leakage: float | None = None

    def __post_init__(self) -> None:
        if self.method not in ("closed_form", "engine", "oracle"):
            raise ValueError(f"unknown method tag {self.method!r}")


def visibility(count_a: float, count_b: float) -> tuple[float, bool]:
    """Normalized count difference; ``(0.0, True)`` when both ports are dark."""
    total = count_a + count_b
    if total <= 0.0:
        return 0.0, True
    return (count_a - count_b) / total, False


# ------------------------------------------------------------------------- network

Teleport = Callable[[FieldExpression, ModeRegistry, str], FieldExpression]


@dataclass
class MzNetwork:
    registry: ModeRegistry
    inputs: dict[str, FieldExpression]
    vacuum_port: dict[str, ModeId]
    outputs: dict[str, tuple[FieldExpression, FieldExpression]]
    state: FockState

    @property
    def port_a(self) -> list[FieldExpression]:
        return [ab[0] for ab in self.outputs.values()]

    @property
    def port_b(self) -> list[FieldExpression]:
        return [ab[1] for ab in self.outputs.values()]

    def all_expressions(self) -> list[FieldExpression]:
        return [e for ab in self.outputs.values() for e in ab]


def build_mz(
    cfg: MzConfig,
    reg: ModeRegistry | None = None,
    teleport: Teleport | None = None,
    polarizations: Sequence[str] = POLARIZATIONS,
    inputs: Mapping[str, FieldExpression] | None = None,
    state: FockState | None = None,
) -> MzNetwork:
    """Propagate each polarization component through the interferometer.

    ``teleport`` replaces the arm-``c`` channel (default: the limit-form
    teleporter of ``cfg.teleporter``). ``inputs`` and ``state`` supply a
    pre-built input (e.g. one half of a photon pair, keyed by polarization);
    otherwise ``cfg.source`` prepares one on fresh modes.
    """
    reg = reg if reg is not None else ModeRegistry()
    if teleport is None:
        def teleport(c, r, tag):
            return quantum_teleport(c, cfg.teleporter, r, tag)

    if inputs is None:
        modes = {p: reg.new(f"a_{p}") for p in polarizations}
        inputs, state = cfg.source.prepare(reg, modes)
    elif state is None:
        raise ValueError("state is required together with inputs")
    inputs = dict(inputs)
    vac = {p: reg.new(f"b_{p}") for p in inputs}

    outputs = {}
    for p, a_in in inputs.items():
        c, d = beamsplitter(a_in, identity_expr(reg, vac[p]), 0.5)
        c_t = teleport(c, reg, f"_{p}")
        d_a = loss_channel(d, cfg.balance_eta, label=f"g_{p}")
        outputs[p] = beamsplitter(c_t, d_a, 0.5)
    return MzNetwork(reg, inputs, vac, outputs, state)


def engine_counts(net: MzNetwork) -> tuple[float, float]:
    return expect_total_number(net.port_a, net.state), expect_total_number(net.port_b, net.state)


def report_from_counts(count_a: float, count_b: float, method: str, leakage: float | None = None) -> VisibilityReport:
    v, degenerate = visibility(count_a, count_b)
    return VisibilityReport(count_a, count_b, v, method, degenerate, leakage)


def mz_visibility(cfg: MzConfig, method: str = "engine") -> VisibilityReport:
    if method == "closed_form":
        return report_from_counts(*counts_closed_form(cfg), "closed_form")
    if method == "engine":
        return report_from_counts(*engine_counts(build_mz(cfg)), "engine")
    if method == "oracle":
        from .oracle import oracle_visibility

        return oracle_visibility(cfg)
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------- closed forms


def teleporter_noise(p: TeleporterParams) -> float:
    """Spurious photons added to the two polarization modes of arm ``c``.

    Sum of squared creation coefficients of the teleported field: the
    correlated EPR mode plus Alice's arm-loss vacuum. Amplifier loss enters
    through the ``1/eta_a`` rescaling of Alice's noise.
    """
    H, lam = p.H, p.lam
    g1 = lam * math.sqrt(p.eta_b1 * H / p.eta_a) - math.sqrt(p.eta_b2 * (H - 1.0))
    return g1**2 + lam**2 * (1.0 - p.eta_b1) / p.eta_a


def counts_closed_form(cfg: MzConfig) -> tuple[float, float]:
    """Output counts ``nbar (sqrt(eta) +- lam)^2 / 4 + noise``."""
    p, n, s = cfg.teleporter, cfg.nbar, math.sqrt(cfg.balance_eta)
    noise = teleporter_noise(p)
    return n * 0.25 * (s + p.lam) ** 2 + noise, n * 0.25 * (s - p.lam) ** 2 + noise


def lambda_max(H: float, nbar: float) -> float:
    """Unbalanced, lossless channel gain maximizing visibility."""
    if nbar <= 0:
        raise ValueError("nbar must be > 0")
    if H < 1.0:
        raise ValueError("H must be >= 1")
    return math.sqrt(4 * H + nbar - 4) / math.sqrt(4 * H + nbar)


def vmax_classical(nbar: float) -> float:
    """Best visibility reachable without entanglement."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    return math.sqrt(nbar / (nbar + 4.0))


def lambda_max_lossy(H: float, eta_b: float) -> float:
    """Published unbalanced optimum gain with EPR-arm transmission ``eta_b`` (nbar = 1).

    This expression is the exact optimum when the loss sits in Alice's arm
    only; for equal loss in both arms use :func:`lambda_max_general`.
    """
    if H < 1.0 or not 0.0 <= eta_b <= 1.0:
        raise ValueError("need H >= 1 and eta_b in [0, 1]")
    return math.sqrt(4 * (H - 1) + 1) / math.sqrt(4 * (1 - eta_b) + 4 * eta_b * H + 1)


def lambda_max_general(
    H: float, nbar: float = 1.0, eta_a: float = 1.0, eta_b1: float = 1.0, eta_b2: float = 1.0
) -> float:
    """Unbalanced optimum gain for any loss layout, from d(visibility)/d(lam) = 0."""
    if nbar <= 0:
        raise ValueError("nbar must be > 0")
    num = nbar + 4 * eta_b2 * (H - 1)
    den = nbar + 4 * (eta_b1 * H + 1 - eta_b1) / eta_a
    return math.sqrt(num / den)


def vmax_general(H: float, nbar: float = 1.0, eta_a: float = 1.0, eta_b1: float = 1.0, eta_b2: float = 1.0) -> float:
    lam = lambda_max_general(H, nbar, eta_a, eta_b1, eta_b2)
    cfg = MzConfig(TeleporterParams(H, lam, eta_a, eta_b1, eta_b2), 1.0, NbarInput(nbar))
    return mz_visibility(cfg, "closed_form").visibility


def balance_eta_lossy(lam: float, eta_b: float) -> float:
    """Balancing transmission for symmetric EPR loss at nbar = 1."""
    if not 0.0 <= eta_b <= 1.0:
        raise ValueError("eta_b must lie in [0, 1]")
    eta = (5.0 - 4.0 * eta_b) * lam**2
    if eta > 1.0:
        raise InfeasibleBalance(f"lam={lam} is too large to balance (needs eta={eta:.6g} > 1)")
    return eta


def balance_eta_optimal(p: TeleporterParams, nbar: float = 1.0) -> float:
    """Attenuation maximizing visibility at fixed teleporter settings, capped at 1.

    Solving d(visibility)/d(sqrt(eta)) = 0 gives ``eta = lam^2 + 4 noise / nbar``.
    """
    if nbar <= 0:
        raise ValueError("nbar must be > 0")
    return min(1.0, p.lam**2 + 4.0 * teleporter_noise(p) / nbar)


# ------------------------------------------------------------------------ optimizer


@dataclass(frozen=True)
class Optimum:
    lam: float
    balance_eta: float
    visibility: float
    flat: bool = False


def _maximize_1d(f: Callable[[float], float], lo: float, hi: float, grid: int, xatol: float) -> tuple[float, float]:
    xs = np.linspace(lo, hi, grid)
    vals = np.array([f(x) for x in xs])
    i = int(np.argmax(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)]
    res = minimize_scalar(lambda x: -f(x), bounds=(a, b), method="bounded", options={"xatol": xatol})
    if -res.fun >= vals[i]:
        return float(res.x), float(-res.fun)
    return float(xs[i]), float(vals[i])


def optimize_gain_numeric(
    cfg: MzConfig,
    free: frozenset[str] | set[str] = frozenset({"lam"}),
    method: str = "engine",
    lam_range: tuple[float, float] = (0.0, 2.0),
    grid: int = 41,
    xatol: float = 1e-10,
) -> Optimum:
    """Numerically maximize visibility over the channel gain and/or the balance."""
    free = set(free)
    if not free or not free <= {"lam", "eta"}:
        raise ValueError("free must be a non-empty subset of {'lam', 'eta'}")

    def vis(lam: float, eta: float) -> float:
        return mz_visibility(cfg.with_(lam=lam, balance_eta=eta), method).visibility

    def best_eta(lam: float) -> tuple[float, float]:
        if "eta" not in free:
            return cfg.balance_eta, vis(lam, cfg.balance_eta)
        res = minimize_scalar(lambda s: -vis(lam, s * s), bounds=(0.0, 1.0), method="bounded",
                              options={"xatol": xatol})
        s_opt, v_opt = float(res.x), float(-res.fun)
        v_one = vis(lam, 1.0)
        return (1.0, v_one) if v_one > v_opt else (s_opt**2, v_opt)

    if "lam" in free:
        lam, v = _maximize_1d(lambda x: best_eta(x)[1], *lam_range, grid, xatol)
    else:
        lam = cfg.teleporter.lam
        v = best_eta(lam)[1]
    eta = best_eta(lam)[0]
    samples = [best_eta(x)[1] for x in np.linspace(*lam_range, 5)] if "lam" in free else [v]
    flat = max(abs(s) for s in samples + [v]) == 0.0
    return Optimum(lam, eta, v, flat)

