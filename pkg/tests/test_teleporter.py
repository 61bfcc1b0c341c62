import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mzteleport.fock import FockState, expect_number
from mzteleport.interferometer import MzConfig, SinglePhoton, mz_visibility
from mzteleport.modes import ModeRegistry, commutator_norm, dagger, identity_expr, max_coeff_diff
from mzteleport.spectral import quadrature
from mzteleport.teleporter import (
    EntanglementSpec,
    TeleporterParams,
    amplifier_fig2,
    build_epr,
    classical_teleport,
    entanglement_variance,
    finite_teleport,
    gain_from_squeezing,
    lambda_opt,
    lambda_opt_bob_loss,
    polarization_teleport,
    quantum_teleport,
)


def test_gain_from_squeezing():
    assert gain_from_squeezing(0.5) == pytest.approx(1.125)
    assert gain_from_squeezing(0.9) == pytest.approx(3.025)
    assert EntanglementSpec(fraction=0.5).gain == pytest.approx(1.125)
    assert EntanglementSpec(H=2.0).variance == pytest.approx(entanglement_variance(2.0))
    with pytest.raises(ValueError):
        EntanglementSpec(H=2.0, fraction=0.5)
    with pytest.raises(ValueError):
        gain_from_squeezing(1.0)


def test_params_validation():
    with pytest.raises(ValueError):
        TeleporterParams(H=0.5)
    with pytest.raises(ValueError):
        TeleporterParams(lam=-1)
    with pytest.raises(ValueError):
        TeleporterParams(eta_b1=1.5)
    assert TeleporterParams(H=3.0, entangled=False).H == 1.0


def test_build_epr(reg):
    b1, b2 = build_epr(1.0, 1.0, 1.0, reg)
    assert b1.cre == {} and b2.cre == {} and b1.modes.isdisjoint(b2.modes)
    H = 1.7
    b1, b2 = build_epr(H, 1.0, 1.0, reg)
    # difference amplitude quadrature variance on vacuum
    var = expect_number(quadrature(b1, 0.0) - quadrature(b2, 0.0), FockState.vacuum())
    assert var == pytest.approx(2 * entanglement_variance(H), abs=1e-12)
    b1, b2 = build_epr(H, 0.0, 0.0, reg)
    assert b1.cre == {} and b2.cre == {}


def test_classical_teleport(reg):
    m = reg.new("a_in")
    a = identity_expr(reg, m)
    out = classical_teleport(a, 1.0, 1.0, reg)
    assert out.ann[m] == 1.0 and len(out.cre) == 1 and len(out.ann) == 2
    assert sorted(c.real for c in out.ann.values()) == [-1.0, 1.0]
    assert m not in classical_teleport(a, 0.0, 1.0, reg).modes
    assert expect_number(classical_teleport(a, 1.0, 1.0, reg), FockState.vacuum()) == pytest.approx(1.0)


def test_quantum_teleport_limits():
    reg = ModeRegistry()
    m = reg.new("a")
    a = identity_expr(reg, m)
    out = quantum_teleport(a, TeleporterParams(H=1e6, lam=1.0), reg)
    assert abs(out.ann[m] - 1) < 1e-15
    assert max(abs(c) for k, c in list(out.ann.items()) + list(out.cre.items()) if k != m) < 1e-3
    # attenuation point: no creation part left, output is lam_opt a + sqrt(1 - lam_opt^2) v4
    H = 1.125
    lo = lambda_opt(H)
    out = quantum_teleport(a, TeleporterParams(H=H, lam=lo), reg)
    assert max((abs(c) for c in out.cre.values()), default=0.0) < 1e-15
    assert out.ann[m] == pytest.approx(lo)
    rest = [c for k, c in out.ann.items() if k != m]
    assert len(rest) == 1 and abs(rest[0]) == pytest.approx(math.sqrt(1 - lo**2))
    # H = 1 reproduces the classical channel
    r1, r2 = ModeRegistry(), ModeRegistry()
    e1 = quantum_teleport(identity_expr(r1, r1.new("a")), TeleporterParams(H=1.0, lam=0.7), r1)
    e2 = classical_teleport(identity_expr(r2, r2.new("a")), 0.7, 1.0, r2)
    assert sorted(map(abs, e1.ann.values())) == pytest.approx(sorted(map(abs, e2.ann.values())))
    assert sorted(map(abs, e1.cre.values())) == pytest.approx(sorted(map(abs, e2.cre.values())))


def test_lambda_opt_values():
    assert lambda_opt(1.0) == 0.0
    assert lambda_opt(1.125) == pytest.approx(1 / 3, abs=1e-15)
    assert lambda_opt(2.0) == pytest.approx(math.sqrt(0.5))
    assert lambda_opt_bob_loss(2.0, 1.0) == lambda_opt(2.0)
    assert lambda_opt_bob_loss(2.0, 0.0) == 0.0
    assert lambda_opt_bob_loss(2.0, 0.5) == pytest.approx(0.5)


def test_amplifier_fig2(reg):
    a = identity_expr(reg, reg.new("a"))
    v = identity_expr(reg, reg.new("v"))
    assert max_coeff_diff(amplifier_fig2(a, v, 1.0), a) < 1e-15
    out = amplifier_fig2(a, v, 4.0)
    assert max_coeff_diff(out, 2 * a + math.sqrt(3) * dagger(v)) < 1e-14


def test_polarization_teleport(reg):
    h = identity_expr(reg, reg.new("h"))
    v = identity_expr(reg, reg.new("v"))
    oh, ov = polarization_teleport((h, v), TeleporterParams(H=1e6, lam=1.0), reg)
    assert max_coeff_diff(oh, h) < 1e-3 and max_coeff_diff(ov, v) < 1e-3
    _, blocked = polarization_teleport((h, v), TeleporterParams(H=1e6, lam=1.0), reg, teleport_v=False)
    assert v.modes.isdisjoint(blocked.modes)


def test_state_independence_and_negative_control():
    p = TeleporterParams(H=2.0, lam=0.6)
    vals = [mz_visibility(MzConfig(p, source=SinglePhoton(math.sqrt(w), math.sqrt(1 - w)))).visibility
            for w in (1.0, 0.5, 0.2)]
    assert max(vals) - min(vals) < 1e-13

    def h_only(c, reg, tag):
        if tag == "_h":
            return quantum_teleport(c, p, reg, tag)
        return identity_expr(reg, reg.new("blocked"))

    from mzteleport.interferometer import build_mz, engine_counts, visibility

    blocked = [visibility(*engine_counts(build_mz(MzConfig(p, source=SinglePhoton(math.sqrt(w), math.sqrt(1 - w))),
                                                  teleport=h_only)))[0] for w in (1.0, 0.2)]
    assert abs(blocked[0] - blocked[1]) > 0.1


@given(lam=st.floats(0.05, 2.0), H=st.floats(1.0, 20.0), eta=st.floats(0.1, 1.0))
def test_teleported_field_is_canonical(lam, H, eta):
    reg = ModeRegistry()
    a = identity_expr(reg, reg.new("a"))
    out = quantum_teleport(a, TeleporterParams(H=H, lam=lam, eta_a=eta, eta_b1=eta, eta_b2=eta), reg)
    scale = lam**2 * H / eta + H
    assert commutator_norm(out) == pytest.approx(1.0, abs=1e-10 * scale)


def test_finite_teleport_gain_check(reg):
    a = identity_expr(reg, reg.new("a"))
    with pytest.raises(ValueError):
        finite_teleport(a, 0.1, 1.5, 0.5, reg)
    with pytest.raises(ValueError):
        finite_teleport(a, 1.0, 1.5, 0.0, reg)
