import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mzteleport.interferometer import (
    Coherent,
    InfeasibleBalance,
    MzConfig,
    NbarInput,
    SinglePhoton,
    balance_eta_lossy,
    balance_eta_optimal,
    build_mz,
    counts_closed_form,
    engine_counts,
    lambda_max,
    lambda_max_general,
    lambda_max_lossy,
    mz_visibility,
    optimize_gain_numeric,
    visibility,
    vmax_classical,
)
from mzteleport.modes import max_coeff_diff
from mzteleport.teleporter import TeleporterParams, lambda_opt


def passthrough(c, reg, tag):
    return c


def test_empty_interferometer():
    net = build_mz(MzConfig(), teleport=passthrough)
    for p, (a_out, b_out) in net.outputs.items():
        assert max_coeff_diff(a_out, net.inputs[p]) < 1e-15
        assert net.inputs[p].modes.isdisjoint(b_out.modes)
    assert visibility(*engine_counts(net))[0] == pytest.approx(1.0, abs=1e-15)


def test_classical_counts():
    r = mz_visibility(MzConfig(TeleporterParams(H=1.0, lam=1.0)))
    assert (r.count_a, r.count_b) == pytest.approx((2.0, 1.0), abs=1e-13)
    assert r.visibility == pytest.approx(1 / 3, abs=1e-13)


@pytest.mark.parametrize("H", [1.05, 1.125, 2.0, 10.0])
def test_balanced_point_has_dark_port(H):
    lo = lambda_opt(H)
    r = mz_visibility(MzConfig(TeleporterParams(H=H, lam=lo), balance_eta=lo**2))
    assert abs(r.count_b) < 1e-14 and r.visibility == pytest.approx(1.0, abs=1e-12)


def test_closed_form_examples():
    cfg = MzConfig(TeleporterParams(H=1.0, lam=1 / math.sqrt(5)), source=NbarInput(1.0))
    assert mz_visibility(cfg, "closed_form").visibility == pytest.approx(math.sqrt(0.2), abs=1e-14)
    cfg = MzConfig(TeleporterParams(H=1.125, lam=1 / 3), balance_eta=1 / 9)
    assert mz_visibility(cfg, "closed_form").visibility == pytest.approx(1.0, abs=1e-14)
    H, lam = 2.0, 0.3
    ca, cb = counts_closed_form(MzConfig(TeleporterParams(H=H, lam=lam), source=NbarInput(0.0)))
    noise = (lam * math.sqrt(H) - math.sqrt(H - 1)) ** 2
    assert (ca, cb) == pytest.approx((noise, noise))
    assert mz_visibility(MzConfig(TeleporterParams(H=H, lam=lam), source=NbarInput(0.0))).visibility == 0.0


def test_vacuum_input_degenerate_flag():
    r = mz_visibility(MzConfig(TeleporterParams(H=1.0, lam=0.0), source=NbarInput(0.0)))
    assert r.degenerate and r.visibility == 0.0


def test_lambda_max_values():
    assert lambda_max(1.0, 1.0) == pytest.approx(0.4472135955, abs=1e-10)
    assert lambda_max(1.0, 4.0) == pytest.approx(math.sqrt(0.5))
    assert lambda_max(1e9, 1.0) == pytest.approx(1.0, abs=1e-8)
    assert vmax_classical(1.0) == pytest.approx(math.sqrt(0.2))
    assert vmax_classical(4.0) == pytest.approx(math.sqrt(0.5))
    assert vmax_classical(0.0) == 0.0
    with pytest.raises(ValueError):
        lambda_max(1.0, 0.0)


def test_lossy_formulas():
    assert lambda_max_lossy(2.0, 1.0) == pytest.approx(math.sqrt(5) / 3)
    assert lambda_max_lossy(1.0, 0.3) == pytest.approx(1 / math.sqrt(5))
    assert lambda_max_lossy(1.125, 0.5) == pytest.approx(math.sqrt(1.5) / math.sqrt(5.25), abs=1e-12)
    assert balance_eta_lossy(0.7, 1.0) == pytest.approx(0.49)
    assert balance_eta_lossy(0.0, 0.3) == 0.0
    assert balance_eta_lossy(0.5, 0.5) == pytest.approx(0.75)
    with pytest.raises(InfeasibleBalance):
        balance_eta_lossy(0.9, 0.1)


def test_general_lambda_reduces():
    for H in (1.0, 1.125, 2.0):
        assert lambda_max_general(H, 1.0) == pytest.approx(lambda_max(H, 1.0))
        # Alice-arm-only loss matches the published lossy expression
        assert lambda_max_general(H, 1.0, eta_a=1.0, eta_b1=0.4, eta_b2=1.0) == pytest.approx(lambda_max_lossy(H, 0.4))


def test_optimizer():
    o = optimize_gain_numeric(MzConfig(TeleporterParams(H=1.0), source=NbarInput(1.0)))
    assert o.lam == pytest.approx(1 / math.sqrt(5), abs=1e-6)
    assert o.visibility == pytest.approx(1 / math.sqrt(5), abs=1e-9)
    o = optimize_gain_numeric(MzConfig(TeleporterParams(H=1.125)), free={"lam", "eta"})
    assert o.visibility == pytest.approx(1.0, abs=1e-9)
    assert o.lam == pytest.approx(1 / 3, abs=1e-5) and o.balance_eta == pytest.approx(1 / 9, abs=1e-5)
    cfg = MzConfig(TeleporterParams(H=2.0, eta_b1=0.9), source=NbarInput(1.0))
    o = optimize_gain_numeric(cfg)
    assert o.lam == pytest.approx(lambda_max_lossy(2.0, 0.9), abs=1e-6)
    with pytest.raises(ValueError):
        optimize_gain_numeric(cfg, free={"x"})


def test_invalid_method():
    with pytest.raises(ValueError):
        mz_visibility(MzConfig(), "nope")
    with pytest.raises(ValueError):
        MzConfig(balance_eta=2.0)


@given(lam=st.floats(0.0, 2.0), H=st.floats(1.0, 10.0), eta=st.floats(0.0, 1.0),
       ea=st.floats(0.2, 1.0), e1=st.floats(0.0, 1.0), e2=st.floats(0.0, 1.0))
def test_engine_matches_closed_form(lam, H, eta, ea, e1, e2):
    cfg = MzConfig(TeleporterParams(H=H, lam=lam, eta_a=ea, eta_b1=e1, eta_b2=e2), balance_eta=eta)
    ce = engine_counts(build_mz(cfg))
    cc = counts_closed_form(cfg)
    scale = 1 + H * (1 + lam**2) / ea
    assert ce == pytest.approx(cc, abs=1e-11 * scale)


@given(x=st.floats(0.0, 1.0), phase=st.floats(0.0, 2 * math.pi), lam=st.floats(0.0, 2.0), H=st.floats(1.0, 5.0))
def test_polarization_independence(x, phase, lam, H):
    import cmath

    src = SinglePhoton(math.sqrt(x), math.sqrt(1 - x) * cmath.exp(1j * phase))
    ref = mz_visibility(MzConfig(TeleporterParams(H=H, lam=lam))).visibility
    assert mz_visibility(MzConfig(TeleporterParams(H=H, lam=lam), source=src)).visibility == pytest.approx(ref, abs=1e-12)


@given(n=st.floats(0.01, 10.0), lam=st.floats(0.0, 2.0))
def test_count_depends_only_on_nbar(n, lam):
    p = TeleporterParams(H=1.3, lam=lam)
    a = counts_closed_form(MzConfig(p, source=NbarInput(n)))
    b = engine_counts(build_mz(MzConfig(p, source=Coherent({"h": math.sqrt(n / 2), "v": 1j * math.sqrt(n / 2)}))))
    assert a == pytest.approx(b, abs=1e-11 * (1 + n))


@given(lam=st.floats(0.0, 2.0), H=st.floats(1.0, 10.0), n=st.floats(0.05, 10.0))
def test_visibility_bounded_by_optimum(lam, H, n):
    cfg = MzConfig(TeleporterParams(H=H, lam=lam), source=NbarInput(n))
    best = lambda_max(H, n)
    v_best = mz_visibility(cfg.with_(lam=best), "closed_form").visibility
    assert mz_visibility(cfg, "closed_form").visibility <= v_best + 1e-12


@given(H=st.floats(1.0, 10.0), lam=st.floats(0.0, 2.0), n=st.floats(0.05, 5.0))
def test_balance_eta_optimal_is_optimal(H, lam, n):
    p = TeleporterParams(H=H, lam=lam)
    eta = balance_eta_optimal(p, n)
    v = mz_visibility(MzConfig(p, eta, NbarInput(n)), "closed_form").visibility
    for e in (0.0, 0.25 * eta, 0.5 * (eta + 1), 1.0):
        assert mz_visibility(MzConfig(p, e, NbarInput(n)), "closed_form").visibility <= v + 1e-12
