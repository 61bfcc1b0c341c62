import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mzteleport.fock import FockState, expect_number
from mzteleport.modes import (
    FieldExpression,
    ModeRegistry,
    beamsplitter,
    commutator,
    commutator_norm,
    dagger,
    degenerate_pa,
    identity_expr,
    linear_combine,
    loss_channel,
    max_coeff_diff,
    phase_shift,
    two_mode_squeeze,
    zero_expr,
)
from mzteleport.teleporter import amplifier_fig2

unit = st.floats(0.0, 1.0)
gain = st.floats(1.0, 50.0)
cplx = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def _random_expr(reg, rng, n=3):
    modes = [reg.new(f"m{i}") for i in range(n)]
    return FieldExpression(reg, rng.normal() + 1j * rng.normal(),
                           {m: rng.normal() + 1j * rng.normal() for m in modes},
                           {m: rng.normal() + 1j * rng.normal() for m in modes})


def test_identity_expr(reg):
    m = reg.new("a")
    e = identity_expr(reg, m)
    assert commutator_norm(e) == 1.0
    assert dagger(e).cre == {m: 1.0} and not dagger(e).ann
    assert expect_number(e, FockState.vacuum()) == 0.0


def test_unregistered_mode_rejected(reg):
    other = ModeRegistry()
    m = other.new("x")
    with pytest.raises(KeyError):
        identity_expr(reg, m)


def test_canonical_form_drops_zeros(reg):
    a, b = reg.new_many("a", "b")
    e = FieldExpression(reg, 0j, {a: 1.0, b: 0.0}, {b: 1e-17})
    assert e.ann == {a: 1.0} and e.cre == {}


def test_dagger_example(reg):
    a, v = reg.new_many("a", "v")
    e = identity_expr(reg, a) + 2 * dagger(identity_expr(reg, v))
    d = dagger(e)
    assert d.cre == {a: 1.0} and d.ann == {v: 2.0}


def test_cancellation(reg):
    e = identity_expr(reg, reg.new("a"))
    assert linear_combine([(1, e), (-1, e)]).is_zero()
    assert commutator_norm(zero_expr(reg)) == 0.0
    with pytest.raises(ValueError):
        linear_combine([])


def test_mixed_registries_rejected(reg):
    e1 = identity_expr(reg, reg.new("a"))
    r2 = ModeRegistry()
    e2 = identity_expr(r2, r2.new("a"))
    with pytest.raises(ValueError):
        e1 + e2


def test_commutator_norm_by_hand(reg, rng):
    for _ in range(3):
        e1, e2, e3 = (_random_expr(reg, rng) for _ in range(3))
        w = rng.normal(size=3) + 1j * rng.normal(size=3)
        comb = linear_combine(zip(w, (e1, e2, e3)))
        alpha = sum(wi * np.array([e.ann.get(m, 0) for m in reg.modes]) for wi, e in zip(w, (e1, e2, e3)))
        beta = sum(wi * np.array([e.cre.get(m, 0) for m in reg.modes]) for wi, e in zip(w, (e1, e2, e3)))
        assert commutator_norm(comb) == pytest.approx(np.sum(abs(alpha) ** 2) - np.sum(abs(beta) ** 2), abs=1e-12)


def test_beamsplitter_examples(reg):
    a, b = (identity_expr(reg, m) for m in reg.new_many("a_h", "b_h"))
    c, d = beamsplitter(a, b, 0.5)
    assert max_coeff_diff(c, (a + b) / math.sqrt(2)) < 1e-15
    assert max_coeff_diff(d, (a - b) / math.sqrt(2)) < 1e-15
    p, q = beamsplitter(a, b, 1.0)
    assert max_coeff_diff(p, a) == 0 and max_coeff_diff(q, -b) == 0
    # empty interferometer: split then recombine returns the input on one port
    out, dark = beamsplitter(c, d, 0.5)
    assert max_coeff_diff(out, a) < 1e-15
    assert max_coeff_diff(dark, b) < 1e-15
    with pytest.raises(ValueError):
        beamsplitter(a, b, 1.5)


def test_loss_channel_examples(reg):
    a = identity_expr(reg, reg.new("a"))
    assert max_coeff_diff(loss_channel(a, 1.0), a) == 0
    out = loss_channel(a, 0.0)
    assert a.modes.isdisjoint(out.modes) and commutator_norm(out) == 1.0
    with pytest.raises(ValueError):
        loss_channel(a, -0.1)


def test_two_mode_squeeze_examples(reg):
    m1, m2 = reg.new_many("v3", "v4")
    b1, b2 = two_mode_squeeze(reg, m1, m2, 1.0)
    assert max_coeff_diff(b1, identity_expr(reg, m1)) == 0
    assert max_coeff_diff(b2, identity_expr(reg, m2)) == 0
    H = 1.125
    assert (math.sqrt(H) - math.sqrt(H - 1)) ** 2 == pytest.approx(0.5, abs=1e-15)
    b1, b2 = two_mode_squeeze(reg, m1, m2, H)
    assert expect_number(b1, FockState.vacuum()) == pytest.approx(H - 1, abs=1e-14)
    assert abs(commutator(b1, b2)) < 1e-15 and abs(commutator(b1, dagger(b2))) < 1e-15
    with pytest.raises(ValueError):
        two_mode_squeeze(reg, m1, m2, 0.5)


def test_degenerate_pa_examples(reg):
    a = identity_expr(reg, reg.new("a"))
    assert max_coeff_diff(degenerate_pa(a, 1.0), a) == 0
    assert commutator_norm(degenerate_pa(a, 7.0, -1)) == pytest.approx(1.0, abs=1e-13)
    with pytest.raises(ValueError):
        degenerate_pa(a, 2.0, 0)


def test_split_amplify_recombine_composite(reg):
    a = identity_expr(reg, reg.new("a_in"))
    b = identity_expr(reg, reg.new("b1"))
    for G in (1.0, 4.0, 100.0):
        out = amplifier_fig2(a, b, G)
        direct = math.sqrt(G) * a + math.sqrt(G - 1) * dagger(b)
        assert max_coeff_diff(out, direct) < 1e-12


@given(lam=st.floats(0.0, 3.0), H=st.floats(1.0, 1e3))
def test_limit_teleporter_output_commutator_identity(lam, H):
    val = lam**2 + (math.sqrt(H) - lam * math.sqrt(H - 1)) ** 2 - (lam * math.sqrt(H) - math.sqrt(H - 1)) ** 2
    assert val == pytest.approx(1.0, rel=1e-9, abs=1e-9)


@given(cplx, cplx, cplx)
def test_dagger_involution_and_sign(d, x, y):
    reg = ModeRegistry()
    a, b = reg.new_many("a", "b")
    e = FieldExpression(reg, d, {a: x}, {b: y})
    assert max_coeff_diff(dagger(dagger(e)), e) == 0
    assert commutator_norm(dagger(e)) == pytest.approx(-commutator_norm(e), abs=1e-12)


@given(st.lists(st.tuples(st.sampled_from(["bs", "loss", "pa", "phase", "tms"]), unit, gain), min_size=1, max_size=8))
def test_canonical_composition_preserves_commutator(ops):
    reg = ModeRegistry()
    x = [identity_expr(reg, reg.new("a")), identity_expr(reg, reg.new("b"))]
    for kind, t, g in ops:
        if kind == "bs":
            x = list(beamsplitter(x[0], x[1], t))
        elif kind == "loss":
            x[0] = loss_channel(x[0], t)
        elif kind == "pa":
            x[1] = degenerate_pa(x[1], g, 1 if t < 0.5 else -1)
        elif kind == "phase":
            x[0] = phase_shift(x[0], 2 * math.pi * t)
        else:
            v3, v4 = reg.new_many("s1", "s2")
            b1, _ = two_mode_squeeze(reg, v3, v4, g)
            x[1] = beamsplitter(x[1], b1, t)[0]
    scale = max(1.0, max(abs(c) for e in x for c in (*e.ann.values(), *e.cre.values())) ** 2)
    for e in x:
        assert commutator_norm(e) == pytest.approx(1.0, abs=1e-9 * scale)
    assert abs(commutator(x[0], x[1])) < 1e-9 * scale
    assert abs(commutator(x[0], dagger(x[1]))) < 1e-9 * scale
