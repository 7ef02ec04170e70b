import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from merotensor.cartan import build_cartan
from merotensor.drinfeld_tensor import ytensor
from merotensor.gamma_functor import (
    choose_constants,
    gamma,
    gamma_shift_check,
    qmodes,
    rep_distance,
    sample_multiplicative,
    verify_qrelations,
)
from merotensor.yangian_rep import ev_sl2, trivial

from helpers import maxabs

E = np.array([[0, 1], [0, 0]], dtype=complex)
Z_POINTS = (0.3 + 0.2j, 1.7 - 0.4j, -2.2 + 0.9j)


@pytest.fixture(scope="module")
def W_ev(params):
    a = 0.45 + 0.2j
    return a, gamma(ev_sl2(params, a))


def test_psi_of_ev_sl2_closed_form(params, W_ev):
    a, W = W_ev
    q, al = params.q, np.exp(2j * np.pi * a)
    for z in Z_POINTS:
        expect = [q * (z - al / q**2) / (z - al), (z - al * q**2) / (q * (z - al))]
        assert maxabs(np.diag(W.psi[0].eval(z)) - expect) < 1e-13
        assert maxabs(W.psi[0].eval(z) - np.diag(expect)) < 1e-13


def test_raising_lowering_of_ev_sl2_closed_form(params, W_ev):
    a, W = W_ev
    al = np.exp(2j * np.pi * a)
    for z in Z_POINTS:
        assert maxabs(W.xp[0].eval(z) - z / (z - al) * E) < 1e-13
        assert maxabs(W.xm[0].eval(z) - z / (z - al) * E.T) < 1e-13
    for k in range(-2, 3):
        assert abs(qmodes(W, 0, k, "x+")[0, 1] - al**k) < 1e-12 * max(1.0, abs(al**k))


def test_meta_diagnostics(W_ev):
    meta = W_ev[1].meta
    assert meta["guard_residual"] < 1e-10
    assert meta["connection_check"] < 1e-10
    assert meta["anchor_residual"] < 1e-13


def test_ev_sl2_image_satisfies_relations(W_ev):
    rep = verify_qrelations(W_ev[1], 100)
    assert set(rep.residuals) == {"QL1", "QL2", "QL3", "QL4", "QL5"}
    assert rep.worst < 1e-10


def test_tensor_image_satisfies_relations(seeds):
    W = gamma(ytensor(ytensor(seeds[0], seeds[1], 0.6), seeds[2], -0.4 + 0.3j))
    assert W.dim == 8
    assert verify_qrelations(W, 100).worst < 1e-7


def test_large_imaginary_parameter_is_reconstructed(pair):
    """Poles with |z| spread over decades: exp(2 pi i s) for Im s = 0.71 is about 0.01."""
    W = gamma(ytensor(*pair, 0.13 + 0.71j))
    assert W.meta["guard_residual"] < 1e-9
    assert verify_qrelations(W, 100).worst < 1e-9


def test_cartan_field_from_commutator_of_raising_field(params, pair):
    W = gamma(ytensor(*pair, 0.3 - 0.2j))
    q = params.q
    Xm0 = qmodes(W, 0, 0, "x-")
    for z in Z_POINTS:
        Xp = W.xp[0].eval(z)
        lhs = W.psi[0].eval(z) - W.psi[0].eval(0.0)
        assert maxabs(lhs - (q - 1 / q) * (Xp @ Xm0 - Xm0 @ Xp)) < 1e-11


@pytest.mark.parametrize("a", [0.0, 1.0, -2.0])
def test_integer_shift_is_invisible(pair, a):
    assert gamma_shift_check(pair[0], a) < 1e-12


@pytest.mark.parametrize("a", [0.23 - 0.1j, -0.4 + 0.05j])
def test_shift_becomes_rescaling(pair, a):
    assert gamma_shift_check(pair[1], a) < 1e-9


def test_shift_of_tensor_becomes_rescaling(pair):
    assert gamma_shift_check(ytensor(*pair, 0.31 + 0.1j), 0.17 - 0.08j) < 1e-8


def test_constants_for_simply_laced_and_g2(params):
    c = choose_constants(ev_sl2(params, 0.1))
    assert c == [(complex(gamma_fn(params.hbar)),) * 2]
    cd = build_cartan("G", 2)
    got = choose_constants(trivial(cd, params))
    for (cp, cm), d in zip(got, cd.d):
        expect = np.sqrt(d) * gamma_fn(params.hbar * d)
        assert abs(cp - expect) < 1e-14 * abs(expect) and cp == cm


def test_constants_act_as_gauge(params, W_ev):
    a, W = W_ev
    V = ev_sl2(params, a)
    c = choose_constants(V)[0][0]
    lam = 1.7 - 0.4j
    Wl = gamma(V, constants=[(lam * c, c / lam)])
    for z in Z_POINTS:
        assert maxabs(Wl.xp[0].eval(z) - lam * W.xp[0].eval(z)) < 1e-13
        assert maxabs(Wl.xm[0].eval(z) - W.xm[0].eval(z) / lam) < 1e-13
    assert verify_qrelations(Wl, 50).worst < 1e-10


def test_rescale_is_a_group_action(W_ev):
    W = W_ev[1]
    a, b = 1.3 - 0.2j, 0.6 + 0.5j
    assert rep_distance(W.rescale(a).rescale(b), W.rescale(a * b)) < 1e-12


def test_conjugation_preserves_relations(W_ev):
    P = np.array([[1.0, 0.3j], [0.2, 1.0]])
    W = W_ev[1].conjugate(P)
    assert verify_qrelations(W, 50).worst < 1e-10


def test_congruent_input_is_rejected(params):
    V = ev_sl2(params, 0.1)
    with pytest.raises(ValueError, match="congruent"):
        gamma(ytensor(V, V, 1.0))


def test_trivial_maps_to_trivial(params):
    W = gamma(trivial(build_cartan("A", 2), params))
    assert W.dim == 1
    for i in range(2):
        assert maxabs(W.psi[i].eval(0.7) - 1.0) == 0.0
        assert maxabs(W.xp[i].eval(0.7)) == 0.0


def test_sample_multiplicative_avoids_points(params):
    pts = [0.5, 2.0j]
    z = sample_multiplicative(pts, 300, params.rng(0))
    assert np.all(np.abs(z) > 0)
    for p in pts:
        assert np.min(np.abs(z - p)) > 1e-3


def test_json_structure(W_ev):
    js = W_ev[1].to_json()
    assert js["cartan"] == ["A", 1] and js["dim"] == 2 and js["provenance"] == "gamma"
    assert len(js["nodes"]) == 1
