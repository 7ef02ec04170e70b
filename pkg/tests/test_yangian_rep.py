import numpy as np
import pytest
from hypothesis import given, strategies as st

from merotensor.cartan import GlobalParams, build_cartan
from merotensor.drinfeld_tensor import ytensor
from merotensor.ratfun import RationalMatrixFunction as RMF
from merotensor.yangian_rep import (
    InvalidRepresentationError,
    YangianRep,
    ev_sl2,
    from_low_modes,
    is_noncongruent,
    modes,
    sample_annulus,
    shift,
    trivial,
    verify_relations,
)

from helpers import maxabs

E = np.array([[0, 1], [0, 0]], dtype=complex)
F = E.T.copy()
H = np.diag([1.0, -1.0]).astype(complex)
SAMPLES = np.array([2.1 + 0.3j, -1.4 + 1.9j, 0.2 - 2.6j])

coord = st.floats(-1.0, 1.0, allow_nan=False)
cplx = st.builds(complex, coord, coord)


def sl2_data(a, hbar):
    """Low modes of the two-dimensional evaluation representation at a."""
    return {"xi0": [H], "t1": [a * H - hbar / 2 * np.eye(2)], "xp0": [E], "xm0": [F]}


def same_fields(V, W, pts=SAMPLES):
    d = 0.0
    for i in range(V.rank):
        for which in ("xi", "x+", "x-"):
            d = max(d, V.field(which, i).max_abs_diff(W.field(which, i), pts))
    return d


def test_ev_sl2_closed_form(params):
    a, h = 0.3 - 0.2j, params.hbar
    V = ev_sl2(params, a)
    for u in SAMPLES:
        x = u - a
        assert maxabs(V.xi[0].eval(u) - np.diag([(x + h) / x, (x - h) / x])) < 1e-14
        assert maxabs(V.xp[0].eval(u) - h * E / x) < 1e-14
        assert maxabs(V.xm[0].eval(u) - h * F / x) < 1e-14
    sig = V.sigma()
    assert len(sig) == 3 and all(min(abs(p - z) for z in sig) < 1e-15 for p in (a, a - h, a + h))


def test_ev_sl2_relations(params):
    rep = verify_relations(ev_sl2(params, 0.45 + 0.2j), 100)
    assert set(rep.residuals) == {"Y1", "Y2", "Y3", "Y4", "Y5"}
    assert rep.worst < 1e-10


def test_ev_sl2_y5_field_identity_is_exact(params):
    V = ev_sl2(params, 0.1)
    h = params.hbar
    for u, v in [(1.3, -0.7j), (2.0 + 1j, 0.4 - 0.5j)]:
        lhs = (u - v) * (V.xp[0].eval(u) @ V.xm[0].eval(v) - V.xm[0].eval(v) @ V.xp[0].eval(u))
        assert maxabs(lhs + h * (V.xi[0].eval(u) - V.xi[0].eval(v))) < 1e-15


def test_modes_of_ev_sl2(params):
    a = 0.6 + 0.25j
    V = ev_sl2(params, a)
    for r in range(5):
        assert maxabs(modes(V, 0, r, "x+") - a**r * E) < 1e-12
        assert maxabs(modes(V, 0, r, "x-") - a**r * F) < 1e-12
    xi0 = modes(V, 0, 0, "xi")
    assert maxabs(xi0 - H) < 1e-13
    x0p, x0m = modes(V, 0, 0, "x+"), modes(V, 0, 0, "x-")
    assert maxabs(x0p @ x0m - x0m @ x0p - xi0) < 1e-13
    with pytest.raises(ValueError):
        modes(V, 0, -1, "xi")


def test_field_invariants_at_infinity(seeds):
    for V in seeds + [ytensor(seeds[0], seeds[1], 0.3)]:
        for i in range(V.rank):
            assert maxabs(V.xi[i].value_at_infinity() - np.eye(V.dim)) == 0.0
            assert maxabs(V.xp[i].value_at_infinity()) == 0.0
            # first Laurent coefficient at infinity is hbar x_{i,0}
            lead = V.xp[i].series_at_infinity(1)[1]
            assert maxabs(lead - V.params.hbar * modes(V, i, 0, "x+")) < 1e-12


def test_from_low_modes_recovers_ev_sl2(params):
    a = -0.35 + 0.4j
    V = from_low_modes(build_cartan("A", 1), params, sl2_data(a, params.hbar))
    assert same_fields(V, ev_sl2(params, a)) < 1e-13


def test_from_low_modes_round_trip(params):
    """modes() of the built representation give back the generating data."""
    a, h = 0.2 + 0.1j, params.hbar
    V = from_low_modes(build_cartan("A", 1), params, sl2_data(a, h))
    xi1 = modes(V, 0, 1, "xi")
    xi0 = modes(V, 0, 0, "xi")
    assert maxabs(xi0 - H) < 1e-10
    assert maxabs(xi1 - h / 2 * xi0 @ xi0 - (a * H - h / 2 * np.eye(2))) < 1e-10
    assert maxabs(modes(V, 0, 0, "x+") - E) < 1e-10
    assert maxabs(modes(V, 0, 0, "x-") - F) < 1e-10


def test_zero_raising_data_gives_trivial_fields(params):
    z = np.zeros((3, 3))
    V = from_low_modes(build_cartan("A", 1), params, {"xi0": [z], "t1": [np.diag([0.1, 0.2, 0.3])], "xp0": [z], "xm0": [z]})
    assert maxabs(V.xi[0].eval(0.7) - np.eye(3)) == 0.0
    assert V.xp[0].pole_locs == [] and V.xm[0].pole_locs == []


def test_perturbed_data_is_rejected(params):
    rng = np.random.default_rng(8)
    data = sl2_data(0.1, params.hbar)
    data["xm0"] = [F + 0.05 * rng.normal(size=(2, 2))]
    with pytest.raises(InvalidRepresentationError) as err:
        from_low_modes(build_cartan("A", 1), params, data)
    assert err.value.worst["Y5"] > params.tol


def test_corrupted_rep_fails_y3(params):
    V = ev_sl2(params, 0.1)
    bad = YangianRep(V.cartan, params, 2, V.xi, (V.xp[0].shift(0.05),), V.xm, V.xi_channels)
    rep = verify_relations(bad)
    assert rep.residuals["Y3"] > 1e3 * params.tol


def test_drinfeld_tensor_of_seeds_satisfies_relations(seeds):
    V = ytensor(seeds[0], seeds[1], 0.37 - 0.21j)
    assert verify_relations(V, 100).worst < 1e-8


def test_weight_commutation_on_rank_two_data(params):
    """Two commuting Cartan fields: Y1 on a user representation of sl3 built from diagonal data."""
    cd = build_cartan("A", 2)
    E1 = np.zeros((3, 3), dtype=complex)
    E1[0, 1] = 1
    E2 = np.zeros((3, 3), dtype=complex)
    E2[1, 2] = 1
    H1, H2 = np.diag([1.0, -1.0, 0.0]), np.diag([0.0, 1.0, -1.0])
    a, h = 0.15 + 0.1j, params.hbar
    # vector representation at a; the second node sits hbar/2 further along
    t1 = [a * H1 - h / 2 * np.diag([1.0, 1.0, 0.0]), (a + h / 2) * H2 - h / 2 * np.diag([0.0, 1.0, 1.0])]
    data = {"xi0": [H1, H2], "t1": t1, "xp0": [E1, E2], "xm0": [E1.T, E2.T]}
    try:
        V = from_low_modes(cd, params, data)
    except InvalidRepresentationError as err:
        pytest.fail(f"vector representation rejected: {err.worst}")
    for i in range(2):
        for j in range(2):
            for u, v in [(1.5, -2.0j), (3 + 1j, 0.7)]:
                Xi, Xj = V.xi[i].eval(u), V.xi[j].eval(v)
                assert maxabs(Xi @ Xj - Xj @ Xi) < 1e-12


# shifts --------------------------------------------------------------


def test_shift_of_seed_at_zero(params):
    a = 0.25 - 0.4j
    assert same_fields(shift(ev_sl2(params, 0.0), a), ev_sl2(params, a)) < 1e-14


@given(cplx, cplx)
def test_shift_is_a_group_action(a, b):
    P = GlobalParams()
    V = ytensor(ev_sl2(P, 0.1), ev_sl2(P, -0.2j), 0.6)
    pts = SAMPLES * 4
    assert same_fields(shift(shift(V, a), b), shift(V, a + b), pts) < 1e-11


@given(cplx)
def test_shift_moves_sigma(a):
    P = GlobalParams()
    V = ev_sl2(P, 0.3)
    moved = sorted(shift(V, a).sigma(), key=lambda z: (z.real, z.imag))
    expect = sorted((p + a for p in V.sigma()), key=lambda z: (z.real, z.imag))
    assert maxabs(np.array(moved) - np.array(expect)) < 1e-14


# congruence ------------------------------------------------------------


def test_single_pole_is_noncongruent(params):
    assert is_noncongruent(ev_sl2(params, 0.3 + 0.2j)) == (True, None)


def test_integer_shift_tensor_is_congruent(params):
    a = 0.3 + 0.2j
    V = ytensor(ev_sl2(params, a), ev_sl2(params, a), 1.0)
    ok, witness = is_noncongruent(V)
    assert not ok
    assert abs(abs(witness[0] - witness[1]) - 1.0) < 1e-12
    assert min(abs(w - a) for w in witness) < 1e-12 and min(abs(w - a - 1) for w in witness) < 1e-12


def test_generic_shifts_are_noncongruent(params):
    rng = np.random.default_rng(21)
    V1, V2 = ev_sl2(params, 0.1), ev_sl2(params, 0.45 + 0.2j)
    for s in rng.normal(size=10) + 1j * rng.normal(size=10):
        assert is_noncongruent(ytensor(V1, V2, s))[0]


def test_sample_annulus_stays_in_band():
    rng = np.random.default_rng(0)
    z = sample_annulus([0.5, -2.0j], 200, rng)
    assert np.all(np.abs(z) >= 4.0 - 1e-12) and np.all(np.abs(z) <= 20.0 + 1e-12)


def test_trivial_rep(params):
    T = trivial(build_cartan("D", 4), params)
    assert T.dim == 1 and T.sigma() == []
    assert verify_relations(T).worst == 0.0


def test_json_has_every_node(params):
    V = ev_sl2(params, 0.1)
    js = V.to_json()
    assert js["cartan"] == ["A", 1] and len(js["nodes"]) == 1
    back = RMF.from_json(js["nodes"][0]["x+"])
    assert back.max_abs_diff(V.xp[0], SAMPLES) == 0.0
