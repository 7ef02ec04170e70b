import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from merotensor.ratfun import (
    Contour,
    NonCommutingError,
    RationalMatrixFunction as RMF,
    Weight,
    ZP,
    circle_quadrature,
    contour_integral,
    fit_modes_rational,
    log_derivative,
    simultaneous_eigen,
    star_log,
)

from helpers import maxabs

HBAR = 0.35 + 0.2j
SAMPLES = np.array([1.3 + 0.7j, -0.9 + 1.1j, 2.2 - 0.4j, -1.7 - 0.8j])

coord = st.floats(-1.0, 1.0, allow_nan=False)
cplx = st.builds(complex, coord, coord)


def xi(a, dim=1):
    """1 + hbar/(u - a) times the identity."""
    return RMF(np.eye(dim), [(a, [HBAR * np.eye(dim)])])


def test_eval_at_shifted_pole_gives_two():
    a = 0.2 - 0.1j
    assert abs(xi(a).eval(a + HBAR)[0, 0] - 2.0) < 1e-14


def test_eval_refuses_points_on_a_pole():
    with pytest.raises(Exception):
        xi(0.3).eval(0.3)


def test_product_of_equal_simple_poles_is_double_pole():
    a = 0.4 + 0.3j
    F = RMF.simple_pole(np.eye(1), a)
    G = F @ F
    assert G.order_at(a) == 2
    p = G.poles[0]
    assert maxabs(p.parts[0]) < 1e-14
    assert abs(p.parts[1][0, 0] - 1.0) < 1e-14


@given(cplx, cplx, cplx)
def test_product_is_pointwise(a, b, c):
    rng = np.random.default_rng(3)
    M1, M2 = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))
    F = RMF(np.eye(2), [(a, [M1])])
    G = RMF(M2, [(b + 2.5, [M1 @ M2])])
    u = c + 3.0j
    assert maxabs((F @ G).eval(u) - F.eval(u) @ G.eval(u)) < 1e-11


@given(cplx, cplx)
def test_kron_shift_rescale_pointwise(a, b):
    F = xi(a, 2) + RMF.simple_pole(np.array([[0, 1], [0, 0]]), b + 2.0)
    u = 4.0 - 3.0j
    assert maxabs(F.kron(F).eval(u) - np.kron(F.eval(u), F.eval(u))) < 1e-11
    assert maxabs(F.shift(0.7).eval(u) - F.eval(u - 0.7)) < 1e-12
    z = 1.3 - 0.4j
    assert maxabs(F.rescale(z).eval(u) - F.eval(u / z)) < 1e-12


def test_inverse_is_pointwise_inverse():
    rng = np.random.default_rng(5)
    N = 0.3 * (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    F = RMF(np.eye(3), [(0.2, [N]), (-0.5j, [N @ N])])
    Finv = F.inverse()
    for u in SAMPLES:
        assert maxabs(Finv.eval(u) @ F.eval(u) - np.eye(3)) < 1e-10


def test_json_round_trip():
    F = RMF(np.diag([1, 2j]), [(0.1 + 0.2j, [np.ones((2, 2)), np.eye(2)])])
    G = RMF.from_json(F.to_json())
    assert F.max_abs_diff(G, SAMPLES) == 0.0


def test_from_callable_recovers_principal_parts():
    F = RMF(np.eye(2), [(0.3, [np.diag([1.0, 2.0]), np.eye(2)]), (-0.4 + 0.2j, [np.ones((2, 2))])])
    G = RMF.from_callable(F.eval, [0.3, -0.4 + 0.2j], F.const, max_order=3)
    assert F.max_abs_diff(G, SAMPLES) < 1e-9


# contour integrals ------------------------------------------------------


def test_unit_residue():
    F = RMF.simple_pole(np.eye(1), 2.0)
    C = Contour.around([2.0])
    for method in ("residue", "quadrature"):
        assert abs(contour_integral(F, C, method=method)[0, 0] - 1.0) < 1e-10


def test_double_pole_picks_weight_derivative():
    a = 0.3 + 0.1j
    F = RMF(np.zeros((1, 1)), [(a, [np.zeros((1, 1)), np.eye(1)])])
    alpha = 1.7 - 0.2j
    g = Weight.exponential(alpha)
    exact = alpha * cmath.exp(alpha * a)
    assert abs(contour_integral(F, Contour.around([a]), g)[0, 0] - exact) < 1e-12


@pytest.mark.parametrize("weight", [Weight.power(3), Weight.exponential(0.8j), Weight.polynomial([1, -2, 0.5j])])
def test_quadrature_agrees_with_residues(weight):
    rng = np.random.default_rng(11)
    parts = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3)]
    F = RMF(np.eye(2), [(0.1, parts), (0.9 + 0.4j, parts[:1])])
    C = Contour.around([0.1, 0.9 + 0.4j])
    r = contour_integral(F, C, weight, method="residue")
    qd = contour_integral(F, C, weight, method="quadrature")
    assert maxabs(r - qd) < 1e-10


def test_circle_quadrature_converges_and_reports():
    val, n, ok = circle_quadrature(lambda u: np.exp(u) / u**3, 0.0, 1.0)
    assert ok and abs(val - 0.5) < 1e-12 and n <= 1024


# zero/pole scalars ------------------------------------------------------


@given(cplx, cplx, cplx)
def test_zp_cancels_and_evaluates(z, p, u):
    f = ZP(2.0, (z, p + 3.0), (p + 3.0,))
    assert f.poles == () and len(f.zeros) == 1
    w = u + 5.0j
    assert abs(f(w) - 2.0 * (w - z)) < 1e-11


def test_zp_rational_round_trip():
    f = ZP(1.0, (0.2, -0.3j), (0.5, 0.1 + 0.1j))
    g = ZP.from_rational(f.to_rational())
    for u in SAMPLES:
        assert abs(f(u) - g(u)) < 1e-12


# star-cut logarithms ----------------------------------------------------


def test_scalar_star_log_closed_form():
    a, b = 0.3 + 0.2j, -0.4 + 0.1j
    F = ZP(1.0, (a,), (b,)).to_rational()
    t = star_log(F)
    for u in SAMPLES:
        exact = cmath.log(1 - a / u) - cmath.log(1 - b / u)
        assert abs(t(u)[0, 0] - exact) < 1e-13


def test_star_log_of_identity_vanishes():
    t = star_log(RMF.identity(3))
    assert maxabs(t(1.1 + 0.3j)) == 0.0


def test_star_log_exponentiates_back_and_decays():
    from scipy.linalg import expm

    P = np.array([[1.0, 0.4j], [0.3, 1.0]])
    D = RMF.from_diagonal([ZP(1.0, (0.1 - HBAR,), (0.1,)), ZP(1.0, (0.5 + 0.2j,), (-0.3j,))])
    F = D.conjugate_by(P, np.linalg.inv(P))
    t = star_log(F)
    for u in SAMPLES:
        assert maxabs(expm(t(u)) - F.eval(u)) < 1e-9
    assert maxabs(t(1e7)) < 1e-6


def test_trigonometric_star_log_vanishes_at_zero():
    F = ZP(1.0, (2.0, 1.5j), (-1.8, 3.0 + 0.2j))
    F = ZP(F(0.0) ** -1, F.zeros, F.poles).to_rational()
    t = star_log(F, variant="trigonometric")
    assert maxabs(t(1e-9)) < 1e-8
    from scipy.linalg import expm

    assert maxabs(expm(t(0.4 + 0.3j)) - F.eval(0.4 + 0.3j)) < 1e-12


def test_star_log_rejects_unnormalized():
    with pytest.raises(ValueError):
        star_log(RMF(2 * np.eye(1), [(0.1, [np.eye(1)])]))


# log derivative ---------------------------------------------------------


def test_log_derivative_closed_form():
    a = 0.2 + 0.3j
    L = log_derivative(xi(a))
    for u in SAMPLES:
        assert abs(L.eval(u)[0, 0] + HBAR / ((u - a) * (u - a + HBAR))) < 1e-13


def test_log_derivative_of_constant_is_zero():
    assert maxabs(log_derivative(RMF.constant(np.diag([2.0, 3.0]))).eval(0.7)) == 0.0


def test_argument_principle_counts_zeros_minus_poles():
    rng = np.random.default_rng(2)
    N = 0.2 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    F = RMF(np.eye(2), [(0.0, [N])])
    L = log_derivative(F)
    C = Contour([0.0], (3.0,))
    count = np.trace(contour_integral(L, C, method="quadrature"))
    nz = sum(abs(z) < 3.0 for z in F.det_zeros())
    assert abs(count - (nz - 2 * F.order_at(0.0))) < 1e-8


# shared eigenbases ------------------------------------------------------


def test_diagonal_family_uses_standard_basis():
    F = RMF.from_diagonal([ZP(1.0, (0.1,), (0.2,)), ZP(1.0, (0.3,), (0.4,))])
    E = simultaneous_eigen([F])
    assert np.array_equal(E.P, np.eye(2)) and E.semisimple


def test_tensor_of_spectral_functions_has_four_channels():
    s = 0.6 - 0.2j
    A = RMF(np.eye(2), [(0.1, [HBAR * np.diag([1.0, -1.0])])])
    F = A.shift(-s).kron(A)
    G = A.kron(RMF.identity(2))
    E = simultaneous_eigen([F, G])
    assert E.dim == 4 and len(E.channels[0]) == 4
    for u in SAMPLES:
        D = E.Pinv @ F.eval(u) @ E.P
        vals = np.array([ch(u) for ch in E.channels[0]])
        assert maxabs(D - np.diag(vals)) < 1e-10


def test_non_commuting_family_is_rejected():
    X = RMF.simple_pole(np.array([[0, 1], [0, 0]]), 0.1)
    Y = RMF.simple_pole(np.array([[0, 0], [1, 0]]), 0.2)
    with pytest.raises(NonCommutingError):
        simultaneous_eigen([X + RMF.identity(2), Y + RMF.identity(2)])


# rational reconstruction from contour modes -----------------------------


@pytest.mark.parametrize("w", [0.5 + 0.2j, 1.1 - 0.3j, 40.0 * cmath.exp(0.3j), 0.02j + 0.01])
def test_fit_modes_round_trip(w):
    """Exact modes of a rational function are refit, even when |w| is far from 1."""
    rng = np.random.default_rng(4)
    parts = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(2)]
    const = -sum(N * (-w) ** (-(n + 1)) for n, N in enumerate(parts))
    X = RMF(const, [(w, parts)])
    ks = range(-4, 5)
    C = Contour([w], (0.5 * abs(w),))
    modes = {k: contour_integral(X, C, Weight.power(k - 1), method="residue") for k in ks}
    Y, resid = fit_modes_rational(modes, [(w, 2)], guard=(-4, 4))
    assert resid < 1e-10
    assert X.max_abs_diff(Y, w + abs(w) * SAMPLES) < 1e-9 * max(1.0, X.scale())
