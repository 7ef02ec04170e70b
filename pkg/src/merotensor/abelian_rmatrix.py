"""Commutative R-matrices on tensor products, additive and multiplicative.

On a pair of representations whose Cartan fields have exact zero/pole channels,
the contour integral defining the coefficient operator collapses to residues:
for a channel of xi_i on V1 with zeros a_k and poles b_k,

    oint t_i'(v) t_j(v + S) dv = sum_k t_j(a_k + S) - sum_k t_j(b_k + S),

so each tensor channel of the coefficient operator is a finite product of
shifted channel values of V2.  The multiplicative version is identical with
Psi_j / Psi_j(0) evaluated at q^(l+r) zeta a_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .cartan import CartanData
from .diffeq import (
    EULER_GAMMA,
    CanonicalSolution,
    OperatorFamily,
    canonical_additive,
    canonical_qdifference,
    channel_family,
)
from .ratfun import ZP, RationalMatrixFunction, StarLog, circle_quadrature, log_derivative, simultaneous_eigen
from .yangian_rep import YangianRep, modes as ymodes, sample_annulus, shift

__all__ = [
    "flip",
    "embed",
    "omega_h",
    "rep_eigen",
    "qrep_eigen",
    "build_A_yangian",
    "build_A_yangian_quadrature",
    "quadratic_coefficient",
    "build_R0_yangian",
    "intertwiner_defect",
    "build_A_qloop",
    "build_A_qloop_quadrature",
    "build_R0_qloop",
    "qloop_fixed_point_sign",
    "h_modes",
    "damiani_log_series",
    "build_twist_J",
    "twist_intertwines",
    "SideConditionError",
]


class SideConditionError(ValueError):
    """eps * hbar lies on the negative real axis; the twist products are not defined."""


def flip(n1: int, n2: int) -> np.ndarray:
    """Permutation matrix of V1 (x) V2 -> V2 (x) V1."""
    P = np.zeros((n1 * n2, n1 * n2))
    for a in range(n1):
        for b in range(n2):
            P[b * n1 + a, a * n2 + b] = 1.0
    return P


def embed(op: np.ndarray, dims: Sequence[int], legs: tuple[int, int]) -> np.ndarray:
    """Operator on legs (i, j), i < j, of a multi-factor tensor product as a full matrix."""
    dims = list(dims)
    i, j = legs
    n = len(dims)
    T = op.reshape(dims[i], dims[j], dims[i], dims[j])
    eye = [np.eye(d) for d in dims]
    full = np.zeros(dims + dims, dtype=complex)
    # build via einsum over the untouched legs
    letters = "abcdefgh"
    out_idx = letters[:n]
    in_idx = "ABCDEFGH"[:n]
    parts = [f"{out_idx[i]}{out_idx[j]}{in_idx[i]}{in_idx[j]}"]
    ops = [T]
    for k in range(n):
        if k not in (i, j):
            parts.append(f"{out_idx[k]}{in_idx[k]}")
            ops.append(eye[k])
    full = np.einsum(",".join(parts) + "->" + out_idx + in_idx, *ops)
    N = int(np.prod(dims))
    return full.reshape(N, N)


def _cartan_zero_modes(V) -> list[np.ndarray]:
    if isinstance(V, YangianRep):
        return [ymodes(V, i, 0, "xi") for i in range(V.rank)]
    if V.h0 is None:
        raise ValueError("quantum loop representation carries no Cartan zero modes")
    return list(V.h0)


def omega_h(V1, V2) -> np.ndarray:
    """sum_ij (B^-1)_ij xi_{i,0} (x) xi_{j,0} on V1 (x) V2."""
    cd: CartanData = V1.cartan
    h1 = _cartan_zero_modes(V1)
    h2 = _cartan_zero_modes(V2)
    Binv = np.asarray(cd.B_inv, dtype=float)
    out = np.zeros((V1.dim * V2.dim,) * 2, dtype=complex)
    for i in range(cd.rank):
        for j in range(cd.rank):
            if Binv[i, j] != 0:
                out = out + Binv[i, j] * np.kron(h1[i], h2[j])
    return out


def rep_eigen(V: YangianRep) -> tuple[np.ndarray, list[list[ZP]]]:
    """Shared eigenbasis of all xi_i with per-node channel lists."""
    if V.xi_channels is not None:
        return np.eye(V.dim, dtype=complex), [list(r) for r in V.xi_channels]
    eig = simultaneous_eigen(list(V.xi))
    if not eig.semisimple:
        raise ValueError("xi family is not semisimple; use build_A_yangian_quadrature")
    return eig.P, eig.channels


def qrep_eigen(W) -> tuple[np.ndarray, list[list[ZP]]]:
    if W.psi_channels is not None:
        return np.eye(W.dim, dtype=complex), [list(r) for r in W.psi_channels]
    eig = simultaneous_eigen(list(W.psi))
    if not eig.semisimple:
        raise ValueError("Psi family is not semisimple")
    return eig.P, eig.channels


def _c_terms(cd: CartanData):
    """(i, j, r, c_ij^(r)) for every non-zero coefficient of C(T)."""
    out = []
    for i in range(cd.rank):
        for j in range(cd.rank):
            for r, c in cd.c_coeff(i, j).items():
                if c:
                    out.append((i, j, r, c))
    return out


def _channel_product_A(cd: CartanData, h: complex, ch1, ch2) -> list[ZP]:
    """Closed-form channels of the additive coefficient operator."""
    l = cd.l
    terms = _c_terms(cd)
    out = []
    for e in range(len(ch1[0])):
        for f in range(len(ch2[0])):
            acc = ZP(1.0)
            for i, j, r, c in terms:
                mu = ch2[j][f]
                sh = (l + r) * h / 2
                # mu(s + sh + x) as a function of s is mu.shift(-(sh + x))
                for a in ch1[i][e].zeros:
                    acc = acc * mu.shift(-(sh + a)).power(-c)
                for b in ch1[i][e].poles:
                    acc = acc * mu.shift(-(sh + b)).power(c)
            out.append(acc)
    return out


def build_A_yangian(V1: YangianRep, V2: YangianRep, K: int = 40) -> OperatorFamily:
    """Coefficient operator A(s) on V1 (x) V2 as a channel family in s."""
    P1, ch1 = rep_eigen(V1)
    P2, ch2 = rep_eigen(V2)
    chans = _channel_product_A(V1.cartan, V1.params.hbar, ch1, ch2)
    fam = channel_family(np.kron(P1, P2), chans, K)
    fam.truncation["omega"] = omega_h(V1, V2)
    return fam


def build_A_yangian_quadrature(V1: YangianRep, V2: YangianRep, s: complex) -> np.ndarray:
    """A(s) from the defining contour integral: small circles around sigma(V1), star-cut logs on V2, expm."""
    cd = V1.cartan
    h = V1.params.hbar
    l = cd.l
    terms = _c_terms(cd)
    dprime = [log_derivative(V1.xi[i]) for i in range(V1.rank)]
    logs2 = []
    for j in range(V2.rank):
        P2, ch2 = rep_eigen(V2)
        from .ratfun import EigenData

        eig = EigenData(P2, np.linalg.inv(P2), [list(ch2[j])], [[e] for e in range(V2.dim)], True)
        logs2.append(StarLog(V2.xi[j], "additive", eig))
    total = np.zeros((V1.dim * V2.dim,) * 2, dtype=complex)
    sig = V1.sigma()
    for i, j, r, c in terms:
        S = s + (l + r) * h / 2
        for p in sig:
            others = [x for x in sig if abs(x - p) > 1e-12]
            rad = min([0.25] + [0.5 * abs(p - x) for x in others])
            # the shifted cut [-S, b - S] must stay outside the circle
            for b in V2.sigma() + [0.0]:
                t = b - S
                seg = np.linspace(-S, t, 200)
                rad = min(rad, 0.5 * float(np.min(np.abs(seg - p))))

            def f(v, i=i, j=j, S=S):
                v = np.atleast_1d(v)
                return np.stack([np.kron(dprime[i].eval(x), logs2[j](x + S)) for x in v])

            val, _, ok = circle_quadrature(f, p, rad, tol=1e-13)
            total = total - c * val
    return expm(total)


def quadratic_coefficient(A: OperatorFamily, radii=(1e3, 3e3, 1e4, 3e4, 1e5), n_dirs: int = 4) -> np.ndarray:
    """Least-squares fit of A(s) - 1 = c2/s^2 + c3/s^3 + c4/s^4 along several rays; returns c2."""
    rows, ys = [], []
    for k in range(n_dirs):
        d = np.exp(2j * np.pi * (k + 0.3) / n_dirs)
        for R in radii:
            s = R * d
            D = np.expm1(A.logs(s)[0])
            rows.append([s**-2, s**-3, s**-4])
            ys.append(A.P @ np.diag(D) @ A.Pinv)
    M = np.array(rows)
    Y = np.array([y.reshape(-1) for y in ys])
    sc = np.max(np.abs(M), axis=0)
    sol, *_ = np.linalg.lstsq(M / sc, Y, rcond=None)
    return (sol[0] / sc[0]).reshape(ys[0].shape)


def build_R0_yangian(V1: YangianRep, V2: YangianRep, side: str, N: int | None = None, A: OperatorFamily | None = None) -> CanonicalSolution:
    """R^{0,+}(s) = prod_{n>=0} A(s + n l hbar)^-1  or  R^{0,-}(s) = prod_{n>=1} A(s - n l hbar)."""
    A = build_A_yangian(V1, V2) if A is None else A
    N = V1.params.n_inner if N is None else N
    step = V1.cartan.l * V1.params.hbar
    R = canonical_additive(A, step, side, N)
    R.truncation["omega"] = A.truncation.get("omega")
    return R


def intertwiner_defect(R, V1: YangianRep, V2: YangianRep, s: complex, r_max: int = 2) -> float:
    """max over modes of |M X' - X'' M| where M = flip R(s), X' on V1(s) (x)_0 V2, X'' on V2 (x)_0 V1(s).

    ``R`` is a family (called at s) or an explicit matrix.
    """
    from .drinfeld_tensor import ytensor

    Rm = R(s) if callable(R) else np.asarray(R)
    M = flip(V1.dim, V2.dim) @ Rm
    V1s = shift(V1, s)
    left = ytensor(V1s, V2, 0.0)
    right = ytensor(V2, V1s, 0.0)
    worst = 0.0
    for i in range(V1.rank):
        for which in ("xi", "x+", "x-"):
            for r in range(r_max + 1):
                Xl = ymodes(left, i, r, which)
                Xr = ymodes(right, i, r, which)
                worst = max(worst, float(np.max(np.abs(M @ Xl - Xr @ M))))
    return worst


# ---------------------------------------------------------------------------
# multiplicative side


def _tilde(z: ZP) -> ZP:
    """Psi channel divided by its value at 0."""
    return z * (1.0 / complex(z(0.0)))


def _channel_product_Aq(cd: CartanData, q: complex, ch1, ch2) -> list[ZP]:
    l = cd.l
    terms = _c_terms(cd)
    out = []
    for e in range(len(ch1[0])):
        for f in range(len(ch2[0])):
            acc = ZP(1.0)
            for i, j, r, c in terms:
                mu = _tilde(ch2[j][f])
                k = q ** (l + r)
                for a in ch1[i][e].zeros:
                    acc = acc * mu.rescale(1.0 / (k * a)).power(-c)
                for b in ch1[i][e].poles:
                    acc = acc * mu.rescale(1.0 / (k * b)).power(c)
            # exact normalization at infinity (the constant is 1 up to rounding)
            out.append(ZP(1.0, acc.zeros, acc.poles))
    return out


def _two_sided_family(P: np.ndarray, chans: list[ZP]) -> OperatorFamily:
    """Channel family with logs normalized to vanish at 0 for small |z| and at infinity for large |z|."""
    P = np.asarray(P, dtype=complex)
    Pinv = np.linalg.inv(P)
    mags = [abs(x) for z in chans for x in z.zeros + z.poles] or [1.0]
    mid = float(np.sqrt(min(mags) * max(mags)))

    def logs(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        small = np.abs(z) < mid
        out = np.empty((len(z), len(chans)), dtype=complex)
        for k, ch in enumerate(chans):
            lo = ch.log_at_zero_normalized(np.where(small, z, 0.0))
            hi = ch.log_at(np.where(small, 1e300, z))
            out[:, k] = np.where(small, lo, hi)
        return out

    return OperatorFamily(len(chans), P, Pinv, logs, None, 0.0, None, None, True, {}, chans)


def build_A_qloop(W1, W2) -> OperatorFamily:
    """Multiplicative coefficient operator on W1 (x) W2 as a channel family in zeta."""
    q = W1.params.q
    if abs(abs(q) - 1.0) < 1e-12:
        raise ValueError("|q| = 1: the multiplicative R-matrix is not defined")
    P1, ch1 = qrep_eigen(W1)
    P2, ch2 = qrep_eigen(W2)
    chans = _channel_product_Aq(W1.cartan, q, ch1, ch2)
    fam = _two_sided_family(np.kron(P1, P2), chans)
    fam.truncation["omega"] = omega_h(W1, W2)
    return fam


def build_A_qloop_quadrature(W1, W2, zeta: complex) -> np.ndarray:
    """Contour-integral route: circles around sigma(W1), trigonometric star-cut logs of Psi_j / Psi_j(0)."""
    from .ratfun import EigenData

    cd = W1.cartan
    q = W1.params.q
    l = cd.l
    terms = _c_terms(cd)
    dprime = [log_derivative(W1.psi[i]) for i in range(W1.rank)]
    P2, ch2 = qrep_eigen(W2)
    logs2 = []
    for j in range(W2.rank):
        src = W2.psi[j].left(np.linalg.inv(W2.psi[j].eval(0.0)))
        eig = EigenData(P2, np.linalg.inv(P2), [[_tilde(z) for z in ch2[j]]], [[e] for e in range(W2.dim)], True)
        logs2.append(StarLog(src, "trigonometric", eig))
    total = np.zeros((W1.dim * W2.dim,) * 2, dtype=complex)
    sig = W1.sigma()
    for i, j, r, c in terms:
        k = q ** (l + r) * zeta
        for p in sig:
            others = [x for x in sig if abs(x - p) > 1e-12]
            rad = min([0.25 * abs(p)] + [0.5 * abs(p - x) for x in others])

            def f(w, i=i, j=j, k=k):
                w = np.atleast_1d(w)
                return np.stack([np.kron(dprime[i].eval(x), logs2[j](k * x)) for x in w])

            val, _, _ = circle_quadrature(f, p, rad, tol=1e-13)
            total = total - c * val
    return expm(total)


def qloop_fixed_point_sign(q: complex, side: str) -> int:
    """Sign of the q^(+-Omega) prefactor of R^{0,side}.

    The product for ``side`` is normalized at 0 when (side '+', |q| < 1) or
    (side '-', |q| > 1), and at infinity otherwise.  Matching the expansion of
    the formal series at zeta = 0 requires q^-Omega there, and unitarity then
    forces q^+Omega at infinity.
    """
    at_zero = (side == "+") == (abs(q) < 1)
    return -1 if at_zero else +1


def build_R0_qloop(W1, W2, side: str, A: OperatorFamily | None = None):
    """R^{0,side}(zeta) as a callable returning matrices, with attributes ``bar`` and ``prefactor``."""
    A = build_A_qloop(W1, W2) if A is None else A
    q = W1.params.q
    p = q ** (2 * W1.cartan.l)
    bar = canonical_qdifference(A, p, side)
    sgn = qloop_fixed_point_sign(q, side)
    Om = A.truncation["omega"]
    pref = expm(sgn * 1j * np.pi * W1.params.hbar * Om)

    def R(zeta):
        v = bar(zeta)
        return pref @ v if np.ndim(zeta) == 0 else np.einsum("ab,nbc->nac", pref, v)

    R.bar = bar  # type: ignore[attr-defined]
    R.prefactor = pref  # type: ignore[attr-defined]
    R.sign = sgn  # type: ignore[attr-defined]
    R.family = A  # type: ignore[attr-defined]
    return R


def h_modes(z: ZP, qi: complex, rmax: int) -> tuple[np.ndarray, np.ndarray]:
    """H_{i,r} and H_{i,-r} (r = 1..rmax) for one Psi channel c prod(z-a)/prod(z-b)."""
    rs = np.arange(1, rmax + 1)
    za = np.array(z.zeros, dtype=complex)
    pb = np.array(z.poles, dtype=complex)
    den = rs * (qi - 1 / qi)
    hp = np.array([(np.sum(pb**r) - np.sum(za**r)) for r in rs]) / den
    hm = np.array([(np.sum(za ** (-r)) - np.sum(pb ** (-r))) for r in rs]) / den
    return hp, hm


def damiani_log_series(W1, W2, mmax: int = 3) -> list[np.ndarray]:
    """Coefficients of zeta^m (m = 1..mmax) of the exponent in the formal series at zeta = 0, per tensor channel."""
    cd = W1.cartan
    q = W1.params.q
    l = cd.l
    P1, ch1 = qrep_eigen(W1)
    P2, ch2 = qrep_eigen(W2)
    qi = [W1.params.q_i(d) for d in cd.d]
    n1, n2 = len(ch1[0]), len(ch2[0])
    out = []
    for m in range(1, mmax + 1):
        diag = np.zeros(n1 * n2, dtype=complex)
        for i in range(cd.rank):
            for j in range(cd.rank):
                cij = cd.c_coeff(i, j)
                cval = sum(c * q ** (m * r) for r, c in cij.items())
                if cval == 0:
                    continue
                w = m * (qi[i] - 1 / qi[i]) * (qi[j] - 1 / qi[j]) * cval / (q ** (m * l) - q ** (-m * l))
                for e in range(n1):
                    hp, _ = h_modes(ch1[i][e], qi[i], mmax)
                    for f in range(n2):
                        _, hm = h_modes(ch2[j][f], qi[j], mmax)
                        diag[e * n2 + f] += -w * hp[m - 1] * hm[m - 1]
        out.append(diag)
    return out


# ---------------------------------------------------------------------------
# the twist


def build_twist_J(V1: YangianRep, V2: YangianRep, eps: str, n_inner: int | None = None, n_outer: int | None = None) -> CanonicalSolution:
    """J(s) = e^{gamma hbar Omega} prod_{m>=1} R^{0,eps}(s+m) e^{-hbar Omega/m}, as the family Phi_+(s+1)^-1."""
    h = V1.params.hbar
    eh = h if eps == "+" else -h
    if abs(eh.imag) < 1e-14 and eh.real < 0:
        raise SideConditionError(f"eps*hbar = {eh} is a negative real number")
    n_inner = V1.params.n_inner if n_inner is None else n_inner
    n_outer = V1.params.n_outer if n_outer is None else n_outer
    R = build_R0_yangian(V1, V2, eps, n_inner)
    Phi = canonical_additive(R, 1.0, "+", n_outer)

    def logs(s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return -Phi.logs(s + 1.0)

    J = CanonicalSolution(
        R.dim, R.P, R.Pinv, logs, None, 0.0, None, Phi.A0, True,
        {"N_inner": n_inner, "N_outer": n_outer, "gamma": EULER_GAMMA}, None, "+", 1.0, R,
    )
    J.truncation["omega"] = R.truncation.get("omega")
    J.truncation["R"] = R
    return J


def twist_intertwines(V1: YangianRep, V2: YangianRep, eps: str, s: complex, J: CanonicalSolution | None = None, n_samples: int = 20, **gamma_kw) -> dict[str, float]:
    """Per-sector max |J X' J^-1 - X''| with X' on Gamma(V1) (x)_zeta Gamma(V2) and X'' on Gamma(V1 (x)_s V2)."""
    from .drinfeld_tensor import qtensor, ytensor
    from .gamma_functor import gamma, sample_multiplicative

    J = build_twist_J(V1, V2, eps) if J is None else J
    zeta = np.exp(2j * np.pi * s)
    Wt = qtensor(gamma(V1, **gamma_kw), gamma(V2, **gamma_kw), zeta)
    Wg = gamma(ytensor(V1, V2, s), **gamma_kw)
    Jm = J(s)
    Ji = np.linalg.inv(Jm)
    pts = sample_multiplicative(Wt.sigma() + Wg.sigma(), n_samples, V1.params.rng(31))
    out = {}
    for name, a, b in (("psi", Wt.psi, Wg.psi), ("x+", Wt.xp, Wg.xp), ("x-", Wt.xm, Wg.xm)):
        worst = 0.0
        for fa, fb in zip(a, b):
            A = fa.eval(pts)
            B = fb.eval(pts)
            worst = max(worst, float(np.max(np.abs(Jm @ A @ Ji - B))))
        out[name] = worst
    return out
