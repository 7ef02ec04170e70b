"""From Yangian representations to quantum loop representations in z = exp(2 pi i u).

The Cartan fields come from the connection matrix of the additive difference
equation phi(u + 1) = xi_i(u) phi(u); on exact zero/pole channels it is a
ratio of sines, hence rational in z.  The raising/lowering fields are
reconstructed from a window of contour modes

    X^+-_{i,k} = c^+- oint e^{2 pi i k u} g^+-_i(u) x^+-_i(u) du

where g^+ = phi_+(u + 1)^-1 and g^- = phi_- are the canonical solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import gamma as gamma_fn

from .cartan import CartanData, GlobalParams
from .diffeq import canonical_additive, channel_family, connection_matrix, sine_ratio_channel
from .ratfun import ZP, RationalMatrixFunction, Weight, contour_integral, Contour, fit_modes_rational, simultaneous_eigen
from .yangian_rep import RelationReport, YangianRep, modes as ymodes

__all__ = [
    "QLoopRep",
    "ReconstructionError",
    "gamma",
    "choose_constants",
    "qmodes",
    "verify_qrelations",
    "sample_multiplicative",
    "gamma_shift_check",
    "rep_distance",
]


class ReconstructionError(RuntimeError):
    """Mode quadrature did not converge or the rational fit misses the guard modes."""


@dataclass(frozen=True)
class QLoopRep:
    cartan: CartanData
    params: GlobalParams
    dim: int
    psi: tuple[RationalMatrixFunction, ...]
    xp: tuple[RationalMatrixFunction, ...]
    xm: tuple[RationalMatrixFunction, ...]
    psi_channels: tuple[tuple[ZP, ...], ...] | None = None
    provenance: str = "user"
    # h0[i]: Cartan zero mode (the exponent of Psi_i at infinity, in units of pi i hbar)
    h0: tuple[np.ndarray, ...] | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def rank(self) -> int:
        return self.cartan.rank

    def sigma(self) -> list[complex]:
        pts: list[complex] = []
        for i in range(self.rank):
            pts += self.psi[i].pole_locs + self.xp[i].pole_locs + self.xm[i].pole_locs
            if self.psi_channels is not None:
                pts += [complex(a) for z in self.psi_channels[i] for a in z.zeros]
            else:
                pts += self.psi[i].inverse().pole_locs
        out: list[complex] = []
        for p in pts:
            if all(abs(p - q) > 1e-8 for q in out):
                out.append(complex(p))
        return out

    def rescale(self, alpha: complex) -> "QLoopRep":
        """W(alpha): every field precomposed with z -> z / alpha."""
        ch = None
        if self.psi_channels is not None:
            ch = tuple(tuple(z.rescale(alpha) for z in row) for row in self.psi_channels)
        return replace(
            self,
            psi=tuple(f.rescale(alpha) for f in self.psi),
            xp=tuple(f.rescale(alpha) for f in self.xp),
            xm=tuple(f.rescale(alpha) for f in self.xm),
            psi_channels=ch,
        )

    def conjugate(self, P: np.ndarray) -> "QLoopRep":
        """Change of basis by an invertible P (fields become P^-1 F P)."""
        Pinv = np.linalg.inv(P)
        h0 = None if self.h0 is None else tuple(Pinv @ h @ P for h in self.h0)
        return replace(
            self,
            psi=tuple(f.conjugate_by(P, Pinv) for f in self.psi),
            xp=tuple(f.conjugate_by(P, Pinv) for f in self.xp),
            xm=tuple(f.conjugate_by(P, Pinv) for f in self.xm),
            psi_channels=None,
            h0=h0,
        )

    def field(self, which: str, i: int) -> RationalMatrixFunction:
        return {"psi": self.psi, "x+": self.xp, "x-": self.xm}[which][i]

    def to_json(self) -> dict:
        return {
            "cartan": [self.cartan.type, self.cartan.rank],
            "dim": self.dim,
            "provenance": self.provenance,
            "nodes": [
                {"psi": self.psi[i].to_json(), "x+": self.xp[i].to_json(), "x-": self.xm[i].to_json()}
                for i in range(self.rank)
            ],
        }


def qmodes(W: QLoopRep, i: int, k: int, which: str) -> np.ndarray:
    """oint F(z) z^(k-1) dz around the finite non-zero poles of the field."""
    F = W.field(which, i)
    return contour_integral(F, Contour(tuple(F.pole_locs)), Weight.power(k - 1))


def choose_constants(V: YangianRep) -> list[tuple[complex, complex]]:
    """(c^+, c^-) per node: sqrt(d_i) Gamma(hbar d_i) for both."""
    h = V.params.hbar
    out = []
    for d in V.cartan.d:
        c = complex(np.sqrt(d) * gamma_fn(h * d))
        out.append((c, c))
    return out


def _circle_radius(p: complex, others: Sequence[complex], cap: float = 0.25) -> float:
    gap = np.inf
    for q in others:
        base = p - q
        m0 = round(base.real)
        for m in (m0 - 1, m0, m0 + 1):
            dist = abs(base - m)
            if dist > 1e-12:
                gap = min(gap, dist)
    # the integer translates of p itself
    gap = min(gap, 1.0)
    return min(cap, 0.5 * gap)


def _node_eigen(V: YangianRep, i: int):
    if V.xi_channels is not None or V.xi[i].is_diagonal():
        return np.eye(V.dim, dtype=complex), list(V.channels(i))
    eig = simultaneous_eigen([V.xi[i]])
    if not eig.semisimple:
        raise ReconstructionError("non-semisimple xi field: channel data unavailable")
    return eig.P, list(eig.channels[0])


def _pole_modes(F, p, g_logs, P, Pinv, c: complex, ks: np.ndarray, sig: list[complex], tol: float):
    """X_k for k in ks from the circle around the single pole ``p`` of x^+-_i.

    The quadrature runs on exp(2 pi i k (u - p)), which stays O(1) on the
    circle; the factor w^k, w = exp(2 pi i p), is restored afterwards.
    """
    r = _circle_radius(p.loc, sig)
    dim = F.shape[0]

    def estimate(n):
        e = np.exp(2j * np.pi * np.arange(n) / n)
        u = p.loc + r * e
        G = np.einsum("ab,nb,bc->nac", P, np.exp(g_logs(u)), Pinv)
        B = G @ F.eval(u)
        ph = np.exp(2j * np.pi * np.outer(ks, r * e))
        return np.einsum("kn,nab->kab", ph * (r * e)[None, :], B) / n

    n = 64
    prev = estimate(n)
    ok = False
    while n < 1024:
        n *= 2
        cur = estimate(n)
        if np.max(np.abs(cur - prev)) <= tol * max(1.0, float(np.max(np.abs(cur)))):
            ok = True
            prev = cur
            break
        prev = cur
    if not ok:
        raise ReconstructionError(f"mode quadrature around {p.loc:.4g} did not converge with {n} points")
    w = np.exp(2j * np.pi * p.loc)
    vals = c * prev * (w ** ks.astype(complex))[:, None, None]
    return vals.reshape(len(ks), dim, dim), (complex(p.loc), r, n)


def gamma(
    V: YangianRep,
    constants: Sequence[tuple[complex, complex]] | None = None,
    N: int | None = None,
    window: int | None = None,
    quad_tol: float = 1e-10,
) -> QLoopRep:
    """The quantum loop representation attached to a non-congruent Yangian representation."""
    from .yangian_rep import is_noncongruent

    ok, wit = is_noncongruent(V)
    if not ok:
        raise ValueError(f"representation is congruent (poles {wit[0]} and {wit[1]} differ by an integer)")
    prm = V.params
    N = prm.n_inner if N is None else N
    constants = choose_constants(V) if constants is None else constants
    sig = V.sigma()
    psi, xp, xm, chans_out, h0 = [], [], [], [], []
    meta = {"N": N, "circles": [], "guard_residual": 0.0, "connection_check": 0.0}
    for i in range(V.rank):
        P, chans = _node_eigen(V, i)
        Pinv = np.linalg.inv(P)
        zch = [sine_ratio_channel(z) for z in chans]
        Psi = RationalMatrixFunction.from_diagonal([z.to_rational() for z in zch])
        if not np.allclose(P, np.eye(V.dim)):
            Psi = Psi.conjugate_by(Pinv, P)
        psi.append(Psi)
        chans_out.append(tuple(zch))
        fam = channel_family(P, chans)
        # independent route: truncated connection products against the sine ratio
        conn = connection_matrix(fam, N)
        rng = prm.rng(100 + i)
        us = 0.37 + 0.5 * rng.random(2) + 1j * (0.2 + 0.3 * rng.random(2))
        L = conn.logs_u(us)
        for u, lrow in zip(us, L):
            S = P @ np.diag(np.exp(lrow)) @ Pinv
            meta["connection_check"] = max(meta["connection_check"], float(np.max(np.abs(S - Psi.eval(np.exp(2j * np.pi * u))))))
        plus = canonical_additive(fam, 1.0, "+", N)
        minus = canonical_additive(fam, 1.0, "-", N)
        g_plus = lambda u, plus=plus: -plus.logs(np.asarray(u) + 1.0)
        g_minus = lambda u, minus=minus: minus.logs(u)
        h0.append(ymodes(V, i, 0, "xi"))
        for which, g, c, out in (("+", g_plus, constants[i][0], xp), ("-", g_minus, constants[i][1], xm)):
            F = V.xp[i] if which == "+" else V.xm[i]
            if not F.poles:
                out.append(RationalMatrixFunction.zero(V.dim))
                continue
            fit = RationalMatrixFunction.zero(V.dim)
            for p in F.poles:
                # one pole per fit keeps the mode system well conditioned when |w| spans decades
                kp = p.order + (2 if window is None else window)
                ks = np.arange(-kp, kp + 1)
                vals, info = _pole_modes(F, p, g, P, Pinv, c, ks, sig, quad_tol)
                meta["circles"].append((i, which) + info)
                mds = {int(k): vals[j] for j, k in enumerate(ks)}
                piece, resid = fit_modes_rational(mds, [(np.exp(2j * np.pi * p.loc), p.order)], guard=(int(-kp), int(kp)))
                meta["guard_residual"] = max(meta["guard_residual"], resid)
                if resid > 1e-7:
                    raise ReconstructionError(f"node {i} x{which}: guard modes missed by {resid:.3e} (relative)")
                fit = fit + piece
            out.append(fit)
    meta["anchor_residual"] = max(
        float(np.max(np.abs(psi[i].value_at_infinity() - expm(1j * np.pi * prm.hbar * h0[i])))) for i in range(V.rank)
    )
    return QLoopRep(V.cartan, prm, V.dim, tuple(psi), tuple(xp), tuple(xm), tuple(chans_out), "gamma", tuple(h0), meta)


def sample_multiplicative(points: Sequence[complex], n: int, rng: np.random.Generator, lo: float = 0.3, hi: float = 3.0, margin: float = 1e-2):
    """Log-uniform radii between lo*min|p| and hi*max|p|, uniform angles, kept away from the points."""
    mags = [abs(p) for p in points if abs(p) > 0] or [1.0]
    a, b = np.log(lo * min(mags)), np.log(hi * max(mags))
    out = []
    while len(out) < n:
        z = np.exp(a + (b - a) * rng.random()) * np.exp(2j * np.pi * rng.random())
        if all(abs(z - p) > margin * max(1.0, abs(p)) for p in points):
            out.append(z)
    return np.array(out)


def _comm(a, b):
    return a @ b - b @ a


def verify_qrelations(W: QLoopRep, n_samples: int = 100, salt: int = 2) -> RelationReport:
    """Residuals of the quantum loop field relations QL1..QL5 at sampled (z, w) pairs."""
    rng = W.params.rng(salt)
    sig = W.sigma()
    cd = W.cartan
    n = W.rank
    q = W.params.q
    qi = [W.params.q_i(d) for d in cd.d]
    # keep away from q-shifted poles as well, since QL3 evaluates X at q^-+a z
    avoid = list(sig)
    for i in range(n):
        for j in range(n):
            a = cd.d[i] * cd.A[i, j]
            avoid += [p * q**a for p in sig] + [p * q ** (-a) for p in sig]
    zs = sample_multiplicative(avoid, n_samples, rng)
    ws = sample_multiplicative(avoid, n_samples, rng)
    res = {k: 0.0 for k in ("QL1", "QL2", "QL3", "QL4", "QL5")}
    psi_z = [f.eval(zs) for f in W.psi]
    psi_w = [f.eval(ws) for f in W.psi]
    X = {+1: ([f.eval(zs) for f in W.xp], [f.eval(ws) for f in W.xp], W.xp), -1: ([f.eval(zs) for f in W.xm], [f.eval(ws) for f in W.xm], W.xm)}
    inf = {+1: [f.value_at_infinity() for f in W.xp], -1: [f.value_at_infinity() for f in W.xm]}
    zc = zs[:, None, None]
    wc = ws[:, None, None]
    for i in range(n):
        p_inf = W.psi[i].value_at_infinity()
        p_zero = W.psi[i].eval(0.0)
        res["QL1"] = max(res["QL1"], float(np.max(np.abs(p_inf @ p_zero - np.eye(W.dim)))))
        for j in range(n):
            res["QL1"] = max(res["QL1"], float(np.max(np.abs(psi_z[i] @ psi_w[j] - psi_w[j] @ psi_z[i]))))
            a = cd.d[i] * cd.A[i, j]
            for sg in (+1, -1):
                Q = q ** (sg * a)
                xz, xw, fld = X[sg]
                ql2 = p_inf @ xw[j] @ p_zero - Q * xw[j]
                res["QL2"] = max(res["QL2"], float(np.max(np.abs(ql2))))
                shifted = fld[j].eval(zs / Q)
                ql3 = (zc - Q * wc) * (psi_z[i] @ xw[j]) - (Q * zc - wc) * (xw[j] @ psi_z[i]) + (Q - 1 / Q) * Q * wc * (shifted @ psi_z[i])
                res["QL3"] = max(res["QL3"], float(np.max(np.abs(ql3))))
                ql4 = (
                    (zc - Q * wc) * (xz[i] @ xw[j])
                    - (Q * zc - wc) * (xw[j] @ xz[i])
                    - (zc * (inf[sg][i] @ xw[j] - Q * xw[j] @ inf[sg][i]) + wc * (inf[sg][j] @ xz[i] - Q * xz[i] @ inf[sg][j]))
                )
                res["QL4"] = max(res["QL4"], float(np.max(np.abs(ql4))))
            ql5 = (zc - wc) * _comm(X[+1][0][i], X[-1][1][j])
            if i == j:
                ql5 = ql5 - (zc * psi_w[i] - wc * psi_z[i] - (zc - wc) * p_zero) / (qi[i] - 1 / qi[i])
            res["QL5"] = max(res["QL5"], float(np.max(np.abs(ql5))))
    return RelationReport(res, n_samples)


def rep_distance(W1: QLoopRep, W2: QLoopRep, n_samples: int = 40, salt: int = 3) -> float:
    """Max field difference at common sample points."""
    pts = sample_multiplicative(W1.sigma() + W2.sigma(), n_samples, W1.params.rng(salt))
    worst = 0.0
    for a, b in ((W1.psi, W2.psi), (W1.xp, W2.xp), (W1.xm, W2.xm)):
        for fa, fb in zip(a, b):
            worst = max(worst, float(np.max(np.abs(fa.eval(pts) - fb.eval(pts)))))
    return worst


def gamma_shift_check(V: YangianRep, a: complex, **kw) -> float:
    """|Gamma(V(a)) - Gamma(V)(exp(2 pi i a))| on sample points."""
    from .yangian_rep import shift

    W = gamma(V, **kw)
    Wa = gamma(shift(V, a), **kw)
    return rep_distance(Wa, W.rescale(np.exp(2j * np.pi * a)))
