"""Finite-dimensional Yangian representations as rational generating fields.

Every field is a :class:`RationalMatrixFunction` in the spectral variable u.
When the Cartan fields are diagonal in the standard basis (the case for all
sl2-seeded representations and their Drinfeld tensor products) their exact
zero/pole spectra are carried along as ``xi_channels``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .cartan import CartanData, GlobalParams, build_cartan
from .ratfun import ZP, Contour, RationalMatrixFunction, Weight, contour_integral

__all__ = [
    "YangianRep",
    "InvalidRepresentationError",
    "RelationReport",
    "from_low_modes",
    "ev_sl2",
    "trivial",
    "shift",
    "verify_relations",
    "modes",
    "is_noncongruent",
    "sample_annulus",
]


class InvalidRepresentationError(ValueError):
    def __init__(self, msg: str, worst: dict[str, float] | None = None):
        super().__init__(msg)
        self.worst = worst or {}


@dataclass(frozen=True)
class YangianRep:
    cartan: CartanData
    params: GlobalParams
    dim: int
    xi: tuple[RationalMatrixFunction, ...]
    xp: tuple[RationalMatrixFunction, ...]
    xm: tuple[RationalMatrixFunction, ...]
    # xi_channels[i][e]: eigenvalue of xi_i on basis vector e (only when xi_i is diagonal)
    xi_channels: tuple[tuple[ZP, ...], ...] | None = None
    provenance: str = "user"

    @property
    def rank(self) -> int:
        return self.cartan.rank

    def channels(self, i: int) -> tuple[ZP, ...]:
        if self.xi_channels is not None:
            return self.xi_channels[i]
        if not self.xi[i].is_diagonal():
            raise ValueError("xi field is not diagonal; use ratfun.simultaneous_eigen")
        return tuple(self.xi[i].diagonal_channel(e) for e in range(self.dim))

    def sigma(self) -> list[complex]:
        """Poles of every xi_i, xi_i^-1 and x_i^+-."""
        pts: list[complex] = []
        for i in range(self.rank):
            pts += self.xi[i].pole_locs + self.xp[i].pole_locs + self.xm[i].pole_locs
            try:
                ch = self.channels(i)
                for z in ch:
                    pts += list(z.zeros) + list(z.poles)
            except ValueError:
                pts += self.xi[i].inverse().pole_locs
        out: list[complex] = []
        for p in pts:
            if all(abs(p - q) > 1e-8 for q in out):
                out.append(complex(p))
        return out

    def xi0(self, i: int) -> np.ndarray:
        return modes(self, i, 0, "xi")

    def field(self, which: str, i: int) -> RationalMatrixFunction:
        return {"xi": self.xi, "x+": self.xp, "x-": self.xm}[which][i]

    def to_json(self) -> dict:
        return {
            "cartan": [self.cartan.type, self.cartan.rank],
            "dim": self.dim,
            "provenance": self.provenance,
            "nodes": [
                {"xi": self.xi[i].to_json(), "x+": self.xp[i].to_json(), "x-": self.xm[i].to_json()}
                for i in range(self.rank)
            ],
        }


def _ad_resolvent(t: np.ndarray, x0: np.ndarray, sign: int, d: int, hbar: complex) -> RationalMatrixFunction:
    """hbar * (u - sign*ad(t)/(2d))^-1 x0, via the eigenbasis of t."""
    n = t.shape[0]
    tau, P = np.linalg.eig(t)
    if np.linalg.cond(P) > 1e10:
        raise InvalidRepresentationError("t_{i,1} is not diagonalizable; defective ad(t) is not supported")
    Pinv = np.linalg.inv(P)
    Y = Pinv @ x0 @ P
    poles = []
    for a in range(n):
        for b in range(n):
            if Y[a, b] == 0:
                continue
            E = np.zeros((n, n), dtype=complex)
            E[a, b] = Y[a, b]
            loc = sign * (tau[a] - tau[b]) / (2 * d)
            poles.append((loc, [hbar * (P @ E @ Pinv)]))
    return RationalMatrixFunction(np.zeros((n, n), dtype=complex), poles)


def from_low_modes(cd: CartanData, params: GlobalParams, data: dict, check: bool = True, tol: float | None = None) -> YangianRep:
    """Build all fields from xi_{i,0}, t_{i,1}, x^+-_{i,0} (keys 'xi0', 't1', 'xp0', 'xm0'; one matrix per node)."""
    h = params.hbar
    xp, xm, xi = [], [], []
    dim = np.asarray(data["xp0"][0]).shape[0]
    for i in range(cd.rank):
        t = np.asarray(data["t1"][i], dtype=complex)
        d = cd.d[i]
        xpi = _ad_resolvent(t, np.asarray(data["xp0"][i], dtype=complex), +1, d, h)
        xmi = _ad_resolvent(t, np.asarray(data["xm0"][i], dtype=complex), -1, d, h)
        x0m = np.asarray(data["xm0"][i], dtype=complex)
        xii = RationalMatrixFunction.identity(dim) + xpi.right(x0m) - xpi.left(x0m)
        xp.append(xpi)
        xm.append(xmi)
        xi.append(xii)
    V = YangianRep(cd, params, dim, tuple(xi), tuple(xp), tuple(xm), None, "user")
    if all(x.is_diagonal() for x in xi):
        V = replace(V, xi_channels=tuple(tuple(x.diagonal_channel(e) for e in range(dim)) for x in xi))
    if check:
        rep = verify_relations(V, 100)
        tol = params.tol if tol is None else tol
        xi0_err = max(float(np.max(np.abs(modes(V, i, 0, "xi") - np.asarray(data["xi0"][i])))) for i in range(cd.rank))
        rep.residuals["xi0"] = xi0_err
        worst = max(rep.residuals.values())
        if worst > tol:
            bad = max(rep.residuals, key=rep.residuals.get)
            raise InvalidRepresentationError(f"relation {bad} fails with residual {worst:.3e}", rep.residuals)
    return V


def ev_sl2(params: GlobalParams, a: complex) -> YangianRep:
    """Two-dimensional evaluation-type representation of the sl2 Yangian at a."""
    cd = build_cartan("A", 1)
    h = params.hbar
    E = np.array([[0, 1], [0, 0]], dtype=complex)
    F = E.T.copy()
    xi = RationalMatrixFunction(np.eye(2), [(a, [h * np.diag([1.0, -1.0])])])
    xp = RationalMatrixFunction.simple_pole(h * E, a)
    xm = RationalMatrixFunction.simple_pole(h * F, a)
    chans = (ZP(1.0, (a - h,), (a,)), ZP(1.0, (a + h,), (a,)))
    return YangianRep(cd, params, 2, (xi,), (xp,), (xm,), (chans,), "seed")


def trivial(cd: CartanData, params: GlobalParams) -> YangianRep:
    one = RationalMatrixFunction.identity(1)
    zero = RationalMatrixFunction.zero(1)
    chans = tuple((ZP(1.0),) for _ in range(cd.rank))
    return YangianRep(cd, params, 1, (one,) * cd.rank, (zero,) * cd.rank, (zero,) * cd.rank, chans, "seed")


def shift(V: YangianRep, a: complex) -> YangianRep:
    """V(a): every field precomposed with u -> u - a."""
    ch = None
    if V.xi_channels is not None:
        ch = tuple(tuple(z.shift(a) for z in row) for row in V.xi_channels)
    return YangianRep(
        V.cartan,
        V.params,
        V.dim,
        tuple(x.shift(a) for x in V.xi),
        tuple(x.shift(a) for x in V.xp),
        tuple(x.shift(a) for x in V.xm),
        ch,
        V.provenance,
    )


def modes(V: YangianRep, i: int, r: int, which: str) -> np.ndarray:
    """Loop generator of degree r: (1/hbar) oint y(u) u^r du around sigma(V)."""
    if r < 0:
        raise ValueError("mode degree must be non-negative")
    F = V.field({"xi": "xi", "x+": "x+", "x-": "x-", "+": "x+", "-": "x-"}[which], i)
    C = Contour(tuple(F.pole_locs))
    return contour_integral(F, C, Weight.power(r)) / V.params.hbar


@dataclass
class RelationReport:
    residuals: dict[str, float]
    n_samples: int

    @property
    def worst(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    def passed(self, tol: float) -> bool:
        return self.worst < tol


def sample_annulus(points: Sequence[complex], n: int, rng: np.random.Generator, inner: float = 2.0, outer: float = 10.0):
    R = max([abs(p) for p in points] + [0.0])
    R = R if R > 0 else 1.0
    rad = R * (inner + (outer - inner) * rng.random(n))
    return rad * np.exp(2j * np.pi * rng.random(n))


def _comm(a, b):
    return a @ b - b @ a


def verify_relations(V: YangianRep, n_samples: int = 100, salt: int = 1) -> RelationReport:
    """Max residual of each field relation over random (u, v) pairs drawn from an annulus around sigma(V)."""
    rng = V.params.rng(salt)
    sig = V.sigma()
    us = sample_annulus(sig, n_samples, rng)
    vs = sample_annulus(sig, n_samples, rng)
    h = V.params.hbar
    cd = V.cartan
    res = {k: 0.0 for k in ("Y1", "Y2", "Y3", "Y4", "Y5")}
    n = V.rank
    xi_u = [V.xi[i].eval(us) for i in range(n)]
    xi_v = [V.xi[i].eval(vs) for i in range(n)]
    xp_u = [V.xp[i].eval(us) for i in range(n)]
    xp_v = [V.xp[i].eval(vs) for i in range(n)]
    xm_u = [V.xm[i].eval(us) for i in range(n)]
    xm_v = [V.xm[i].eval(vs) for i in range(n)]
    X = {+1: (xp_u, xp_v, V.xp), -1: (xm_u, xm_v, V.xm)}
    x0 = {+1: [modes(V, i, 0, "x+") for i in range(n)], -1: [modes(V, i, 0, "x-") for i in range(n)]}
    xi0 = [modes(V, i, 0, "xi") for i in range(n)]
    uv = (us - vs)[:, None, None]
    for i in range(n):
        for j in range(n):
            res["Y1"] = max(res["Y1"], float(np.max(np.abs(_comm(xi_u[i], xi_v[j])))))
            a = h * cd.d[i] * cd.A[i, j] / 2
            for sg in (+1, -1):
                xu, xv, field_ = X[sg]
                y2 = _comm(xi0[i], xu[j]) - sg * cd.d[i] * cd.A[i, j] * xu[j]
                res["Y2"] = max(res["Y2"], float(np.max(np.abs(y2))))
                shifted = field_[j].eval(us - sg * a)
                y3 = (uv - sg * a) * (xi_u[i] @ xv[j]) - (uv + sg * a) * (xv[j] @ xi_u[i]) + sg * 2 * a * (shifted @ xi_u[i])
                res["Y3"] = max(res["Y3"], float(np.max(np.abs(y3))))
                y4 = (
                    (uv - sg * a) * (xu[i] @ xv[j])
                    - (uv + sg * a) * (xv[j] @ xu[i])
                    - h * (_comm(x0[sg][i], xv[j]) - _comm(xu[i], x0[sg][j]))
                )
                res["Y4"] = max(res["Y4"], float(np.max(np.abs(y4))))
            y5 = uv * _comm(xp_u[i], xm_v[j])
            if i == j:
                y5 = y5 + h * (xi_u[i] - xi_v[i])
            res["Y5"] = max(res["Y5"], float(np.max(np.abs(y5))))
    return RelationReport(res, n_samples)


def is_noncongruent(V: YangianRep, tol: float = 1e-8) -> tuple[bool, tuple[complex, complex] | None]:
    """No two poles of x_i^+ (or of x_i^-) differ by a non-zero integer; otherwise return a witness pair."""
    for i in range(V.rank):
        for F in (V.xp[i], V.xm[i]):
            locs = F.pole_locs
            for p in locs:
                for q in locs:
                    d = p - q
                    k = round(d.real)
                    if k != 0 and abs(d - k) < tol:
                        return False, (p, q)
    return True, None
